"""scikit-learn style wrappers around the solvers.

The "data" passed to :meth:`fit` is an :class:`~irgc.mrf_model.MRFModel`;
fitting minimizes its energy and stores the labeling in ``labels_``::

    >>> from irgc.estimator import IRGC
    >>> from irgc.synthetic import two_node_example
    >>> IRGC(hybrid=True).fit(two_node_example()).energy_
    1.0
"""

from __future__ import annotations

import time

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from irgc.mrf_model import energy
from irgc.solvers import SolverOptions, SolveTrace, alpha_expansion, brute_force_min, irgc, irgc_hybrid
from irgc.validation import check_labeling, check_model


class _EnergyMinimizer(BaseEstimator):
    def _record(self, model, x, trace, started):
        self.labels_ = np.asarray(x, dtype=np.int64)
        self.energy_ = float(energy(model, self.labels_))
        self.trace_ = trace
        self.n_iter_ = max((r.iteration for r in trace), default=0)
        self.fit_time_ = time.perf_counter() - started
        return self

    def fit_predict(self, model, y=None):
        return self.fit(model).labels_

    def score(self, model, y=None):
        """Negative energy of the fitted labeling on ``model`` (higher is better)."""
        check_is_fitted(self, "labels_")
        return -energy(check_model(model), check_labeling(model, self.labels_))


class IRGC(_EnergyMinimizer):
    """Iteratively reweighted graph cut; ``hybrid=True`` adds an expansion sweep per iteration."""

    def __init__(self, initial_weight=0.5, max_iterations=100, convergence=1e-9, hybrid=False):
        self.initial_weight = initial_weight
        self.max_iterations = max_iterations
        self.convergence = convergence
        self.hybrid = hybrid

    def _options(self):
        return SolverOptions(self.initial_weight, self.max_iterations, self.convergence, self.hybrid)

    def fit(self, model, y=None):
        model = check_model(model)
        opts = self._options()
        started = time.perf_counter()
        x, trace = irgc_hybrid(model, opts) if self.hybrid else irgc(model, opts)
        return self._record(model, x, trace, started)


class AlphaExpansion(_EnergyMinimizer):
    """Alpha-expansion from ``init`` (all zeros by default) until a sweep stops improving."""

    def __init__(self, max_iterations=100, convergence=1e-9, init=None):
        self.max_iterations = max_iterations
        self.convergence = convergence
        self.init = init

    def fit(self, model, y=None):
        model = check_model(model)
        opts = SolverOptions(max_iterations=self.max_iterations, convergence=self.convergence)
        started = time.perf_counter()
        x, trace = alpha_expansion(model, self.init, opts)
        return self._record(model, x, trace, started)


class ExhaustiveSearch(_EnergyMinimizer):
    """Global minimum by enumeration; only for tiny models."""

    def fit(self, model, y=None):
        model = check_model(model)
        started = time.perf_counter()
        x, _ = brute_force_min(model)
        return self._record(model, x, SolveTrace(), started)
