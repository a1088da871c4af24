"""Pairwise priors on label differences and their convex/concave split.

Every prior ``theta(z)`` handled here is written as ``h(g(z))`` with ``g``
convex and ``h`` concave and non-decreasing. For priors that are convex up to
an inflection point ``lam`` and concave after it, ``g`` follows ``theta`` up to
``lam`` and continues linearly with slope ``theta'(lam-)``; ``h`` is the
identity up to ``theta(lam)`` and undoes the linear extension beyond it. The
corrupted Gaussian uses ``g(z) = z**2``.

All evaluators accept scalars or numpy arrays.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np


class PriorKind(str, enum.Enum):
    TRUNCATED_LINEAR = "TRUNCATED_LINEAR"
    TRUNCATED_QUADRATIC = "TRUNCATED_QUADRATIC"
    CAUCHY = "CAUCHY"
    CORRUPTED_GAUSSIAN = "CORRUPTED_GAUSSIAN"
    CONVEX_LINEAR = "CONVEX_LINEAR"
    CONVEX_QUADRATIC = "CONVEX_QUADRATIC"


INFLECTION_KINDS = frozenset(
    {PriorKind.TRUNCATED_LINEAR, PriorKind.TRUNCATED_QUADRATIC, PriorKind.CAUCHY}
)
CONVEX_KINDS = frozenset({PriorKind.CONVEX_LINEAR, PriorKind.CONVEX_QUADRATIC})


@dataclass(frozen=True)
class PriorSpec:
    """Prior family and its parameters.

    ``lam`` is the truncation / inflection point (a positive integer, in label
    units) for the truncated and Cauchy kinds. ``alpha`` and ``beta`` are only
    used by the corrupted Gaussian.
    """

    kind: PriorKind
    lam: float | None = None
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", PriorKind(self.kind))
        if self.kind in INFLECTION_KINDS:
            if self.lam is None or self.lam <= 0 or float(self.lam) != int(self.lam):
                raise ValueError(f"{self.kind.value} needs a positive integer lambda, got {self.lam!r}")
            object.__setattr__(self, "lam", int(self.lam))
        elif self.kind is PriorKind.CORRUPTED_GAUSSIAN:
            if self.alpha is None or not 0 < self.alpha < 1:
                raise ValueError(f"corrupted Gaussian alpha must lie in (0, 1), got {self.alpha!r}")
            if self.beta is None or not self.beta > 0:
                raise ValueError(f"corrupted Gaussian beta must be positive, got {self.beta!r}")

    def params(self):
        """Numeric parameters in the order used by the text formats."""
        if self.kind in INFLECTION_KINDS:
            return [self.lam]
        if self.kind is PriorKind.CORRUPTED_GAUSSIAN:
            return [self.alpha, self.beta]
        return []


def _cauchy(z, lam):
    return 0.5 * lam * lam * np.log1p((z / lam) ** 2)


def _cauchy_slope(z, lam):
    return z / (1.0 + (z / lam) ** 2)


def _as_output(value, like):
    if np.ndim(like) == 0:
        return float(value)
    return value


class PriorDecomposition:
    """Evaluators for ``theta``, ``g``, ``h``, the supergradient of ``h`` and ``g''``.

    Build instances with :func:`decompose`. Instances are immutable.
    """

    def __init__(self, spec: PriorSpec):
        self.spec = spec
        kind = spec.kind
        if kind is PriorKind.TRUNCATED_LINEAR:
            self.theta_lam, self.slope_lam = float(spec.lam), 1.0
        elif kind is PriorKind.TRUNCATED_QUADRATIC:
            self.theta_lam, self.slope_lam = float(spec.lam) ** 2, 2.0 * spec.lam
        elif kind is PriorKind.CAUCHY:
            lam = float(spec.lam)
            self.theta_lam, self.slope_lam = _cauchy(lam, lam), _cauchy_slope(lam, lam)
        else:
            self.theta_lam = self.slope_lam = None
        if kind is PriorKind.CORRUPTED_GAUSSIAN:
            self._log_a = math.log(spec.alpha)
            self._log_b = math.log((1.0 - spec.alpha) / spec.beta)
            self._inv_beta2 = 1.0 / (spec.beta * spec.beta)
            self._check_concavity()

    @property
    def kind(self):
        return self.spec.kind

    @property
    def h_is_identity(self):
        return self.kind in CONVEX_KINDS

    def __repr__(self):
        return f"PriorDecomposition({self.spec!r})"

    def __eq__(self, other):
        return isinstance(other, PriorDecomposition) and other.spec == self.spec

    def __hash__(self):
        return hash(self.spec)

    # -- the prior itself ---------------------------------------------------

    def theta(self, z):
        """Prior cost of a label difference ``z >= 0``."""
        za = np.abs(np.asarray(z, dtype=np.float64))
        kind = self.kind
        if kind is PriorKind.TRUNCATED_LINEAR:
            out = np.minimum(za, self.spec.lam)
        elif kind is PriorKind.TRUNCATED_QUADRATIC:
            out = np.minimum(za * za, float(self.spec.lam) ** 2)
        elif kind is PriorKind.CAUCHY:
            out = _cauchy(za, float(self.spec.lam))
        elif kind is PriorKind.CORRUPTED_GAUSSIAN:
            out = self._h_gauss(za * za)
        elif kind is PriorKind.CONVEX_LINEAR:
            out = za
        else:
            out = za * za
        return _as_output(out, z)

    # -- convex part ----------------------------------------------------------

    def g(self, z):
        za = np.abs(np.asarray(z, dtype=np.float64))
        kind = self.kind
        if kind in INFLECTION_KINDS:
            lam = float(self.spec.lam)
            below = np.minimum(za, lam)
            inner = self.theta(below)
            out = np.where(za <= lam, inner, self.slope_lam * (za - lam) + self.theta_lam)
        elif kind in (PriorKind.CORRUPTED_GAUSSIAN, PriorKind.CONVEX_QUADRATIC):
            out = za * za
        else:
            out = za
        return _as_output(out, z)

    def _forward_difference(self, z):
        step = self.g(z + 1.0) - self.g(z)
        if self.kind in INFLECTION_KINDS:
            # exact slope on the linear extension, so g'' vanishes there
            step = np.where(z >= self.spec.lam, self.slope_lam, step)
        return step

    def second_difference(self, z):
        """``g(|z+1|) + g(|z-1|) - 2 g(|z|)`` for integer ``z``; non-negative as ``g`` is convex."""
        za = np.abs(np.asarray(z, dtype=np.float64))
        ahead = self._forward_difference(za)
        behind = np.where(za >= 1.0, self._forward_difference(np.maximum(za - 1.0, 0.0)), -ahead)
        return _as_output(ahead - behind, z)

    # -- concave part -----------------------------------------------------------

    def _h_gauss(self, y):
        return -np.logaddexp(self._log_a - y, self._log_b - y * self._inv_beta2)

    def _check_domain(self, y):
        if np.any(y < -1e-12) or np.any(np.isnan(y)):
            raise ValueError("argument lies outside the range of g (must be >= 0)")

    def _unextend(self, y):
        # inverse of the linear extension of g beyond lam, clamped at lam
        lam = float(self.spec.lam)
        y = np.maximum(y, self.theta_lam)
        return (y + lam * self.slope_lam - self.theta_lam) / self.slope_lam

    def _theta_right_slope(self, u):
        lam = float(self.spec.lam)
        kind = self.kind
        if kind is PriorKind.TRUNCATED_LINEAR:
            return np.where(u < lam, 1.0, 0.0)
        if kind is PriorKind.TRUNCATED_QUADRATIC:
            return np.where(u < lam, 2.0 * u, 0.0)
        return _cauchy_slope(u, lam)

    def h(self, y):
        y_arr = np.asarray(y, dtype=np.float64)
        self._check_domain(y_arr)
        y_arr = np.maximum(y_arr, 0.0)
        kind = self.kind
        if kind in CONVEX_KINDS:
            out = y_arr
        elif kind is PriorKind.CORRUPTED_GAUSSIAN:
            out = self._h_gauss(y_arr)
        else:
            arg = self._unextend(y_arr)
            out = np.where(y_arr <= self.theta_lam, y_arr, self.theta(arg))
        return _as_output(out, y)

    def supergradient(self, y):
        """Supergradient of ``h`` at ``y``; the right derivative at kinks."""
        y_arr = np.asarray(y, dtype=np.float64)
        self._check_domain(y_arr)
        y_arr = np.maximum(y_arr, 0.0)
        kind = self.kind
        if kind in CONVEX_KINDS:
            out = np.ones_like(y_arr)
        elif kind is PriorKind.CORRUPTED_GAUSSIAN:
            # d/dy of -log(a e^-y + b e^(-y/beta^2)), a softmax-weighted slope
            la = self._log_a - y_arr
            lb = self._log_b - y_arr * self._inv_beta2
            pa = 1.0 / (1.0 + np.exp(np.minimum(lb - la, 700.0)))
            out = pa + (1.0 - pa) * self._inv_beta2
        else:
            arg = self._unextend(y_arr)
            out = np.where(y_arr < self.theta_lam, 1.0, self._theta_right_slope(arg) / self.slope_lam)
        return _as_output(out, y)

    # -- tables used by the solvers ---------------------------------------------

    def theta_table(self, num_labels):
        return self.theta(np.arange(num_labels, dtype=np.float64))

    def g_table(self, num_labels):
        return self.g(np.arange(num_labels, dtype=np.float64))

    def second_difference_table(self, num_labels):
        return self.second_difference(np.arange(num_labels, dtype=np.float64))

    def _check_concavity(self, y_max=1e4, samples=4001):
        y = np.concatenate([np.linspace(0.0, 10.0, samples), np.geomspace(10.0, y_max, samples)])
        y = np.unique(y)
        mid = 0.5 * (y[:-1] + y[1:])
        chord = 0.5 * (self._h_gauss(y[:-1]) + self._h_gauss(y[1:]))
        if np.any(self._h_gauss(mid) < chord - 1e-9):
            raise ValueError(
                f"corrupted Gaussian with alpha={self.spec.alpha}, beta={self.spec.beta} "
                "does not give a concave h on the sampled range"
            )


def decompose(spec):
    """Return the :class:`PriorDecomposition` for ``spec``.

    ``spec`` may be a :class:`PriorSpec` or a kind name, in which case keyword
    parameters are not available and only the convex kinds make sense.
    """
    if isinstance(spec, (str, PriorKind)):
        spec = PriorSpec(PriorKind(spec))
    if not isinstance(spec, PriorSpec):
        raise TypeError(f"unsupported prior specification: {spec!r}")
    return PriorDecomposition(spec)


def make_prior(kind, lam=None, alpha=None, beta=None):
    """Shorthand for ``decompose(PriorSpec(kind, lam, alpha, beta))``."""
    return decompose(PriorSpec(PriorKind(kind), lam=lam, alpha=alpha, beta=beta))
