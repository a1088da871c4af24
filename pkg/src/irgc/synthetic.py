"""Seeded random MRF instances for tests, benchmarks and the CLI."""

from __future__ import annotations

import numpy as np

from irgc.mrf_model import MRFModel, build_grid
from irgc.priors import make_prior

# one representative parameter set per prior kind
DEFAULT_PRIORS = {
    "TRUNCATED_LINEAR": dict(lam=2),
    "TRUNCATED_QUADRATIC": dict(lam=1),
    "CAUCHY": dict(lam=2),
    "CORRUPTED_GAUSSIAN": dict(alpha=0.75, beta=50),
    "CONVEX_LINEAR": {},
    "CONVEX_QUADRATIC": {},
}


def random_grid_model(seed=0, width=3, height=2, num_labels=4, prior=None, unary_max=10,
                      gamma=None, connectivity=4):
    """Grid model with integer unaries in ``[0, unary_max]``.

    ``gamma`` defaults to random integers in ``[0, 4]`` per edge. ``prior`` is a
    :class:`~irgc.priors.PriorDecomposition` or a kind name (default parameters
    from :data:`DEFAULT_PRIORS`).
    """
    rng = np.random.default_rng(seed)
    if prior is None:
        prior = "TRUNCATED_LINEAR"
    if isinstance(prior, str):
        prior = make_prior(prior, **DEFAULT_PRIORS[prior])
    unary = rng.integers(0, unary_max + 1, size=(width * height, num_labels)).astype(float)
    if gamma is None:
        gamma = lambda edges: rng.integers(0, 5, size=len(edges)).astype(float)  # noqa: E731
    return build_grid(width, height, connectivity, unary, gamma, prior)


def random_model(seed=0, max_nodes=20, max_labels=8, prior=None, unary_max=10):
    """Random grid with a random shape of at most ``max_nodes`` nodes."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, max_nodes + 1))
    width = int(rng.integers(1, n + 1))
    height = max(1, n // width)
    num_labels = int(rng.integers(2, max_labels + 1))
    return random_grid_model(
        seed=int(rng.integers(2**31)), width=width, height=height, num_labels=num_labels,
        prior=prior, unary_max=unary_max,
    )


def two_node_example():
    """Two nodes, two labels, unaries ((0, 5), (5, 0)), truncated linear with lam=1."""
    prior = make_prior("TRUNCATED_LINEAR", lam=1)
    return MRFModel(np.array([[0.0, 5.0], [5.0, 0.0]]), np.array([[0, 1]]), np.array([1.0]), prior)
