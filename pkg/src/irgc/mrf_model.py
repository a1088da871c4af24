"""Pairwise MRF energies on an ordered label set.

    E(x) = sum_p f_p(x_p) + sum_(p,q) gamma_pq * theta(|x_p - x_q|)

The surrogate used inside the reweighting loop replaces ``theta`` by the
convex part ``g`` of the prior and scales each edge by an iteration weight.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from irgc.priors import PriorDecomposition
from irgc.validation import check_edges, check_labeling, check_nonnegative, check_unary, check_weights


@dataclass(frozen=True, eq=False)
class MRFModel:
    """Unary table, edge list with constant weights, and one shared prior.

    Parameters
    ----------
    unary : array-like, shape (n, L)
        Data costs ``f_p(l)``. Use 0 for "don't care".
    edges : array-like, shape (m, 2)
        Node pairs ``(p, q)``; ``p != q``.
    gamma : array-like, shape (m,) or scalar
        Non-negative constant weight of each edge.
    prior : PriorDecomposition
        Pairwise prior shared by all edges.
    """

    unary: np.ndarray
    edges: np.ndarray
    gamma: np.ndarray
    prior: PriorDecomposition
    _theta: np.ndarray = field(init=False, repr=False)
    _g: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        unary = check_unary(self.unary)
        edges = check_edges(self.edges, unary.shape[0])
        gamma = check_nonnegative(self.gamma, edges.shape[0], "gamma")
        if not isinstance(self.prior, PriorDecomposition):
            raise TypeError("prior must be a PriorDecomposition")
        for name, value in (("unary", unary), ("edges", edges), ("gamma", gamma)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        L = unary.shape[1]
        object.__setattr__(self, "_theta", self.prior.theta_table(L))
        object.__setattr__(self, "_g", self.prior.g_table(L))

    @property
    def node_count(self):
        return self.unary.shape[0]

    @property
    def label_count(self):
        return self.unary.shape[1]

    @property
    def edge_count(self):
        return self.edges.shape[0]

    def theta_table(self):
        """``theta(d)`` for every label difference ``d`` in ``0..L-1``."""
        return self._theta

    def g_table(self):
        return self._g

    def unary_sum(self, x):
        return float(self.unary[np.arange(self.node_count), x].sum())

    def label_differences(self, x):
        return np.abs(x[self.edges[:, 0]] - x[self.edges[:, 1]])


def energy(model, x):
    """True energy of labeling ``x``."""
    x = check_labeling(model, x)
    pairwise = model.gamma * model.theta_table()[model.label_differences(x)]
    return model.unary_sum(x) + float(pairwise.sum())


def surrogate_energy(model, x, w):
    """Weighted surrogate ``sum f_p(x_p) + sum w_pq * gamma_pq * g(|x_p - x_q|)``."""
    x = check_labeling(model, x)
    w = check_weights(model, w)
    pairwise = w * model.gamma * model.g_table()[model.label_differences(x)]
    return model.unary_sum(x) + float(pairwise.sum())


def grid_edges(width, height, connectivity=4):
    """Edges of a ``height x width`` pixel grid in row-major order.

    Each pixel contributes its right and down neighbours, plus down-right and
    down-left for 8-connectivity, in that order. Pixel ``(r, c)`` has id
    ``r * width + c``.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity!r}")
    if width <= 0 or height <= 0:
        raise ValueError("grid dimensions must be positive")
    offsets = [(0, 1), (1, 0)]
    if connectivity == 8:
        offsets += [(1, 1), (1, -1)]
    rows, cols = np.divmod(np.arange(width * height), width)
    per_direction = []
    for dr, dc in offsets:
        r2, c2 = rows + dr, cols + dc
        ok = (r2 < height) & (c2 >= 0) & (c2 < width)
        per_direction.append(np.where(ok, r2 * width + c2, -1))
    # interleave so edges are grouped by pixel, then by direction
    nbr = np.stack(per_direction, axis=1)
    src = np.repeat(np.arange(width * height), len(offsets))
    dst = nbr.ravel()
    keep = dst >= 0
    return np.stack([src[keep], dst[keep]], axis=1)


def build_grid(width, height, connectivity, unary, gamma, prior):
    """Grid-structured :class:`MRFModel`.

    ``gamma`` may be a scalar, one value per edge, or a callable
    ``gamma(edges) -> array`` evaluated on the grid edge list.
    """
    unary = check_unary(unary)
    if unary.shape[0] != width * height:
        raise ValueError(f"unary table has {unary.shape[0]} rows, grid has {width * height} pixels")
    edges = grid_edges(width, height, connectivity)
    if callable(gamma):
        gamma = gamma(edges)
    return MRFModel(unary, edges, gamma, prior)
