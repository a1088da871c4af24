"""Exact minimization of a convex-prior surrogate by a single graph cut.

Each MRF node ``p`` becomes a chain ``p_0 .. p_{L-2}`` between the source and
the sink. Cutting the chain arc ``p_{i-1} -> p_i`` assigns label ``i``; the
infinite reverse arcs make sure every chain is cut exactly once. Pairwise
terms ``c * g(|x_p - x_q|)`` become arcs between chains weighted by the
second differences of ``g``, so only differences where ``g''`` is non-zero
cost memory.
"""

from __future__ import annotations

import math

import numpy as np

from irgc.maxflow import FlowNetwork
from irgc.mrf_model import surrogate_energy
from irgc.validation import check_weights

SOURCE = 0
SINK = 1
VALUE_TOLERANCE = 1e-6


class DecodingError(RuntimeError):
    """A node chain was not cut exactly once."""


def _pairwise_capacity_table(model):
    d2 = model.prior.second_difference_table(model.label_count)[: model.label_count - 1]
    if np.any(d2 < -1e-12):
        raise ValueError("prior has a negative second difference; g is not convex")
    return np.maximum(d2, 0.0)


class MultiLabelGraph:
    """Flow network for one surrogate problem plus the layout needed to decode it."""

    def __init__(self, model, weights):
        weights = check_weights(model, weights)
        self.model = model
        self.weights = weights
        n, L = model.node_count, model.label_count
        self.chain_length = L - 1

        net = FlowNetwork(2, source=SOURCE, sink=SINK)
        first = net.add_nodes(n * (L - 1))
        chain = first + np.arange(n * (L - 1), dtype=np.int64).reshape(n, L - 1)
        self.chain = chain

        # unary costs may be negative; shifting per node keeps capacities >= 0
        shift = model.unary.min(axis=1)
        caps = model.unary - shift[:, None]
        tails = np.empty((n, L), dtype=np.int64)
        heads = np.empty((n, L), dtype=np.int64)
        tails[:, 0] = SOURCE
        tails[:, 1:] = chain
        heads[:, :-1] = chain
        heads[:, -1] = SINK
        net.add_arcs(tails, heads, caps.ravel(), math.inf)

        coupling = weights * model.gamma
        active = np.nonzero(coupling > 0)[0]
        d2 = _pairwise_capacity_table(model)
        if active.size:
            p = model.edges[active, 0]
            q = model.edges[active, 1]
            c = coupling[active]
            if d2[0] > 0:
                half = (0.5 * d2[0] * c)[:, None]
                cap = np.broadcast_to(half, (active.size, L - 1))
                net.add_arcs(chain[p], chain[q], cap.ravel(), cap.ravel())
            for d in range(1, L - 1):
                if d2[d] <= 0:
                    continue
                cap = np.broadcast_to((d2[d] * c)[:, None], (active.size, L - 1 - d)).ravel()
                net.add_arcs(chain[p, d:], chain[q, :-d], cap)
                net.add_arcs(chain[q, d:], chain[p, :-d], cap)

        self.network = net
        self.offset = float(shift.sum() + (coupling * model.g_table()[0]).sum())

    @property
    def arc_count(self):
        """Number of non-zero directed arcs, constraint arcs included."""
        n, L = self.model.node_count, self.model.label_count
        _, _, caps, revs = self.network.arcs()
        # the first n*L pairs are the chain arcs with their constraint arcs
        inter = np.count_nonzero(caps[n * L:] > 0) + np.count_nonzero(revs[n * L:] > 0)
        return int(2 * n * L + inter)

    def solve(self):
        """Run max-flow and decode; returns ``(labels, surrogate value)``."""
        flow = self.network.max_flow()
        on_source = self.network.source_set()[self.chain]
        x = on_source.sum(axis=1)
        # chain p must read SOURCE..SOURCE SINK..SINK
        prefix = np.arange(self.chain_length)[None, :] < x[:, None]
        bad = np.nonzero(np.any(on_source != prefix, axis=1))[0]
        if bad.size:
            raise DecodingError(f"chain of node {int(bad[0])} is cut more than once")
        x = x.astype(np.int64)
        value = flow + self.offset
        expected = surrogate_energy(self.model, x, self.weights)
        if abs(value - expected) > VALUE_TOLERANCE * max(1.0, abs(expected)):
            raise RuntimeError(f"cut value {value!r} disagrees with surrogate energy {expected!r}")
        return x, expected


def build(model, weights):
    """Build the multi-label graph of the surrogate with iteration weights ``weights``."""
    return MultiLabelGraph(model, weights)


def solve(graph):
    return graph.solve()


def minimize_surrogate(model, weights):
    """Global minimizer of the weighted surrogate energy and its value."""
    return MultiLabelGraph(model, weights).solve()


def estimate_memory(model, prior=None):
    """Number of non-zero arcs :func:`build` creates when every edge weight is positive.

    Counts ``L`` horizontal arcs and ``L`` constraint arcs per node, plus the
    inter-chain arcs for each edge with ``gamma > 0``.
    """
    prior = prior if prior is not None else model.prior
    n, L = model.node_count, model.label_count
    d2 = prior.second_difference_table(L)[: L - 1]
    per_edge = 0
    if d2[0] > 0:
        per_edge += 2 * (L - 1)
    for d in range(1, L - 1):
        if d2[d] > 0:
            per_edge += 2 * (L - 1 - d)
    edges = int(np.count_nonzero(model.gamma > 0))
    return 2 * n * L + edges * per_edge
