"""Exact s-t max-flow / min-cut on a directed graph with real capacities.

Arcs are stored as pairs (u->v with ``cap``, v->u with ``rev_cap``) and the
flow itself is computed by a Dinic-style blocking-flow kernel compiled with
numba. After solving, the canonical minimum cut is the set of nodes reachable
from the source in the residual graph.
"""

from __future__ import annotations

import enum
import math

import numpy as np

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


EPS = 1e-9
INF = math.inf


class Side(enum.IntEnum):
    SOURCE = 0
    SINK = 1


class NotSolvedError(RuntimeError):
    """Raised when cut information is requested before :meth:`FlowNetwork.max_flow`."""


@njit(cache=True)
def _dinic(n, s, t, offsets, adj, head, res, eps):
    flow = 0.0
    level = np.empty(n, np.int64)
    it = np.empty(n, np.int64)
    queue = np.empty(n, np.int64)
    path = np.empty(n, np.int64)
    while True:
        level[:] = -1
        level[s] = 0
        qh = 0
        qt = 1
        queue[0] = s
        while qh < qt:
            v = queue[qh]
            qh += 1
            for k in range(offsets[v], offsets[v + 1]):
                e = adj[k]
                w = head[e]
                if level[w] < 0 and res[e] > eps:
                    level[w] = level[v] + 1
                    queue[qt] = w
                    qt += 1
        if level[t] < 0:
            break
        for v in range(n):
            it[v] = offsets[v]
        while True:
            depth = 0
            v = s
            found = False
            while True:
                if v == t:
                    found = True
                    break
                advanced = False
                while it[v] < offsets[v + 1]:
                    e = adj[it[v]]
                    w = head[e]
                    if res[e] > eps and level[w] == level[v] + 1:
                        path[depth] = e
                        depth += 1
                        v = w
                        advanced = True
                        break
                    it[v] += 1
                if not advanced:
                    if v == s:
                        break
                    # dead end: drop v from the level graph and retreat
                    level[v] = -1
                    depth -= 1
                    v = head[path[depth] ^ 1]
                    it[v] += 1
            if not found:
                break
            bottleneck = np.inf
            for i in range(depth):
                r = res[path[i]]
                if r < bottleneck:
                    bottleneck = r
            for i in range(depth):
                e = path[i]
                res[e] -= bottleneck
                res[e ^ 1] += bottleneck
            flow += bottleneck
    return flow


@njit(cache=True)
def _reachable(n, s, offsets, adj, head, res, eps):
    seen = np.zeros(n, np.bool_)
    queue = np.empty(n, np.int64)
    seen[s] = True
    queue[0] = s
    qh = 0
    qt = 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for k in range(offsets[v], offsets[v + 1]):
            e = adj[k]
            w = head[e]
            if not seen[w] and res[e] > eps:
                seen[w] = True
                queue[qt] = w
                qt += 1
    return seen


class FlowNetwork:
    """Directed capacitated graph with a distinguished source and sink.

    Parameters
    ----------
    node_count : int
        Number of nodes to allocate up front.
    source, sink : int, optional
        Terminal node ids. May also be assigned later as attributes.

    Capacities may be ``math.inf``; infinite arcs are given the capacity
    ``1 + sum of all finite capacities`` when the network is solved, so they
    can never appear in a minimum cut.
    """

    def __init__(self, node_count=0, source=None, sink=None):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        self.node_count = int(node_count)
        self.source = source
        self.sink = sink
        self._chunks = []
        self._pending = []
        self._arc_count = 0
        self._solution = None

    # -- construction -----------------------------------------------------

    def add_nodes(self, count):
        """Allocate ``count`` new nodes and return the id of the first one."""
        if count <= 0:
            raise ValueError("count must be positive")
        first = self.node_count
        self.node_count += int(count)
        self._solution = None
        return first

    def add_arc(self, u, v, cap, rev_cap=0.0):
        """Add the arc pair u->v (``cap``) and v->u (``rev_cap``)."""
        u = int(u)
        v = int(v)
        if not (0 <= u < self.node_count and 0 <= v < self.node_count):
            raise ValueError(f"invalid node id in arc ({u}, {v})")
        if u == v:
            raise ValueError(f"self-loop arc at node {u}")
        cap = float(cap)
        rev_cap = float(rev_cap)
        if not (cap >= 0 and rev_cap >= 0):
            raise ValueError(f"negative capacity on arc ({u}, {v})")
        self._pending.append((u, v, cap, rev_cap))
        self._arc_count += 1
        self._solution = None

    def add_arcs(self, u, v, cap, rev_cap=0.0):
        """Vectorized :meth:`add_arc`; scalar capacities are broadcast."""
        u = np.asarray(u, dtype=np.int64).ravel()
        v = np.asarray(v, dtype=np.int64).ravel()
        if u.shape != v.shape:
            raise ValueError("endpoint arrays differ in length")
        if u.size == 0:
            return
        cap = np.broadcast_to(np.asarray(cap, dtype=np.float64), u.shape)
        rev_cap = np.broadcast_to(np.asarray(rev_cap, dtype=np.float64), u.shape)
        if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= self.node_count:
            raise ValueError("invalid node id in arcs")
        if np.any(u == v):
            raise ValueError("self-loop arc")
        if not (np.all(cap >= 0) and np.all(rev_cap >= 0)):
            raise ValueError("negative capacity in arcs")
        self._flush_pending()
        self._chunks.append((u, v, cap.copy(), rev_cap.copy()))
        self._arc_count += u.size
        self._solution = None

    def _flush_pending(self):
        if self._pending:
            u, v, c, r = zip(*self._pending)
            self._chunks.append(
                (
                    np.array(u, dtype=np.int64),
                    np.array(v, dtype=np.int64),
                    np.array(c, dtype=np.float64),
                    np.array(r, dtype=np.float64),
                )
            )
            self._pending = []

    @property
    def arc_count(self):
        """Number of arc pairs added so far."""
        return self._arc_count

    def arcs(self):
        """Return ``(tails, heads, caps, rev_caps)`` arrays in insertion order."""
        self._flush_pending()
        if not self._chunks:
            empty_i = np.zeros(0, dtype=np.int64)
            empty_f = np.zeros(0, dtype=np.float64)
            return empty_i, empty_i, empty_f, empty_f
        if len(self._chunks) > 1:
            merged = tuple(np.concatenate(parts) for parts in zip(*self._chunks))
            self._chunks = [merged]
        return self._chunks[0]

    # -- solving ----------------------------------------------------------

    def _check_terminals(self):
        s, t = self.source, self.sink
        if s is None or t is None:
            raise ValueError("source and sink must be set before solving")
        if not (0 <= s < self.node_count and 0 <= t < self.node_count):
            raise ValueError("terminal id out of range")
        if s == t:
            raise ValueError("source and sink must differ")
        return int(s), int(t)

    def max_flow(self):
        """Compute and return the maximum s-t flow value."""
        s, t = self._check_terminals()
        tails, heads, caps, revs = self.arcs()
        m = tails.size
        n = self.node_count

        finite = np.isfinite(caps)
        finite_rev = np.isfinite(revs)
        big = 1.0 + caps[finite].sum() + revs[finite_rev].sum()
        caps = np.where(finite, caps, big)
        revs = np.where(finite_rev, revs, big)

        # residual edge 2k is tail->head, 2k+1 its reverse
        head = np.empty(2 * m, dtype=np.int64)
        head[0::2] = heads
        head[1::2] = tails
        res = np.empty(2 * m, dtype=np.float64)
        res[0::2] = caps
        res[1::2] = revs
        origin = np.empty(2 * m, dtype=np.int64)
        origin[0::2] = tails
        origin[1::2] = heads
        adj = np.argsort(origin, kind="stable")
        offsets = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(origin, minlength=n), out=offsets[1:])

        value = _dinic(n, s, t, offsets, adj, head, res, EPS)
        source_side = _reachable(n, s, offsets, adj, head, res, EPS)
        self._solution = (value, source_side, caps - res[0::2])
        return value

    def _solved(self):
        if self._solution is None:
            raise NotSolvedError("max_flow() has not been computed for this network")
        return self._solution

    def min_cut_side(self, v):
        """Side of node ``v`` in the canonical minimum cut."""
        source_side = self._solved()[1]
        if not 0 <= v < self.node_count:
            raise ValueError(f"invalid node id {v}")
        return Side.SOURCE if source_side[v] else Side.SINK

    def source_set(self):
        """Boolean mask of nodes on the source side of the canonical cut."""
        return self._solved()[1].copy()

    def arc_flows(self):
        """Net flow on each arc pair along its forward direction (may be negative)."""
        return self._solved()[2].copy()

    def cut_capacity(self, source_side=None):
        """Total capacity of arcs leaving ``source_side`` (default: the canonical cut)."""
        if source_side is None:
            source_side = self._solved()[1]
        source_side = np.asarray(source_side, dtype=bool)
        tails, heads, caps, revs = self.arcs()
        fwd = source_side[tails] & ~source_side[heads]
        bwd = source_side[heads] & ~source_side[tails]
        return float(caps[fwd].sum() + revs[bwd].sum())
