import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgc.maxflow import FlowNetwork, NotSolvedError, Side


def brute_force_min_cut(n, arcs, s, t):
    """Minimum over all s/t-respecting partitions of the crossing capacity."""
    others = [v for v in range(n) if v not in (s, t)]
    best = math.inf
    for bits in itertools.product((False, True), repeat=len(others)):
        side = {s: True, t: False}
        side.update(zip(others, bits))
        total = 0.0
        for u, v, c, r in arcs:
            if side[u] and not side[v]:
                total += c
            elif side[v] and not side[u]:
                total += r
        best = min(best, total)
    return best


def random_graph(rng, n_max=8, cap_max=10):
    n = int(rng.integers(2, n_max + 1))
    m = int(rng.integers(0, 3 * n))
    arcs = []
    for _ in range(m):
        u, v = rng.choice(n, size=2, replace=False)
        arcs.append((int(u), int(v), int(rng.integers(0, cap_max + 1)), int(rng.integers(0, cap_max + 1))))
    s, t = (int(a) for a in rng.choice(n, size=2, replace=False))
    return n, arcs, s, t


def make_network(n, arcs, s, t):
    net = FlowNetwork(n, source=s, sink=t)
    for u, v, c, r in arcs:
        net.add_arc(u, v, c, r)
    return net


def test_add_nodes_ids_are_contiguous():
    net = FlowNetwork()
    assert net.add_nodes(3) == 0
    assert net.node_count == 3
    net = FlowNetwork(5)
    assert net.add_nodes(2) == 5
    net = FlowNetwork()
    assert net.add_nodes(1) == 0
    assert net.add_nodes(1) == 1


@pytest.mark.parametrize(
    "arcs, expected",
    [
        ([(0, 1, 3.0, 0.0)], 3.0),
        ([(0, 1, 2.0, 0.0), (0, 1, 2.0, 0.0)], 4.0),
        ([(0, 1, 0.0, 0.0)], 0.0),
    ],
)
def test_single_arc_flows(arcs, expected):
    assert make_network(2, arcs, 0, 1).max_flow() == expected


def test_diamond():
    s, a, b, t = range(4)
    arcs = [(s, a, 2, 0), (s, b, 2, 0), (a, t, 1, 0), (b, t, 3, 0)]
    assert brute_force_min_cut(4, arcs, s, t) == 3
    assert make_network(4, arcs, s, t).max_flow() == 3.0


def test_disconnected_sink():
    net = make_network(3, [(0, 1, 4.0, 0.0)], 0, 2)
    assert net.max_flow() == 0.0


@pytest.mark.parametrize("caps, side_a", [((5, 2), Side.SOURCE), ((2, 5), Side.SINK)])
def test_chain_cut_side(caps, side_a):
    net = make_network(3, [(0, 1, caps[0], 0), (1, 2, caps[1], 0)], 0, 2)
    assert net.max_flow() == 2.0
    assert net.min_cut_side(1) == side_a
    assert net.min_cut_side(0) == Side.SOURCE
    assert net.min_cut_side(2) == Side.SINK


def test_errors():
    net = FlowNetwork(2)
    with pytest.raises(ValueError):
        net.add_arc(0, 2, 1.0)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, -1.0)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, 1.0, -0.5)
    with pytest.raises(ValueError):
        net.add_arc(1, 1, 1.0)
    with pytest.raises(ValueError):
        net.max_flow()  # terminals unset
    net.source, net.sink = 0, 1
    with pytest.raises(NotSolvedError):
        net.min_cut_side(0)


def test_infinite_arcs_never_cut():
    net = FlowNetwork(3, source=0, sink=2)
    net.add_arc(0, 1, math.inf)
    net.add_arc(1, 2, 7.0)
    assert net.max_flow() == 7.0
    assert net.min_cut_side(1) == Side.SOURCE


def test_vectorized_arcs_match_scalar():
    rng = np.random.default_rng(3)
    n, arcs, s, t = random_graph(rng)
    a = make_network(n, arcs, s, t)
    b = FlowNetwork(n, source=s, sink=t)
    if arcs:
        cols = list(zip(*arcs))
        b.add_arcs(cols[0], cols[1], cols[2], cols[3])
    assert a.max_flow() == b.max_flow()
    assert np.array_equal(a.source_set(), b.source_set())


def test_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(0)
    for _ in range(200):
        n, arcs, s, t = random_graph(rng)
        net = make_network(n, arcs, s, t)
        assert net.max_flow() == brute_force_min_cut(n, arcs, s, t)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_flow_conservation_and_cut_value(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    m = int(rng.integers(0, 25))
    net = FlowNetwork(n, source=0, sink=n - 1)
    for _ in range(m):
        u, v = rng.choice(n, size=2, replace=False)
        net.add_arc(u, v, rng.uniform(0, 10), rng.uniform(0, 10) * rng.integers(0, 2))
    value = net.max_flow()

    tails, heads, caps, revs = net.arcs()
    flows = net.arc_flows()
    assert np.all(flows <= caps + 1e-9)
    assert np.all(-flows <= revs + 1e-9)
    balance = np.zeros(n)
    np.add.at(balance, tails, -flows)
    np.add.at(balance, heads, flows)
    assert np.allclose(balance[1:-1], 0.0, atol=1e-9)
    assert balance[-1] == pytest.approx(value, abs=1e-9)
    assert net.cut_capacity() == pytest.approx(value, abs=1e-9)


def test_identical_construction_gives_identical_cut():
    rng = np.random.default_rng(11)
    n, arcs, s, t = random_graph(rng)
    sides = []
    for _ in range(3):
        net = make_network(n, arcs, s, t)
        net.max_flow()
        sides.append(net.source_set())
    assert all(np.array_equal(sides[0], other) for other in sides[1:])
