import numpy as np
import pytest

from irgc.mrf_model import MRFModel, build_grid, energy, grid_edges, surrogate_energy
from irgc.priors import make_prior
from irgc.synthetic import random_grid_model, two_node_example


def test_two_node_energies():
    model = two_node_example()
    assert energy(model, [0, 0]) == 5.0
    assert energy(model, [0, 1]) == 1.0
    assert surrogate_energy(model, [0, 1], [0.5]) == 0.5


def test_no_edges_is_unary_sum():
    unary = np.arange(12.0).reshape(4, 3)
    model = MRFModel(unary, np.zeros((0, 2)), [], make_prior("CAUCHY", lam=2))
    x = np.array([2, 0, 1, 2])
    assert energy(model, x) == unary[np.arange(4), x].sum()


def test_zero_weights_leave_unaries():
    model = random_grid_model(seed=4, prior="CAUCHY")
    x = np.random.default_rng(0).integers(0, model.label_count, model.node_count)
    assert surrogate_energy(model, x, np.zeros(model.edge_count)) == model.unary_sum(x)


@pytest.mark.parametrize("kind", ["CONVEX_LINEAR", "CONVEX_QUADRATIC"])
def test_unit_weights_reproduce_energy_for_convex_priors(kind):
    model = random_grid_model(seed=1, prior=kind, width=3, height=3)
    rng = np.random.default_rng(1)
    for _ in range(20):
        x = rng.integers(0, model.label_count, model.node_count)
        assert surrogate_energy(model, x, np.ones(model.edge_count)) == energy(model, x)


def test_energy_matches_direct_sum():
    model = random_grid_model(seed=9, prior="TRUNCATED_QUADRATIC", width=3, height=3)
    x = np.random.default_rng(2).integers(0, model.label_count, model.node_count)
    direct = sum(model.unary[p, x[p]] for p in range(model.node_count))
    for (p, q), gam in zip(model.edges, model.gamma):
        direct += gam * min((x[p] - x[q]) ** 2, 1)
    assert energy(model, x) == direct


def test_energy_invariant_to_edge_order():
    model = random_grid_model(seed=5, prior="CAUCHY", width=3, height=3)
    perm = np.random.default_rng(0).permutation(model.edge_count)
    shuffled = MRFModel(model.unary, model.edges[perm], model.gamma[perm], model.prior)
    x = np.random.default_rng(3).integers(0, model.label_count, model.node_count)
    assert energy(shuffled, x) == pytest.approx(energy(model, x), abs=1e-9)


@pytest.mark.parametrize("w, h, conn, count", [(2, 2, 4, 4), (2, 2, 8, 6), (3, 1, 4, 2), (1, 3, 8, 2), (4, 3, 8, 29)])
def test_grid_edge_counts(w, h, conn, count):
    assert len(grid_edges(w, h, conn)) == count


def test_grid_edge_order_and_uniqueness():
    edges = grid_edges(3, 2, 8)
    # pixel 0: right, down, down-right; pixel 1: right, down, down-right, down-left
    assert edges[:7].tolist() == [[0, 1], [0, 3], [0, 4], [1, 2], [1, 4], [1, 5], [1, 3]]
    pairs = {tuple(sorted(e)) for e in edges.tolist()}
    assert len(pairs) == len(edges)


def test_grid_errors():
    with pytest.raises(ValueError):
        grid_edges(2, 2, 6)
    with pytest.raises(ValueError):
        build_grid(2, 2, 4, np.zeros((3, 2)), 1.0, make_prior("CONVEX_LINEAR"))


def test_model_validation():
    prior = make_prior("CONVEX_LINEAR")
    with pytest.raises(ValueError):
        MRFModel(np.zeros((2, 1)), [[0, 1]], [1.0], prior)
    with pytest.raises(ValueError):
        MRFModel(np.zeros((2, 2)), [[0, 0]], [1.0], prior)
    with pytest.raises(ValueError):
        MRFModel(np.zeros((2, 2)), [[0, 2]], [1.0], prior)
    with pytest.raises(ValueError):
        MRFModel(np.zeros((2, 2)), [[0, 1]], [-1.0], prior)
    model = MRFModel(np.zeros((2, 2)), [[0, 1]], [1.0], prior)
    with pytest.raises(ValueError):
        energy(model, [0, 2])
    with pytest.raises(ValueError):
        energy(model, [0])
    with pytest.raises(ValueError):
        surrogate_energy(model, [0, 1], [1.0, 1.0])
