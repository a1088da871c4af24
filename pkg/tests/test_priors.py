import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from irgc.priors import PriorKind, PriorSpec, decompose, make_prior

ALL_PRIORS = [
    ("TRUNCATED_LINEAR", dict(lam=1)),
    ("TRUNCATED_LINEAR", dict(lam=4)),
    ("TRUNCATED_QUADRATIC", dict(lam=2)),
    ("TRUNCATED_QUADRATIC", dict(lam=8)),
    ("CAUCHY", dict(lam=1)),
    ("CAUCHY", dict(lam=8)),
    ("CORRUPTED_GAUSSIAN", dict(alpha=0.75, beta=50)),
    ("CORRUPTED_GAUSSIAN", dict(alpha=0.3, beta=3)),
    ("CONVEX_LINEAR", {}),
    ("CONVEX_QUADRATIC", {}),
]
IDS = [f"{k}-{'-'.join(str(v) for v in p.values())}" for k, p in ALL_PRIORS]


@pytest.fixture(params=ALL_PRIORS, ids=IDS)
def prior(request):
    kind, params = request.param
    return make_prior(kind, **params)


def test_truncated_linear_decomposition():
    dec = make_prior("TRUNCATED_LINEAR", lam=4)
    for z in range(11):
        assert dec.g(z) == z
        assert dec.h(dec.g(z)) == min(z, 4)
    for y in (0.0, 2.5, 4.0, 9.0):
        assert dec.h(y) == min(y, 4.0)


def test_truncated_quadratic_example():
    dec = make_prior("TRUNCATED_QUADRATIC", lam=2)
    assert dec.theta(3) == 4
    assert dec.g(3) == 8  # 2*lam*(3-lam) + lam**2
    assert dec.h(8) == 4
    for z in range(21):
        assert dec.h(dec.g(z)) == pytest.approx(min(z * z, 4), abs=1e-12)


def test_cauchy_example():
    dec = make_prior("CAUCHY", lam=2)
    expected = 2.0 * math.log(2.0)
    assert dec.theta(2) == pytest.approx(expected, abs=1e-12)
    assert dec.theta(2) == pytest.approx(1.38629, abs=1e-5)
    assert dec.g(2) == dec.theta(2)
    assert dec.h(dec.theta(2)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("z, expected", [(3, 9.0), (12, 100.0)])
def test_truncated_quadratic_theta(z, expected):
    assert make_prior("TRUNCATED_QUADRATIC", lam=10).theta(z) == expected


def test_corrupted_gaussian_theta_at_zero():
    dec = make_prior("CORRUPTED_GAUSSIAN", alpha=0.75, beta=50)
    assert dec.theta(0) == pytest.approx(-math.log(0.755), abs=1e-12)
    # direct evaluation of the mixture formula
    for z in (0.0, 0.5, 1.0, 3.0, 7.0):
        ref = -math.log(0.75 * math.exp(-z * z) + 0.25 * math.exp(-z * z / 2500.0) / 50.0)
        assert dec.theta(z) == pytest.approx(ref, abs=1e-12)


@pytest.mark.parametrize("y, expected", [(1.0, 1.0), (7.0, 0.0), (4.0, 0.0)])
def test_truncated_quadratic_supergradient(y, expected):
    assert make_prior("TRUNCATED_QUADRATIC", lam=2).supergradient(y) == expected


def test_supergradient_rejects_negative_argument():
    with pytest.raises(ValueError):
        make_prior("TRUNCATED_QUADRATIC", lam=2).supergradient(-1.0)


def test_corrupted_gaussian_supergradient_at_zero_is_the_limit():
    dec = make_prior("CORRUPTED_GAUSSIAN", alpha=0.75, beta=50)
    a, b = 0.75, 0.25 / 50
    limit = (a + b / 2500.0) / (a + b)
    assert dec.supergradient(0.0) == pytest.approx(limit, rel=1e-12)
    # one-sided finite difference agrees
    step = 1e-7
    fd = (dec.h(step) - dec.h(0.0)) / step
    assert dec.supergradient(0.0) == pytest.approx(fd, rel=1e-5)


def test_second_difference_examples():
    cg = make_prior("CORRUPTED_GAUSSIAN", alpha=0.75, beta=50)
    assert all(cg.second_difference(z) == 2.0 for z in range(10))
    tl = make_prior("TRUNCATED_LINEAR", lam=3)
    assert tl.second_difference(0) == 2.0
    assert all(tl.second_difference(z) == 0.0 for z in range(1, 10))
    tq = make_prior("TRUNCATED_QUADRATIC", lam=3)
    assert [tq.second_difference(z) for z in range(1, 7)] == [2.0, 2.0, 1.0, 0.0, 0.0, 0.0]


def test_invalid_specs():
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.TRUNCATED_LINEAR, lam=0)
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.CAUCHY, lam=2.5)
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.CORRUPTED_GAUSSIAN, alpha=1.0, beta=2.0)
    with pytest.raises(ValueError):
        PriorSpec("HUBER", lam=1)
    with pytest.raises(TypeError):
        decompose(3)


def test_vectorized_matches_scalar(prior):
    z = np.arange(40)
    assert np.array_equal(prior.theta(z), [prior.theta(int(v)) for v in z])
    assert np.array_equal(prior.g(z), [prior.g(int(v)) for v in z])


def test_identity_and_convexity(prior):
    z = np.arange(257)
    assert np.max(np.abs(prior.h(prior.g(z)) - prior.theta(z))) <= 1e-9
    assert np.min(prior.second_difference(z)) >= -1e-12
    if prior.kind.value in ("TRUNCATED_LINEAR", "TRUNCATED_QUADRATIC", "CAUCHY"):
        lam = prior.spec.lam
        assert np.all(prior.second_difference(z[z >= lam + 1]) == 0.0)


def test_supergradient_inequality_on_grid(prior):
    ys = prior.g(np.linspace(0, 40, 100))
    h = prior.h(ys)
    s = prior.supergradient(ys)
    assert np.all(s >= 0)
    assert np.all(np.diff(s) <= 1e-12)  # non-increasing: h concave
    # h(d) <= h(c) + (d - c) h'(c) for every pair (c, d)
    bound = h[:, None] + (ys[None, :] - ys[:, None]) * s[:, None]
    assert np.all(h[None, :] <= bound + 1e-9)


@settings(max_examples=100, deadline=None)
@given(
    st.integers(0, len(ALL_PRIORS) - 1),
    st.floats(0, 500, allow_nan=False),
    st.floats(0, 500, allow_nan=False),
)
def test_midpoint_concavity(idx, y1, y2):
    kind, params = ALL_PRIORS[idx]
    dec = make_prior(kind, **params)
    mid = dec.h(0.5 * (y1 + y2))
    assert mid >= 0.5 * (dec.h(y1) + dec.h(y2)) - 1e-9
