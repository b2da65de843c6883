import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from morsebubble.grid import build_annulus
from morsebubble.harmonic_tools import fourier_split
from morsebubble.series import (
    HypothesisViolation,
    WeightedSeriesInstance,
    c_mu_gamma,
    case_bounds,
    discrete_convolution_bound,
    dyadic_window,
    exhaustive_suite,
    harmonic_series_weights,
    randomized_suite,
    series_bound_check,
)


def test_case_constant_dominates():
    for g, m in ((0.1, 0.2), (0.5, 0.75), (0.6, 0.99)):
        assert c_mu_gamma(g, m) >= max(case_bounds(g, m))
    with pytest.raises(ValueError):
        c_mu_gamma(0.8, 0.5)


def test_trivial_equality():
    a = np.array([1.0, 2.0, 0.5, 3.0])
    inst = WeightedSeriesInstance(a, a.copy(), 0.3, 0.6, 0.0, 0, 3)
    lhs, rhs, _ = series_bound_check(inst, 1)
    assert lhs == pytest.approx(rhs)


def test_geometric_sequence_strict_slack():
    g, m = 0.4, 0.7
    a = g ** np.arange(12)
    eps0 = 0.5
    n = np.arange(12)
    b = np.maximum(0, a - eps0 * (g ** np.abs(n[:, None] - n[None, :])) @ a)
    inst = WeightedSeriesInstance(a, b, g, m, eps0, 2, 9)
    for k in range(2, 10):
        lhs, rhs, _ = series_bound_check(inst, k)
        assert lhs < rhs


def test_hypothesis_violation_rejected():
    with pytest.raises(HypothesisViolation):
        WeightedSeriesInstance(np.array([1.0, 1.0]), np.zeros(2), 0.3, 0.6, 0.01, 0, 1)
    inst = WeightedSeriesInstance(np.ones(3), np.ones(3), 0.3, 0.6, 0.0, 0, 1)
    with pytest.raises(ValueError):
        series_bound_check(inst, 2)


@pytest.mark.parametrize("n,k", [(5, 5), (0, 6), (12, 4)])
def test_convolution_cases(n, k):
    val, bound = discrete_convolution_bound(0.5, 0.75, 2, 10, n, k)
    assert val <= bound


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.0, 1.0), st.integers(0, 10), st.integers(0, 10),
       st.integers(-5, 15), st.integers(0, 10))
def test_convolution_bound_property(g, t, s1, w, n, k):
    m = g + t * (1 - g) * 0.999
    assume(g < m < 1)
    s2 = s1 + w
    assume(s1 <= k <= s2)
    val, bound = discrete_convolution_bound(g, m, s1, s2, n, k)
    assert val <= bound * (1 + 1e-12)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 2.0))
def test_increasing_b_keeps_inequality(seed, bump):
    rng = np.random.default_rng(seed)
    N = 10
    a = rng.exponential(size=N)
    b = a.copy()
    inst = WeightedSeriesInstance(a, b, 0.4, 0.7, 0.2, 1, 8)
    inst2 = WeightedSeriesInstance(a, b + bump, 0.4, 0.7, 0.2, 1, 8)
    for k in range(1, 9):
        l1, r1, _ = series_bound_check(inst, k)
        l2, r2, _ = series_bound_check(inst2, k)
        assert r2 >= r1 and l2 <= r2


def test_suites_zero_violations():
    r = randomized_suite(200, seed=3)
    assert r.violations == 0 and r.checked > 200
    e = exhaustive_suite(6)
    assert e.violations == 0 and e.worst_slack >= 0


def test_dyadic_window():
    assert dyadic_window(0.25, 0.25**2 * 2**-10) == (2, 12)


@pytest.fixture(scope="module")
def neck():
    eta, delta = 0.25, 1e-6
    return eta, delta, build_annulus(eta, delta, 1024, 64)


@pytest.mark.parametrize("kind,expected", [("plus", "plus"), ("minus", "minus"), ("log", "log")])
def test_harmonic_series_dominant_term(neck, kind, expected):
    eta, delta, g = neck
    f = {"plus": g.x, "minus": g.x / g.R**2, "log": 0.1 * np.log(g.R) / np.log(eta**2 / delta)}[kind]
    s1, s2 = dyadic_window(eta, delta)
    rep = harmonic_series_weights(fourier_split(g, f), eta, delta, 0.7, (s1 + s2) // 2)
    assert rep.dominant == expected
    assert rep.lhs == pytest.approx(sum(rep.lhs_parts))


def test_harmonic_series_window_error(neck):
    eta, delta, g = neck
    with pytest.raises(ValueError):
        harmonic_series_weights(fourier_split(g, g.x), eta, delta, 0.7, 0)
    with pytest.raises(ValueError):
        harmonic_series_weights(fourier_split(g, g.x), eta, delta, 0.2, 5)
