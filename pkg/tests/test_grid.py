import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from morsebubble import grid as G
from morsebubble.grid import GridError


def test_fitted_symbol_exact_on_powers():
    g = G.build_annulus(0.5, 1e-3, 200, 32)
    for n in (0, 1, 3, 7):
        f = g.R**n * np.cos(n * g.TH) + g.R ** (-n) * np.sin(n * g.TH) if n else np.log(g.R)
        lap = G.cylinder_laplacian(g, f)
        assert np.abs(lap[1:-1]).max() < 1e-8 * np.abs(f).max()


def test_uniform_derivative_orders():
    x = np.linspace(0, 1, 201)
    h = x[1] - x[0]
    f = np.sin(3 * x)
    for order in (2, 4, 6):
        d1 = G.uniform_derivative(f, h, order=order)
        d2 = G.uniform_derivative(f, h, order=order, deriv=2)
        assert np.abs(d1 - 3 * np.cos(3 * x)).max() < 10 * h**order * 3 ** (order + 1)
        assert np.abs(d2 + 9 * np.sin(3 * x)).max() < 100 * h ** (order - 1) * 3 ** (order + 2)


def test_theta_derivative_spectral():
    th = 2 * np.pi * np.arange(32) / 32
    f = np.cos(5 * th)[None, :]
    assert np.allclose(G.theta_derivative(f), -5 * np.sin(5 * th), atol=1e-12)


def test_disk_integrals():
    g = G.build_disk(n_r=128, n_theta=32)
    assert abs(G.integrate(g, np.ones(g.shape)) - np.pi) < 1e-12
    assert abs(G.dirichlet_energy(g, g.x, order=6) - np.pi) < 1e-6


def test_disk_laplacian_exact_on_quadratic():
    g = G.build_disk(n_r=64, n_theta=16)
    lap = G.laplacian_apply(g, (1 - g.R**2) / 4)
    assert np.abs(lap[:-1] + 1).max() < 1e-8


def test_annulus_validation():
    with pytest.raises(GridError):
        G.build_annulus(0.1, 0.02, 64, 16)
    with pytest.raises(GridError):
        G.build_radial_annulus(1.0, 0.5, 64, 16)


def test_sphere_area_and_chart_round_trip():
    s = G.build_sphere(64, 32)
    # the chart is truncated at |s| = 7: the missing caps have area ~ 8 pi e^-14
    assert abs(s.area() - 4 * np.pi) < 5e-5
    f = np.random.default_rng(0).normal(size=s.shape)
    north = s.north_values(f)
    south, keep = s.north_to_south(north)
    back, keep2 = s.south_to_north(south)
    assert np.array_equal(back[keep2], north[keep2])
    pu = s.partition_of_unity
    assert np.allclose(pu[0] + pu[1], 1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 6), st.floats(0.5, 3.0))
def test_laplacian_annihilates_harmonic_modes(n, c):
    g = G.build_annulus(0.5, 1e-2, 100, 32)
    f = c * g.R**n * np.cos(n * g.TH)
    assert np.abs(G.cylinder_laplacian(g, f)[1:-1]).max() < 1e-8 * max(1.0, np.abs(f).max())


@settings(max_examples=25, deadline=None)
@given(st.floats(-3, 3), st.floats(-3, 3))
def test_integrate_is_linear(a, b):
    g = G.build_disk(n_r=32, n_theta=16)
    f1, f2 = g.x**2, g.y
    lhs = G.integrate(g, a * f1 + b * f2)
    assert abs(lhs - a * G.integrate(g, f1) - b * G.integrate(g, f2)) < 1e-12


def test_cutoff_shape():
    t = np.linspace(0, 2, 101)
    c = G.cutoff(t)
    assert np.all(c[t <= 0.5] == 1) and np.all(c[t >= 1] == 0)
    assert np.all(np.diff(c) <= 0)
