import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from morsebubble.grid import build_cylinder, build_sphere
from morsebubble.maps import RationalMapSpec, constant_map, default_family, glue_bubble, rational_harmonic_map
from morsebubble.spectral import (
    NeckWeight,
    SpectrumError,
    annulus_hardy_eigen,
    annulus_weight,
    assemble_jacobi,
    hardy_exact,
    index_nullity,
    neck_positivity_min,
    omega_eta_infty,
    omega_hat_infty,
    radial_weighted_eigen,
    solve_generalized,
    solve_weighted_eigen,
)


@pytest.mark.parametrize("L", [4.0, 8.0, 16.0])
def test_hardy_eigenvalue(L):
    eta = 0.1
    delta = eta**2 * np.exp(-L)
    assert annulus_hardy_eigen(eta, delta) == pytest.approx(hardy_exact(eta, delta), rel=1e-4)


def test_radial_higher_mode():
    # Hardy weight, mode n: lam = pi^2/L^2 + n^2
    L = 4.0
    lam = radial_weighted_eigen(lambda r: 1 / r**2, np.exp(-L), 1.0, n_s=1024, mode=2)[0]
    assert lam == pytest.approx(np.pi**2 / L**2 + 4, rel=1e-4)


def test_neck_weight_branches_continuous():
    w = NeckWeight(0.2, 1e-5, 0.5)
    eta, d = 0.2, 1e-5
    for r0 in (eta, d / eta):
        assert w(np.array([r0 * (1 - 1e-9)]))[0] == pytest.approx(w(np.array([r0 * (1 + 1e-9)]))[0], rel=1e-6)
    with pytest.raises(ValueError):
        NeckWeight(0.2, 1e-5, 1.5)
    with pytest.raises(ValueError):
        NeckWeight(0.2, 0.05, 0.5)


def test_limit_weights_positive():
    r = np.logspace(-8, 8, 50)
    assert np.all(omega_eta_infty(r, 0.2) > 0)
    assert np.all(omega_hat_infty(r, 0.2) > 0)
    with pytest.raises(ValueError):
        annulus_weight("bogus", 0.1, 1e-4)


def test_generalized_solver_dense_vs_iterative(rng):
    n = 300
    A = sp.diags([np.full(n - 1, -1.0), np.full(n, 2.0), np.full(n - 1, -1.0)], [-1, 0, 1]).tocsr()
    m = rng.uniform(0.5, 2.0, n)
    l1, _, meth1 = solve_generalized(A, m, 6)
    l2, _, meth2 = solve_generalized(A, m, 6, shift=-0.1, dense_limit=10)
    assert meth1 == "dense" and meth2 == "shift-invert"
    assert np.allclose(l1, l2, rtol=1e-8, atol=1e-12)


def test_constant_map_counts():
    s = build_sphere(64, 32)
    rep = solve_weighted_eigen(assemble_jacobi(constant_map(s)), count=20)
    assert index_nullity(rep) == (0, 2)
    assert rep.gap_ratio() > 10


@settings(max_examples=3, deadline=None)
@given(st.floats(0.3, 3.0))
def test_counts_independent_of_weight_scale(c):
    cyl = build_cylinder(-6, 6, 0.15, 12)
    u = rational_harmonic_map(RationalMapSpec((1.0, 0.0)), cyl)
    base = solve_weighted_eigen(assemble_jacobi(u), count=16)
    scaled = solve_weighted_eigen(assemble_jacobi(u, weight=lambda r: c * 4 / (1 + r**2) ** 2), count=16)
    assert index_nullity(base) == index_nullity(scaled)
    assert np.allclose(scaled.eigenvalues[8:], base.eigenvalues[8:] / c, rtol=1e-6)


def test_eigen_residuals_small():
    cyl = build_cylinder(-6, 6, 0.15, 12)
    u = rational_harmonic_map(RationalMapSpec((1.0, 0.0)), cyl)
    rep = solve_weighted_eigen(assemble_jacobi(u), count=12)
    assert rep.residuals.max() < 1e-8


def test_index_nullity_requires_enough_eigenvalues():
    cyl = build_cylinder(-6, 6, 0.2, 8)
    rep = solve_weighted_eigen(assemble_jacobi(constant_map(cyl)), count=2)
    with pytest.raises(SpectrumError):
        index_nullity(rep, tau=1e-3)


def test_neck_positivity_on_glued_map():
    fam = default_family(ladder=(1e-4,), h_target=0.1)
    u = glue_bubble(fam, 0)
    assert neck_positivity_min(u, fam.eta, 1e-4) > 0
