import numpy as np
import pytest

from morsebubble.grid import build_annulus, build_cylinder, build_sphere
from morsebubble.maps import (
    GluingError,
    RationalMapSpec,
    average_length,
    constant_map,
    default_family,
    energy,
    geodesic_neck_map,
    glue_bubble,
    hopf_differential,
    inverse_stereographic,
    neck_energy_profile,
    pointwise_bound_check,
    rational_harmonic_map,
    slerp,
    sphere_conservation_residual,
    BubbleFamily,
)


@pytest.fixture(scope="module")
def sphere():
    return build_sphere(64, 64)


def test_inverse_stereographic_unit_and_conformal():
    w = np.array([0, 1, 1j, 3 - 2j, 1e-3])
    p = inverse_stereographic(w)
    assert np.allclose(np.linalg.norm(p, axis=-1), 1)
    assert np.allclose(p[0], [0, 0, 1])
    assert np.allclose(p[1], [1, 0, 0])


def test_spec_rejects_common_roots():
    with pytest.raises(ValueError):
        RationalMapSpec((1.0, -1.0), (1.0, -1.0))


def test_spec_chart_swap_continuous():
    spec = RationalMapSpec((1.0, 0.0))
    y = np.array([0.999999, 1.000001])
    v = spec.evaluate(y)
    assert np.linalg.norm(v[0] - v[1]) < 1e-5


@pytest.mark.parametrize("deg", [1, 2])
def test_energy_quantized(sphere, deg):
    spec = RationalMapSpec((1.0,) + (0.0,) * deg)
    u = rational_harmonic_map(spec, sphere)
    assert u.norm_defect() < 1e-14
    assert energy(u) == pytest.approx(4 * np.pi * deg, rel=1e-3)


def test_constant_map_trivial(sphere):
    u = constant_map(sphere)
    assert energy(u) < 1e-25
    assert hopf_differential(u).residual < 1e-25
    assert sphere_conservation_residual(u) < 1e-12


def test_identity_is_conformal_and_conserved():
    s = build_sphere(128, 64)
    u = rational_harmonic_map(RationalMapSpec((1.0, 0.0)), s)
    assert np.abs(hopf_differential(u).hopf).max() < 1e-6
    assert sphere_conservation_residual(u) < 1e-4


def test_slerp_endpoints_and_unit():
    p = np.array([[1.0, 0, 0]])
    q = np.array([[0, 1.0, 0]])
    assert np.allclose(slerp(p, q, 0.0), p) and np.allclose(slerp(p, q, 1.0), q)
    m = slerp(p, q, 0.5)
    assert np.allclose(m, [[np.sqrt(0.5), np.sqrt(0.5), 0]])


def test_geodesic_neck_average_length():
    g = build_annulus(0.5, 1e-4, 400, 16)
    u = geodesic_neck_map(g, 1.0)
    assert average_length(u, 0.5, 1e-4) == pytest.approx(1.0, rel=1e-10)


def test_family_validation():
    with pytest.raises(ValueError):
        default_family(eta=0.2, ladder=(1e-3, 1e-2))
    with pytest.raises(ValueError):
        default_family(eta=0.2, ladder=(0.1,))


def test_antipodal_gluing_raises():
    # background at the south pole, bubble tends to the north pole
    fam = BubbleFamily(RationalMapSpec((1.0,), (1e-12,)),
                       RationalMapSpec((1.0,), (1.0, 0.0)), 0.2, (1e-3,))
    with pytest.raises(GluingError, match="antipodal"):
        glue_bubble(fam, 0)
    # a bubble of degree 1 in y sends infinity to the south pole, background is north
    fam = default_family(ladder=(1e-3,))
    fam = BubbleFamily(fam.background, RationalMapSpec((1.0, 0.0)), 0.2, (1e-3,))
    with pytest.raises(GluingError):
        glue_bubble(fam, 0)


def test_glued_family_energy_and_neck():
    fam = default_family(ladder=(1e-3, 1e-4))
    for k, d in enumerate(fam.ladder):
        u = glue_bubble(fam, k)
        assert energy(u) == pytest.approx(4 * np.pi, rel=2e-3)
        prof = neck_energy_profile(u, fam.eta, d)
        assert prof.radii[0] == pytest.approx(d / fam.eta)
        assert np.all(prof.radii[-1] * 2 <= fam.eta * (1 + 1e-9))
        rep = pointwise_bound_check(u, fam.eta, d)
        assert np.isfinite(rep.sup) and rep.sup > 0


def test_hopf_residual_decreases_along_ladder():
    fam = default_family(ladder=(1e-2, 1e-3, 1e-4))
    res = [hopf_differential(glue_bubble(fam, k)).residual for k in range(3)]
    assert res[0] > res[1] > res[2]


def test_restrict_is_annulus():
    c = build_cylinder(-5, 5, 0.1, 8)
    u = constant_map(c)
    sub = u.restrict(np.exp(-2), np.exp(2))
    assert sub.cylinder.kind == "annulus"
    assert sub.cylinder.r[0] >= np.exp(-2) * (1 - 1e-9) and sub.cylinder.r[-1] <= np.exp(2) * (1 + 1e-9)
