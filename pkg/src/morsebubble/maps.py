"""Sphere-valued maps on log-polar grids.

A map is stored by its values at the nodes of a cylinder chart
``x = e^{s + i theta}``.  The chart is conformal, so energies, the Hopf
differential and the conservation residual are all computed in ``(s, theta)``
without metric factors.  The same chart serves planar annuli, punctured
planes and (through :class:`TwoChartSphereGrid`) the whole sphere.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import (
    GridError,
    LogPolarGrid,
    TwoChartSphereGrid,
    smoothstep,
    theta_derivative,
    uniform_derivative,
)

# accuracy order of s-derivatives in map diagnostics
S_ORDER = 6
NORTH = np.array([0.0, 0.0, 1.0])


class GluingError(ValueError):
    pass


def cylinder_of(grid):
    return grid.cylinder if isinstance(grid, TwoChartSphereGrid) else grid


def inverse_stereographic(w):
    """``sigma^{-1}(w) = (2w, 1 - |w|^2) / (1 + |w|^2)``; ``w = 0`` is the north pole."""
    w = np.asarray(w, dtype=complex)
    a2 = np.abs(w) ** 2
    out = np.empty(w.shape + (3,))
    out[..., 0] = 2 * w.real / (1 + a2)
    out[..., 1] = 2 * w.imag / (1 + a2)
    out[..., 2] = (1 - a2) / (1 + a2)
    return out


def _inverse_stereographic_recip(v):
    """``sigma^{-1}(1/v)`` computed from ``v`` (used where ``|w| > 1``)."""
    v = np.asarray(v, dtype=complex)
    a2 = np.abs(v) ** 2
    out = np.empty(v.shape + (3,))
    out[..., 0] = 2 * v.real / (1 + a2)
    out[..., 1] = -2 * v.imag / (1 + a2)
    out[..., 2] = (a2 - 1) / (1 + a2)
    return out


@dataclass(frozen=True)
class RationalMapSpec:
    """``w = P(y)/Q(y)``; coefficients are highest degree first (``np.polyval``)."""

    numerator: tuple
    denominator: tuple = (1.0,)

    def __post_init__(self):
        p = np.trim_zeros(np.asarray(self.numerator, dtype=complex), "f")
        q = np.trim_zeros(np.asarray(self.denominator, dtype=complex), "f")
        if q.size == 0:
            raise ValueError("denominator is the zero polynomial")
        if p.size > 1 and q.size > 1:
            rp, rq = np.roots(p), np.roots(q)
            gap = np.min(np.abs(rp[:, None] - rq[None, :]))
            if gap < 1e-8:
                raise ValueError("numerator and denominator share a root")
        object.__setattr__(self, "numerator", tuple(p) if p.size else (0j,))
        object.__setattr__(self, "denominator", tuple(q))

    @property
    def degree(self):
        p = np.asarray(self.numerator)
        if p.size == 1 and p[0] == 0:
            return 0
        return max(len(self.numerator), len(self.denominator)) - 1

    def evaluate(self, y):
        """Sphere values ``sigma^{-1}(P/Q)`` with the chart swap where ``|P| > |Q|``."""
        y = np.asarray(y, dtype=complex)
        P = np.polyval(np.asarray(self.numerator), y)
        Q = np.polyval(np.asarray(self.denominator), y)
        big = np.abs(P) > np.abs(Q)
        out = np.empty(y.shape + (3,))
        with np.errstate(divide="ignore", invalid="ignore"):
            out[~big] = inverse_stereographic(P[~big] / Q[~big])
            out[big] = _inverse_stereographic_recip(Q[big] / P[big])
        return out

    def at_infinity(self):
        p, q = np.asarray(self.numerator), np.asarray(self.denominator)
        dp = 0 if (p.size == 1 and p[0] == 0) else p.size - 1
        dq = q.size - 1
        if dp < dq:
            return NORTH.copy()
        if dp > dq:
            return -NORTH
        return inverse_stereographic(p[0] / q[0])


@dataclass
class SphereMap:
    """Unit vectors per node of a cylinder chart (shape ``(n_s, n_theta, 3)``)."""

    values: np.ndarray
    grid: object
    chart: str = "north"
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        cyl = cylinder_of(self.grid)
        if self.values.shape != cyl.shape + (self.values.shape[-1],):
            raise GridError("map values do not match the grid")

    @property
    def cylinder(self):
        return cylinder_of(self.grid)

    def norm_defect(self):
        return float(np.abs(np.linalg.norm(self.values, axis=-1) - 1.0).max())

    def derivatives(self, order=S_ORDER):
        """``(u_s, u_theta)``."""
        cyl = self.cylinder
        us = uniform_derivative(self.values, cyl.h, order=order, axis=0)
        ut = theta_derivative(self.values, axis=1)
        return us, ut

    def energy_density(self):
        """``|u_s|^2 + |u_theta|^2 = |x|^2 |du|^2`` (density against ds dtheta)."""
        us, ut = self.derivatives()
        return np.sum(us**2 + ut**2, axis=-1)

    def restrict(self, r_lo, r_hi):
        """Sub-map on the rings with ``r_lo <= r <= r_hi`` as an annulus grid."""
        cyl = self.cylinder
        rows = np.nonzero((cyl.r >= r_lo * (1 - 1e-9)) & (cyl.r <= r_hi * (1 + 1e-9)))[0]
        sub = LogPolarGrid(cyl.s[rows], cyl.n_theta, "annulus")
        return SphereMap(self.values[rows], sub, self.chart, dict(self.meta))


def rational_harmonic_map(spec: RationalMapSpec, grid):
    cyl = cylinder_of(grid)
    return SphereMap(spec.evaluate(cyl.z), grid, meta={"spec": spec})


def constant_map(grid, point=NORTH):
    cyl = cylinder_of(grid)
    p = np.asarray(point, dtype=float)
    p = p / np.linalg.norm(p)
    return SphereMap(np.broadcast_to(p, cyl.shape + (3,)).copy(), grid)


def _s_integral(cyl, dens, r_lo=0.0, r_hi=np.inf):
    """Trapezoid ``int dens ds dtheta`` over rows with ``r_lo <= r <= r_hi``."""
    r = cyl.r
    idx = np.nonzero((r >= r_lo * (1 - 1e-9)) & (r <= r_hi * (1 + 1e-9)))[0]
    if idx.size < 2:
        return 0.0
    w = np.full(idx.size, cyl.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return float(np.sum(w[:, None] * dens[idx]) * cyl.dtheta)


def energy(u: SphereMap):
    """``(1/2) int |du|^2``."""
    return 0.5 * _s_integral(u.cylinder, u.energy_density())


@dataclass(frozen=True)
class HopfResult:
    hopf: np.ndarray
    residual: float


def hopf_differential(u: SphereMap):
    """Hopf differential in the cylinder coordinate ``zeta = s + i theta`` and
    the L2 norm (against ds dtheta) of its d/dzeta-bar."""
    us, ut = u.derivatives()
    h = 0.25 * (np.sum(us * us, -1) - np.sum(ut * ut, -1) - 2j * np.sum(us * ut, -1))
    cyl = u.cylinder
    dbar = 0.5 * (uniform_derivative(h, cyl.h, order=S_ORDER, axis=0) + 1j * theta_derivative(h, axis=1))
    return HopfResult(h, float(np.sqrt(_s_integral(cyl, np.abs(dbar) ** 2))))


def _cyl_laplacian(u: SphereMap):
    cyl = u.cylinder
    uss = uniform_derivative(u.values, cyl.h, order=S_ORDER, axis=0, deriv=2)
    n = cyl.n_theta
    k = np.fft.fftfreq(n, d=1.0 / n)
    utt = np.fft.ifft(-(k**2)[None, :, None] * np.fft.fft(u.values, axis=1), axis=1).real
    return uss + utt


def sphere_conservation_residual(u: SphereMap):
    """L2 norm over the chart of ``div(u^i grad u^j - u^j grad u^i)``, i < j."""
    lap = _cyl_laplacian(u)
    v = u.values
    tot = np.zeros(v.shape[:2])
    m = v.shape[-1]
    for i in range(m):
        for j in range(i + 1, m):
            tot += (v[..., i] * lap[..., j] - v[..., j] * lap[..., i]) ** 2
    return float(np.sqrt(_s_integral(u.cylinder, tot)))


def harmonic_map_residual(u: SphereMap):
    """L2 norm of the tension ``Delta u + |du|^2 u`` in the cylinder chart."""
    lap = _cyl_laplacian(u)
    t = lap + u.energy_density()[..., None] * u.values
    return float(np.sqrt(_s_integral(u.cylinder, np.sum(t**2, -1))))


# --- bubbling families ---------------------------------------------------


def slerp(p, q, t):
    """Pointwise geodesic interpolation from p (t=0) to q (t=1)."""
    p = np.asarray(p, float)
    q = np.asarray(q, float)
    t = np.asarray(t, float)[..., None]
    c = np.clip(np.sum(p * q, -1), -1.0, 1.0)[..., None]
    ang = np.arccos(c)
    s = np.sin(ang)
    small = s < 1e-12
    with np.errstate(invalid="ignore", divide="ignore"):
        a = np.where(small, 1 - t, np.sin((1 - t) * ang) / np.where(small, 1, s))
        b = np.where(small, t, np.sin(t * ang) / np.where(small, 1, s))
    out = a * p + b * q
    return out / np.linalg.norm(out, axis=-1, keepdims=True)


@dataclass(frozen=True)
class BubbleFamily:
    """Background ``u_inf`` and bubble ``v_inf`` glued at ``x0 = 0`` across
    ``A(eta, delta_k)`` for each ladder scale ``delta_k``.

    The background is read in the north chart of the domain sphere; the
    bubble is evaluated at ``x / delta``.  In the neck the two are joined
    along great circles with a smoothstep profile in ``s = log|x|`` running
    over ``[s_start, log eta]``, where ``s_start`` sits a fraction
    ``profile_start`` of the way from ``log(delta/eta)`` to ``log eta``.
    """

    background: RationalMapSpec
    bubble: RationalMapSpec
    eta: float
    ladder: tuple
    n_theta: int = 16
    h_target: float = 0.1
    pad: float = 7.0
    profile_start: float = 0.5

    def __post_init__(self):
        if not (0 < self.eta < 1):
            raise ValueError("eta must lie in (0, 1)")
        for d in self.ladder:
            if not (0 < d <= self.eta**2):
                raise ValueError(f"ladder scale {d} must satisfy 0 < delta <= eta^2")
        if list(self.ladder) != sorted(self.ladder, reverse=True):
            raise ValueError("ladder must be decreasing")

    def grid(self, k):
        """Cylinder with nodes at ``log(delta/eta)`` and ``log eta``."""
        d = self.ladder[k]
        s_in, s_out = np.log(d / self.eta), np.log(self.eta)
        L = s_out - s_in
        if L < 1e-9:
            # no neck: a single junction ring
            m = 0
            h = self.h_target
            s_in = s_out
        else:
            m = max(4, int(np.ceil(L / self.h_target)))
            h = L / m
        k_lo = int(np.ceil((self.pad - np.log(self.eta)) / h))
        k_hi = int(np.ceil((self.pad - np.log(self.eta)) / h))
        s = s_in + h * np.arange(-k_lo, m + k_hi + 1)
        return LogPolarGrid(s, self.n_theta, "cylinder")

    def profile(self, s, k):
        d = self.ladder[k]
        s_in, s_out = np.log(d / self.eta), np.log(self.eta)
        if s_out <= s_in:
            return (np.asarray(s) >= s_out).astype(float)
        a = s_in + self.profile_start * (s_out - s_in)
        return smoothstep((np.asarray(s) - a) / (s_out - a))

    def neck(self, k):
        return self.ladder[k] / self.eta, self.eta


def glue_bubble(family: BubbleFamily, k, grid=None):
    d = family.ladder[k]
    u0 = family.background.evaluate(np.array([0j]))[0]
    v_inf = family.bubble.at_infinity()
    if np.linalg.norm(u0 - v_inf) > 1e-9:
        kind = "antipodal" if np.dot(u0, v_inf) < -1 + 1e-9 else "mismatched"
        raise GluingError(f"{kind} attachment: bubble at infinity {v_inf} != background at the gluing point {u0}")
    cyl = family.grid(k) if grid is None else cylinder_of(grid)
    z = cyl.z
    u_bg = family.background.evaluate(z)
    with np.errstate(divide="ignore", invalid="ignore"):
        v_b = family.bubble.evaluate(z / d)
    t = np.repeat(family.profile(cyl.s, k)[:, None], cyl.n_theta, 1)
    mixing = (t > 0) & (t < 1)
    if np.any(mixing):
        dots = np.sum(u_bg[mixing] * v_b[mixing], -1)
        if dots.min() < -1 + 1e-9:
            raise GluingError("antipodal values in the neck: geodesic not unique")
    vals = slerp(v_b, u_bg, t)
    vals[t <= 0] = v_b[t <= 0]
    vals[t >= 1] = u_bg[t >= 1]
    return SphereMap(vals, cyl if grid is None else grid, meta={"delta": d, "eta": family.eta, "k": k})


def default_family(eta=0.2, ladder=(1e-2, 1e-3, 1e-4, 1e-5), n_theta=16, h_target=0.1):
    """Constant north-pole background with the bubble ``sigma^{-1}(1/y)`` (equal to N at infinity)."""
    return BubbleFamily(RationalMapSpec((0.0,)), RationalMapSpec((1.0,), (1.0, 0.0)), eta, tuple(ladder),
                        n_theta=n_theta, h_target=h_target)


@dataclass(frozen=True)
class NeckProfile:
    radii: np.ndarray
    energies: np.ndarray

    @property
    def sup(self):
        return float(self.energies.max()) if self.energies.size else 0.0


def neck_energy_profile(u: SphereMap, eta, delta):
    """``int_{B_2rho \\ B_rho} |du|^2`` for rho = (delta/eta) 2^j, 2 rho <= eta."""
    cyl = u.cylinder
    dens = u.energy_density()
    rho = delta / eta
    radii, out = [], []
    while 2 * rho <= eta * (1 + 1e-9):
        radii.append(rho)
        out.append(_s_integral(cyl, dens, rho, 2 * rho))
        rho *= 2
    return NeckProfile(np.array(radii), np.array(out))


def average_length(u: SphereMap, eta, delta):
    """``int_{delta/eta}^{eta} (1/2pi) int |du/dr| dtheta dr = (1/2pi) int |u_s| ds dtheta``."""
    us, _ = u.derivatives()
    return _s_integral(u.cylinder, np.linalg.norm(us, axis=-1), delta / eta, eta) / (2 * np.pi)


@dataclass(frozen=True)
class PointwiseBoundReport:
    ratios: np.ndarray
    sup: float
    argmax_radius: float
    neck_energy: float


def pointwise_bound_check(u: SphereMap, eta, delta, beta=0.5, c=1.0):
    """Sup over the neck of ``|x|^2|du|^2`` against the decay profile
    ``[(|x|/eta)^beta + (delta/(eta|x|))^beta] E(A(2eta, delta)) + c/log^2(eta^2/delta)``."""
    cyl = u.cylinder
    dens = u.energy_density()
    e_big = _s_integral(cyl, dens, delta / (2 * eta), 2 * eta)
    L = np.log(eta**2 / delta)
    rows = np.nonzero((cyl.r >= delta / eta * (1 - 1e-9)) & (cyl.r <= eta * (1 + 1e-9)))[0]
    r = cyl.r[rows]
    prof = ((r / eta) ** beta + (delta / (eta * r)) ** beta) * e_big + c / L**2
    ratios = dens[rows] / prof[:, None]
    if ratios.size == 0:
        return PointwiseBoundReport(ratios, 0.0, float("nan"), e_big)
    i = np.unravel_index(np.argmax(ratios), ratios.shape)
    return PointwiseBoundReport(ratios, float(ratios[i]), float(r[i[0]]), e_big)


def geodesic_neck_map(grid, length):
    """Map whose rings sweep a great circle arc of the given length across
    the grid: ``u = (sin phi, 0, cos phi)``, ``phi`` linear in s."""
    cyl = cylinder_of(grid)
    phi = length * (cyl.s - cyl.s[0]) / (cyl.s[-1] - cyl.s[0])
    vals = np.zeros(cyl.shape + (3,))
    vals[..., 0] = np.sin(phi)[:, None]
    vals[..., 2] = np.cos(phi)[:, None]
    return SphereMap(vals, grid)


def plane_map(grid, fn):
    """Map from a function of the plane points ``x`` (complex) to R^3, normalized."""
    cyl = cylinder_of(grid)
    v = np.asarray(fn(cyl.z), dtype=float)
    return SphereMap(v / np.linalg.norm(v, axis=-1, keepdims=True), grid)
