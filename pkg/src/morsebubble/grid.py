"""Polar discretizations: log-polar annuli and cylinders, graded disks, and
the two-chart sphere.

Fields are arrays of shape ``(n_r, n_theta)`` (optionally with trailing
component axes).  Angular derivatives are spectral; radial ones are finite
differences.  On log-polar grids every angular mode ``n`` is treated with an
exponentially fitted three-point stencil that is exact on ``r**n`` and
``r**-n``, so discrete harmonic functions are exactly harmonic.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

TWO_PI = 2.0 * np.pi


class GridError(ValueError):
    pass


def angular_modes(n_theta):
    """Signed integer frequencies in ``np.fft.fft`` order."""
    return np.fft.fftfreq(n_theta, d=1.0 / n_theta)


def fitted_symbol(n, h):
    """Discrete replacement of ``n**2`` for the s-direction stencil of width h."""
    n = np.abs(np.asarray(n, dtype=float))
    return 2.0 * (np.cosh(n * h) - 1.0) / h**2


def _fd_weights(offsets, deriv):
    """Finite-difference weights on integer offsets (unit spacing)."""
    offsets = np.asarray(offsets, dtype=float)
    k = len(offsets)
    vander = np.vander(offsets, k, increasing=True).T
    rhs = np.zeros(k)
    rhs[deriv] = float(np.prod(np.arange(1, deriv + 1)))
    return np.linalg.solve(vander, rhs)


def uniform_derivative(f, h, order=2, axis=0, deriv=1):
    """First (or second) derivative on a uniform grid, centered in the
    interior and one-sided at the ends, of the requested even accuracy order."""
    f = np.moveaxis(np.asarray(f), axis, 0)
    n = f.shape[0]
    half = order // 2
    width = 2 * half + 1
    side = order + deriv
    if n < max(width, side):
        raise GridError(f"need at least {max(width, side)} nodes for order {order}")
    out = np.empty(f.shape, dtype=np.result_type(f, float))
    w = _fd_weights(np.arange(-half, half + 1), deriv)
    out[half:n - half] = sum(w[k] * f[k:n - 2 * half + k] for k in range(width))
    sign = (-1) ** deriv
    for i in range(half):
        offs = np.arange(side) - i
        wl = _fd_weights(offs, deriv)
        out[i] = sum(wl[k] * f[k] for k in range(side))
        out[n - 1 - i] = sign * sum(wl[k] * f[n - 1 - k] for k in range(side))
    return np.moveaxis(out / h**deriv, 0, axis)


def theta_derivative(f, axis=1):
    """Spectral d/dtheta on a periodic uniform grid (Nyquist mode dropped)."""
    f = np.asarray(f)
    n = f.shape[axis]
    k = angular_modes(n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    shape = [1] * f.ndim
    shape[axis] = n
    fh = np.fft.fft(f, axis=axis) * (1j * k.reshape(shape))
    out = np.fft.ifft(fh, axis=axis)
    return out if np.iscomplexobj(f) else out.real


def _expand(arr, field):
    """Broadcast a (n_r, n_theta) array against a field with trailing axes."""
    extra = np.ndim(field) - 2
    return arr.reshape(arr.shape + (1,) * extra)


@dataclass(frozen=True)
class LogPolarGrid:
    """Grid uniform in ``(s, theta)`` with ``s = log r``.

    ``kind`` is ``"annulus"`` (boundary rings are Dirichlet rings) or
    ``"cylinder"`` (ends are free, used for punctured planes and spheres).
    """

    s: np.ndarray
    n_theta: int
    kind: str = "annulus"

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        object.__setattr__(self, "s", s)
        if s.ndim != 1 or len(s) < 4:
            raise GridError("need at least 4 radial nodes")
        if not (self.n_theta >= 4 or self.n_theta == 1):
            raise GridError("n_theta must be >= 4 (or 1 for axisymmetric)")
        d = np.diff(s)
        if np.any(d <= 0) or np.ptp(d) > 1e-9 * max(1.0, abs(d[0])):
            raise GridError("s nodes must be uniform and increasing")

    @property
    def n_s(self):
        return len(self.s)

    @property
    def shape(self):
        return (self.n_s, self.n_theta)

    @property
    def h(self):
        return float(self.s[1] - self.s[0])

    @property
    def dtheta(self):
        return TWO_PI / self.n_theta

    @cached_property
    def theta(self):
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def r(self):
        return np.exp(self.s)

    @property
    def inner_radius(self):
        return float(self.r[0])

    @property
    def outer_radius(self):
        return float(self.r[-1])

    @cached_property
    def R(self):
        return np.repeat(self.r[:, None], self.n_theta, axis=1)

    @cached_property
    def TH(self):
        return np.repeat(self.theta[None, :], self.n_s, axis=0)

    @cached_property
    def S(self):
        return np.repeat(self.s[:, None], self.n_theta, axis=1)

    @cached_property
    def z(self):
        """Complex node coordinates."""
        return np.exp(self.S + 1j * self.TH)

    @cached_property
    def x(self):
        return self.z.real

    @cached_property
    def y(self):
        return self.z.imag

    @cached_property
    def s_weights(self):
        """Trapezoid weights in s (half cells at the two ends)."""
        w = np.full(self.n_s, self.h)
        w[0] = w[-1] = 0.5 * self.h
        return w

    @cached_property
    def log_areas(self):
        """Cell measures for ``ds dtheta`` (the cylinder measure)."""
        return np.outer(self.s_weights, np.full(self.n_theta, self.dtheta))

    @cached_property
    def cell_areas(self):
        """Euclidean cell areas: exact integral of ``e^{2s}`` over each s-cell."""
        lo = np.maximum(self.s - 0.5 * self.h, self.s[0])
        hi = np.minimum(self.s + 0.5 * self.h, self.s[-1])
        ring = 0.5 * (np.exp(2 * hi) - np.exp(2 * lo))
        return np.outer(ring, np.full(self.n_theta, self.dtheta))

    @cached_property
    def boundary_mask(self):
        m = np.zeros(self.shape, dtype=bool)
        if self.kind == "annulus":
            m[0] = m[-1] = True
        return m

    def ring_mask(self, r_lo, r_hi):
        """Nodes with ``r_lo <= r < r_hi`` (small tolerance on both ends)."""
        tol = 1e-12
        return (self.R >= r_lo * (1 - tol)) & (self.R < r_hi * (1 - tol))


def build_annulus(eta, delta, n_s, n_theta):
    """Log-polar grid on ``A(eta, delta) = B_eta \\ B_{delta/eta}``."""
    if not (eta > 0 and delta > 0):
        raise GridError("eta and delta must be positive")
    if delta >= eta**2:
        raise GridError(f"need delta < eta^2 (got delta={delta}, eta^2={eta**2})")
    if n_s < 4 or not (n_theta >= 4 or n_theta == 1):
        raise GridError("resolutions must be >= 4")
    s = np.linspace(np.log(delta / eta), np.log(eta), int(n_s))
    return LogPolarGrid(s, int(n_theta), "annulus")


def build_radial_annulus(r_in, r_out, n_s, n_theta):
    """Log-polar grid on ``B_{r_out} \\ B_{r_in}`` given by its radii."""
    if not (0 < r_in < r_out):
        raise GridError("need 0 < r_in < r_out")
    s = np.linspace(np.log(r_in), np.log(r_out), int(n_s))
    return LogPolarGrid(s, int(n_theta), "annulus")


def build_cylinder(s_min, s_max, h, n_theta):
    """Free-ended log-polar grid with spacing close to ``h``."""
    n = max(4, int(round((s_max - s_min) / h)) + 1)
    return LogPolarGrid(np.linspace(s_min, s_max, n), int(n_theta), "cylinder")


@dataclass(frozen=True)
class DiskGrid:
    """Polar grid on ``B_radius`` with a center node and graded radial rings.

    Radial nodes follow ``r(xi) = R (e^{g xi} - 1)/(e^g - 1)`` on uniform xi
    (uniform when ``grading == 0``).  The center is stored as a ring of
    ``n_theta`` identical copies.  Cell faces satisfy
    ``f^2 = (r_i^2 + r_{i+1}^2) / 2``, which makes the finite-volume radial
    operator exact on constants and on ``r**2``.
    """

    radius: float
    n_r: int
    n_theta: int
    grading: float = 6.0

    def __post_init__(self):
        if self.radius <= 0:
            raise GridError("radius must be positive")
        if self.n_r < 4 or self.n_theta < 4:
            raise GridError("resolutions must be >= 4")

    @property
    def shape(self):
        return (self.n_r, self.n_theta)

    @cached_property
    def r(self):
        xi = np.linspace(0.0, 1.0, self.n_r)
        g = self.grading
        if g == 0:
            return self.radius * xi
        return self.radius * np.expm1(g * xi) / np.expm1(g)

    @property
    def dtheta(self):
        return TWO_PI / self.n_theta

    @cached_property
    def theta(self):
        return np.arange(self.n_theta) * self.dtheta

    @cached_property
    def faces(self):
        r = self.r
        return np.sqrt(0.5 * (r[:-1] ** 2 + r[1:] ** 2))

    @cached_property
    def radial_volumes(self):
        """``int r dr`` over each radial cell."""
        f2 = np.concatenate([[0.0], self.faces**2, [self.radius**2]])
        return 0.5 * np.diff(f2)

    @cached_property
    def cell_areas(self):
        return np.outer(self.radial_volumes, np.full(self.n_theta, self.dtheta))

    @cached_property
    def R(self):
        return np.repeat(self.r[:, None], self.n_theta, axis=1)

    @cached_property
    def TH(self):
        return np.repeat(self.theta[None, :], self.n_r, axis=0)

    @cached_property
    def z(self):
        return self.R * np.exp(1j * self.TH)

    @cached_property
    def x(self):
        return self.z.real

    @cached_property
    def y(self):
        return self.z.imag

    @cached_property
    def boundary_mask(self):
        m = np.zeros(self.shape, dtype=bool)
        m[-1] = True
        return m

    def ring_mask(self, r_lo, r_hi):
        tol = 1e-12
        return (self.R >= r_lo * (1 - tol)) & (self.R < r_hi * (1 - tol))

    @cached_property
    def flux_coeffs(self):
        """Radial stiffness per face: ``(r_i^2 + r_{i+1}^2)/(r_{i+1}^2 - r_i^2)``."""
        r2 = self.r**2
        return (r2[:-1] + r2[1:]) / (r2[1:] - r2[:-1])

    @cached_property
    def inv_r2_volumes(self):
        """``int dr / r`` over each ring cell (center cell unused)."""
        f = np.concatenate([[np.nan], self.faces, [self.radius]])
        out = np.log(f[1:] / np.where(np.isnan(f[:-1]), 1.0, f[:-1]))
        out[0] = np.inf
        return out


def build_disk(radius=1.0, n_r=128, n_theta=64, grading=6.0):
    return DiskGrid(float(radius), int(n_r), int(n_theta), float(grading))


def _check_field(grid, field):
    field = np.asarray(field)
    if field.shape[:2] != grid.shape:
        raise GridError(f"field shape {field.shape} does not match grid {grid.shape}")
    return field


def integrate(grid, field):
    """Quadrature ``sum field * cell_area`` (trailing axes are kept)."""
    field = _check_field(grid, field)
    return np.tensordot(grid.cell_areas, field, axes=([0, 1], [0, 1]))


def integrate_log(grid, field):
    """Quadrature against the cylinder measure ``ds dtheta``."""
    field = _check_field(grid, field)
    return np.tensordot(grid.log_areas, field, axes=([0, 1], [0, 1]))


def polar_derivatives(grid, f, order=2):
    """Return ``(df/dr, df/dtheta)`` for a field on either grid type."""
    f = _check_field(grid, f)
    if isinstance(grid, LogPolarGrid):
        fs = uniform_derivative(f, grid.h, order=order, axis=0)
        fr = fs / _expand(grid.R, f)
    else:
        fr = _disk_radial_derivative(grid, f, order=order)
    ft = theta_derivative(f, axis=1) if grid.n_theta > 1 else np.zeros_like(f)
    return fr, ft


def _disk_radial_derivative(grid, f, order=2):
    r = grid.r
    if order > 2 and grid.grading > 0:
        # differentiate in the uniform coordinate xi, then apply dr/dxi
        g = grid.grading
        xi = np.linspace(0.0, 1.0, grid.n_r)
        drdxi = grid.radius * g * np.exp(g * xi) / np.expm1(g)
        fx = uniform_derivative(f, xi[1] - xi[0], order=order, axis=0)
        return fx / _expand(np.repeat(drdxi[:, None], grid.n_theta, 1), f)
    fr = np.gradient(f, r, axis=0, edge_order=2)
    # along each ray the stencil (0, r1, r2) is one-sided at the center
    h1, h2 = r[1], r[2]
    c0 = -(h1 + h2) / (h1 * h2)
    c1 = h2 / (h1 * (h2 - h1))
    c2 = -h1 / (h2 * (h2 - h1))
    fr[0] = c0 * f[0] + c1 * f[1] + c2 * f[2]
    return fr


def gradient(grid, f, order=2):
    """Cartesian gradient ``(df/dx, df/dy)`` of a scalar field."""
    fr, ft = polar_derivatives(grid, f, order=order)
    R = _expand(grid.R, f)
    c = _expand(np.cos(grid.TH), f)
    sn = _expand(np.sin(grid.TH), f)
    if isinstance(grid, DiskGrid):
        R = np.where(R == 0, 1.0, R)
    gt = ft / R
    gx = c * fr - sn * gt
    gy = sn * fr + c * gt
    if isinstance(grid, DiskGrid):
        # center: directional derivatives along the rays give the gradient
        d = fr[0]
        c0, s0 = c[0], sn[0]
        n = grid.n_theta
        gx0 = 2.0 / n * np.sum(d * c0, axis=0)
        gy0 = 2.0 / n * np.sum(d * s0, axis=0)
        gx[0] = gx0
        gy[0] = gy0
    return gx, gy


def grad_norm2(grid, f, order=2):
    """Pointwise ``|grad f|^2``; vector-valued fields are summed over components."""
    gx, gy = gradient(grid, f, order=order)
    out = np.abs(gx) ** 2 + np.abs(gy) ** 2
    while out.ndim > 2:
        out = out.sum(axis=-1)
    return out


def dirichlet_energy(grid, f, order=2):
    return float(integrate(grid, grad_norm2(grid, f, order=order)))


def _mode_apply(f, per_mode):
    """Apply a per-angular-mode radial operator along axis 0."""
    fh = np.fft.fft(f, axis=1)
    out = np.empty_like(fh)
    for j, n in enumerate(angular_modes(f.shape[1])):
        out[:, j] = per_mode(fh[:, j], abs(n))
    res = np.fft.ifft(out, axis=1)
    return res if np.iscomplexobj(f) else res.real


def cylinder_laplacian(grid, f):
    """``(d_ss + d_thetatheta) f`` with the fitted per-mode stencil.

    Interior rings are exact on ``e^{+-n s} e^{i n theta}``; end rings use a
    one-sided second difference.
    """
    f = _check_field(grid, f)
    if f.ndim > 2:
        return np.stack([cylinder_laplacian(grid, f[..., k]) for k in range(f.shape[-1])], axis=-1)
    h = grid.h

    def per_mode(y, n):
        out = np.empty_like(y)
        out[1:-1] = (y[2:] + y[:-2] - 2.0 * np.cosh(n * h) * y[1:-1]) / h**2
        out[0] = (2 * y[0] - 5 * y[1] + 4 * y[2] - y[3]) / h**2 - n**2 * y[0]
        out[-1] = (2 * y[-1] - 5 * y[-2] + 4 * y[-3] - y[-4]) / h**2 - n**2 * y[-1]
        return out

    return _mode_apply(f, per_mode)


def laplacian_apply(grid, f):
    """Flat Laplacian of a field; ``e^{-2s}(d_ss + d_thetatheta)`` on log grids."""
    f = _check_field(grid, f)
    if isinstance(grid, LogPolarGrid):
        return cylinder_laplacian(grid, f) / _expand(grid.R**2, f)
    if f.ndim > 2:
        return np.stack([laplacian_apply(grid, f[..., k]) for k in range(f.shape[-1])], axis=-1)
    from .wente import disk_mode_operator

    vol = grid.radial_volumes

    def per_mode(y, n):
        A = disk_mode_operator(grid, n, dirichlet=False)
        out = -(A @ y) / vol
        if n != 0:
            out[0] = 0.0
        r = grid.r
        # boundary ring: quadratic extrapolation of the interior values
        out[-1] = 3 * out[-2] - 3 * out[-3] + out[-4] if len(r) > 4 else out[-2]
        return out

    return _mode_apply(f, per_mode)


@dataclass(frozen=True)
class TwoChartSphereGrid:
    """The round sphere as a log-polar cylinder seen through two charts.

    The north chart is the stereographic plane ``y`` (north pole at 0); the
    south chart is ``y' = y/|y|^2``, i.e. ``(s, theta) -> (-s, -theta)``.
    Charts overlap on ``|y| in [overlap_lo, overlap_hi]``.  The s-nodes are
    symmetric about 0 so every node of the overlap is a node of both charts.
    """

    cylinder: LogPolarGrid
    overlap_lo: float = 0.8
    overlap_hi: float = 1.25

    @property
    def shape(self):
        return self.cylinder.shape

    @cached_property
    def conformal_factor(self):
        """``rho(y) = 4/(1+|y|^2)^2`` per node (north-chart coordinates)."""
        return 4.0 / (1.0 + self.cylinder.R**2) ** 2

    @cached_property
    def sphere_density(self):
        """Round area density against ``ds dtheta``: ``sech(s)^2``."""
        return 1.0 / np.cosh(self.cylinder.S) ** 2

    @cached_property
    def north_rings(self):
        return np.nonzero(self.cylinder.s <= np.log(self.overlap_hi) + 1e-12)[0]

    @cached_property
    def south_rings(self):
        return np.nonzero(self.cylinder.s >= np.log(self.overlap_lo) - 1e-12)[0]

    @property
    def chart_shape(self):
        return (len(self.north_rings), self.cylinder.n_theta)

    @cached_property
    def partition_of_unity(self):
        """Weights ``(w_north, w_south)`` summing to one at every node."""
        s = self.cylinder.s
        a, b = np.log(self.overlap_lo), np.log(self.overlap_hi)
        t = np.clip((s - a) / (b - a), 0.0, 1.0)
        w_south = smoothstep(t)
        w_north = 1.0 - w_south
        n = self.cylinder.n_theta
        return np.repeat(w_north[:, None], n, 1), np.repeat(w_south[:, None], n, 1)

    def area(self):
        """Round area assembled chartwise with the partition of unity."""
        wn, ws = self.partition_of_unity
        dens = self.sphere_density * self.cylinder.log_areas
        north = np.sum((wn * dens)[self.north_rings])
        south = np.sum((ws * dens)[self.south_rings])
        return float(north + south)

    def _south_index(self):
        """Cylinder (row, column) indices of the south-chart nodes."""
        cyl = self.cylinder
        rows = cyl.n_s - 1 - np.arange(len(self.north_rings))
        cols = (-np.arange(cyl.n_theta)) % cyl.n_theta
        return rows, cols

    def north_values(self, field):
        return np.asarray(field)[self.north_rings]

    def south_values(self, field):
        """Field in south-chart order: rows by increasing ``s' = -s``."""
        rows, cols = self._south_index()
        return np.asarray(field)[rows][:, cols]

    def north_to_south(self, north_field):
        """Transfer north-chart values into the south chart.

        Returns ``(values, keep)``; ``keep`` marks nodes the north chart covers.
        """
        cyl = self.cylinder
        north_field = np.asarray(north_field, dtype=float)
        full = np.full(cyl.shape + north_field.shape[2:], np.nan)
        full[self.north_rings] = north_field
        south = self.south_values(full)
        keep = ~np.isnan(south.reshape(south.shape[0], south.shape[1], -1)[..., 0])
        return south, keep

    def south_to_north(self, south_field):
        cyl = self.cylinder
        south_field = np.asarray(south_field, dtype=float)
        full = np.full(cyl.shape + south_field.shape[2:], np.nan)
        rows, cols = self._south_index()
        full[rows[:, None], cols[None, :]] = south_field
        north = full[self.north_rings]
        keep = ~np.isnan(north.reshape(north.shape[0], north.shape[1], -1)[..., 0])
        return north, keep


def build_sphere(n_per_chart=64, n_theta=64, s_max=None):
    """Two-chart sphere with ``n_per_chart`` radial rings in each chart."""
    if n_per_chart < 8 or n_theta < 4:
        raise GridError("sphere resolution too small")
    b = np.log(1.25)
    if s_max is None:
        s_max = 7.0
    # uniform s-grid symmetric about 0 whose north part has n_per_chart rings
    h = (s_max + b) / (n_per_chart - 1)
    m = int(np.floor(s_max / h))
    s = h * np.arange(-m, m + 1)
    cyl = LogPolarGrid(s, int(n_theta), "cylinder")
    return TwoChartSphereGrid(cyl)


def smoothstep(t):
    """C^1 cubic step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cutoff(t):
    """C^1 cutoff: 1 on [0, 1/2], 0 on [1, inf)."""
    return 1.0 - smoothstep(2.0 * np.asarray(t, dtype=float) - 1.0)
