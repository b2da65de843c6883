"""Harmonic functions on annuli: Fourier splitting, pointwise gradient
ratios and the Whitney-type extension to the whole plane."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import maximum_filter1d

from .grid import (
    GridError,
    LogPolarGrid,
    _check_field,
    integrate_log,
    smoothstep,
    uniform_derivative,
    theta_derivative,
)

MAX_CONDITION = 1e12


class IllConditionedFit(ValueError):
    pass


@dataclass(frozen=True)
class AnnulusFourierDecomposition:
    """``h = h0 + C0 log|z| + Re sum_{n != 0} h_n z^n`` with ``|n| <= N``."""

    positive_coeffs: np.ndarray  # h_1..h_N
    negative_coeffs: np.ndarray  # h_-1..h_-N
    log_coeff: float
    constant: float
    max_mode: int
    residuals: np.ndarray  # per-mode relative least-squares residual, index n
    condition: float

    def plus_part(self):
        return AnnulusFourierDecomposition(self.positive_coeffs, np.zeros_like(self.negative_coeffs),
                                           0.0, 0.0, self.max_mode, self.residuals, self.condition)

    def minus_part(self):
        return AnnulusFourierDecomposition(np.zeros_like(self.positive_coeffs), self.negative_coeffs,
                                           0.0, 0.0, self.max_mode, self.residuals, self.condition)

    def evaluate(self, z):
        z = np.asarray(z, dtype=complex)
        out = self.constant + self.log_coeff * np.log(np.abs(z))
        for n in range(1, self.max_mode + 1):
            out = out + np.real(self.positive_coeffs[n - 1] * z**n + self.negative_coeffs[n - 1] * z ** (-n))
        return np.real(out)

    def grad_norm2(self, z):
        """``|grad h|^2 = |f'(z)|^2`` where ``h = Re f`` (log term included)."""
        z = np.asarray(z, dtype=complex)
        d = self.log_coeff / z
        for n in range(1, self.max_mode + 1):
            d = d + n * self.positive_coeffs[n - 1] * z ** (n - 1) - n * self.negative_coeffs[n - 1] * z ** (-n - 1)
        return np.abs(d) ** 2

    def annulus_energy(self, r_in, r_out):
        """Exact ``int |grad h|^2`` over ``B_{r_out} \\ B_{r_in}`` (modes are orthogonal)."""
        n = np.arange(1, self.max_mode + 1)
        e = 2 * np.pi * self.log_coeff**2 * np.log(r_out / r_in)
        e += np.sum(np.pi * n * np.abs(self.positive_coeffs) ** 2 * (r_out ** (2 * n) - r_in ** (2 * n)))
        e += np.sum(np.pi * n * np.abs(self.negative_coeffs) ** 2 * (r_in ** (-2.0 * n) - r_out ** (-2.0 * n)))
        return float(e)


def synthesize(grid, constant=0.0, log_coeff=0.0, positive=(), negative=()):
    """Evaluate ``h0 + C0 log|z| + Re sum h_n z^n`` on the grid nodes."""
    positive = np.asarray(positive, dtype=complex)
    negative = np.asarray(negative, dtype=complex)
    N = max(len(positive), len(negative))
    pos = np.zeros(N, complex)
    neg = np.zeros(N, complex)
    pos[:len(positive)] = positive
    neg[:len(negative)] = negative
    dec = AnnulusFourierDecomposition(pos, neg, float(log_coeff), float(constant), N, np.zeros(N + 1), 1.0)
    return dec.evaluate(grid.z)


def fourier_split(grid: LogPolarGrid, field, max_mode=None):
    """Fit each angular mode of ``field`` to ``a r^n + b r^-n`` (``a + b log r``
    for n = 0) by least squares over all rings."""
    field = np.asarray(_check_field(grid, field), dtype=float)
    nt = grid.n_theta
    N = nt // 4 if max_mode is None else int(max_mode)
    if N > nt // 4:
        raise GridError(f"max_mode {N} exceeds n_theta/4 = {nt // 4}")
    F = np.fft.fft(field, axis=1) / nt
    # rows are weighted by the ring magnitude so every ring is fitted to
    # relative precision (fields can span many orders of magnitude)
    ring = np.sqrt(np.mean(field**2, axis=1))
    k = max(1, grid.n_s // 20)
    env = maximum_filter1d(ring, 2 * k + 1, mode="nearest")
    wts = 1.0 / np.maximum(env, 1e-300 + 1e-14 * ring.max())
    s = grid.s
    s_in, s_out = s[0], s[-1]
    pos = np.zeros(N, complex)
    neg = np.zeros(N, complex)
    resid = np.zeros(N + 1)
    worst = 1.0
    # mode 0: a + b s with s centered for conditioning
    sc = s - 0.5 * (s_in + s_out)
    A0 = np.column_stack([np.ones_like(s), sc])
    sol, res0, cond0 = _lstsq(A0, F[:, 0].real, wts)
    b0 = sol[1]
    a0 = sol[0] - b0 * 0.5 * (s_in + s_out)
    resid[0] = res0
    worst = max(worst, cond0)
    for n in range(1, N + 1):
        # scaled columns (r/r_out)^n and (r/r_in)^-n peak at 1 on their end ring
        c1 = np.exp(n * (s - s_out))
        c2 = np.exp(-n * (s - s_in))
        A = np.column_stack([c1, c2])
        y = 2.0 * F[:, n]
        sol, res, cond = _lstsq(A, y, wts)
        worst = max(worst, cond)
        resid[n] = res
        pos[n - 1] = sol[0] * np.exp(-n * s_out)
        neg[n - 1] = np.conj(sol[1] * np.exp(n * s_in))
    if worst > MAX_CONDITION:
        raise IllConditionedFit(f"condition number {worst:.3g} exceeds {MAX_CONDITION:.0e}")
    return AnnulusFourierDecomposition(pos, neg, float(b0), float(a0), N, resid, float(worst))


def _lstsq(A, y, wts):
    # conditioning is judged on the scaled (unweighted) design
    cond = float(np.linalg.cond(A))
    Aw = A * wts[:, None]
    yw = y * wts
    cn = np.linalg.norm(Aw, axis=0)
    cn[cn == 0] = 1.0
    sol, *_ = np.linalg.lstsq(Aw / cn, yw, rcond=None)
    sol = sol / cn
    r = yw - Aw @ sol
    scale = np.linalg.norm(yw)
    res = float(np.linalg.norm(r) / scale) if scale > 0 else 0.0
    return sol, res, cond


def _neck_params(grid):
    eta = grid.outer_radius
    delta = grid.inner_radius * eta
    return eta, delta


def _admissible(grid, eta, delta):
    r = grid.r
    keep = (r >= 2 * delta / eta * (1 - 1e-12)) & (r <= eta / 2 * (1 + 1e-12))
    if not np.any(keep):
        raise GridError("no rings in [2 delta/eta, eta/2]")
    return keep


def _negligible(part_energy, decomposition, eta, delta, rel=1e-24):
    # a part at round-off level of the whole field counts as absent (0/0 -> 0)
    return part_energy <= rel * decomposition.annulus_energy(delta / eta, eta)


def pointwise_bound_ratio_plus(grid, decomposition):
    """``sup |grad h+|^2 eta^2 / int_A |grad h+|^2`` over rho in [2 delta/eta, eta/2].

    The 0/0 case returns 0.
    """
    eta, delta = _neck_params(grid)
    keep = _admissible(grid, eta, delta)
    dec = decomposition.plus_part()
    energy = dec.annulus_energy(delta / eta, eta)
    if _negligible(energy, decomposition, eta, delta):
        return 0.0
    g = dec.grad_norm2(grid.z[keep])
    return float(g.max() * eta**2 / energy)


def pointwise_bound_ratio_minus(grid, decomposition):
    """``sup |grad h-|^2 rho^4 eta^2/delta^2 / int_A |grad h-|^2`` over the same window."""
    eta, delta = _neck_params(grid)
    keep = _admissible(grid, eta, delta)
    dec = decomposition.minus_part()
    energy = dec.annulus_energy(delta / eta, eta)
    if _negligible(energy, decomposition, eta, delta):
        return 0.0
    z = grid.z[keep]
    g = dec.grad_norm2(z) * np.abs(z) ** 4 * eta**2 / delta**2
    return float(g.max() / energy)


# --- Whitney-type extension -------------------------------------------------


def whitney_chi(t):
    """C^1 cutoff, 1 on [0, 1] and 0 on [2, inf)."""
    return 1.0 - smoothstep(np.asarray(t, dtype=float) - 1.0)


@dataclass(frozen=True)
class WhitneyExtension:
    plane: LogPolarGrid
    field: np.ndarray
    inner_mean: float
    outer_mean: float
    inner_radius: float
    outer_radius: float
    annulus_rows: slice

    def energy(self, r_lo=0.0, r_hi=np.inf):
        """``int |grad f|^2`` over ``r_lo <= |x| <= r_hi`` (conformal cylinder form)."""
        return _log_energy(self.plane, self.field, r_lo, r_hi)

    def support_violation(self):
        """Max deviation from the constants outside ``B_{2R} \\ B_{r/2}``."""
        r = self.plane.r
        lo = r < self.inner_radius / 2 * (1 - 1e-12)
        hi = r > 2 * self.outer_radius * (1 + 1e-12)
        out = 0.0
        if lo.any():
            out = max(out, float(np.abs(self.field[lo] - self.inner_mean).max()))
        if hi.any():
            out = max(out, float(np.abs(self.field[hi] - self.outer_mean).max()))
        return out


def _log_energy(grid, f, r_lo=0.0, r_hi=np.inf):
    fs = uniform_derivative(f, grid.h, order=4, axis=0)
    ft = theta_derivative(f)
    dens = fs**2 + ft**2
    r = grid.r
    w = np.ones(grid.n_s)
    mask = (r >= r_lo * (1 - 1e-12)) & (r <= r_hi * (1 + 1e-12))
    idx = np.nonzero(mask)[0]
    if idx.size == 0:
        return 0.0
    # trapezoid over the selected rows only
    w = np.zeros(grid.n_s)
    w[idx] = grid.h
    w[idx[0]] *= 0.5
    w[idx[-1]] *= 0.5
    return float(np.sum(w[:, None] * dens) * grid.dtheta)


def _band_mean(grid, f, r_lo, r_hi):
    """Area-weighted mean over ``r_lo <= |x| <= r_hi`` with trapezoid weights in s."""
    mask = (grid.r >= r_lo * (1 - 1e-12)) & (grid.r <= r_hi * (1 + 1e-12))
    idx = np.nonzero(mask)[0]
    w = np.full(idx.size, grid.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    w = w * grid.r[idx] ** 2
    return float(np.sum(w[:, None] * f[idx]) / (w.sum() * grid.n_theta))


def whitney_extend(grid: LogPolarGrid, field, pad=None):
    """Extend an annulus field to a plane log-polar grid.

    Inner collar: cutoff-to-mean on ``B_{2r} \\ B_r`` then reflection through
    ``|x| = r``; outer collar: the same on ``B_R \\ B_{R/2}`` reflected
    through ``|x| = R``.  The extension grid shares the annulus nodes, so
    both reflections map nodes onto nodes.
    """
    field = np.asarray(_check_field(grid, field), dtype=float)
    r, R = grid.inner_radius, grid.outer_radius
    if not R > 2 * r:
        raise GridError("need R > 2r")
    h = grid.h
    k = int(np.ceil(np.log(4.0) / h)) + 2 if pad is None else int(pad)
    n = grid.n_s
    s = np.concatenate([grid.s[0] - h * np.arange(k, 0, -1), grid.s, grid.s[-1] + h * np.arange(1, k + 1)])
    plane = LogPolarGrid(s, grid.n_theta, "cylinder")
    rr = grid.R
    a_in = _band_mean(grid, field, r, 2 * r)
    a_out = _band_mean(grid, field, R / 2, R)
    chi_in = whitney_chi(rr / r)
    chi_out = whitney_chi(R / rr)
    hat = chi_in * field + (1 - chi_in) * a_in
    breve = chi_out * field + (1 - chi_out) * a_out
    out = np.empty(plane.shape)
    out[k:k + n] = field
    for j in range(k):
        # plane row j sits k - j steps below log r; its mirror is row k - j of the annulus
        m = k - j
        out[j] = hat[m] if m < n else a_in
        # mirror of the row m steps above log R
        mo = n - 1 - m
        out[k + n - 1 + m] = breve[mo] if mo >= 0 else a_out
    return WhitneyExtension(plane, out, a_in, a_out, r, R, slice(k, k + n))


def whitney_constants(grid, field, ext=None):
    """Measured constants of the three extension energy bounds."""
    if ext is None:
        ext = whitney_extend(grid, field)
    r, R = grid.inner_radius, grid.outer_radius
    e_ann = _log_energy(grid, field)
    e_in_ref = _log_energy(grid, field, r, 2 * r)
    e_out_ref = _log_energy(grid, field, R / 2, R)
    tot = ext.energy()
    e_in = ext.energy(r / 2, r)
    e_out = ext.energy(R, 2 * R)

    def q(a, b):
        return a / b if b > 1e-300 else (0.0 if a < 1e-20 else np.inf)

    return {"total": q(tot, e_ann), "outer": q(e_out, e_out_ref), "inner": q(e_in, e_in_ref)}
