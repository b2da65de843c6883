"""Wente-type Dirichlet problems on the unit disk.

``-Delta phi = {a, b}`` is solved mode by mode: an FFT in theta followed by a
tridiagonal finite-volume solve in r.  The same machinery measures the
weighted Wente ratio, builds dyadic decompositions of ``b`` and checks the
dyadic Morrey-decrease inequality.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded

from .grid import DiskGrid, GridError, cutoff, gradient, grad_norm2, integrate


class DegenerateInputError(ValueError):
    pass


# accuracy order of the radial differences used for Jacobians and energies
DIFF_ORDER = 6


def disk_mode_operator(grid: DiskGrid, n, dirichlet=True):
    """Sparse radial operator ``A_n`` with ``A_n Y = V F`` for mode ``n``.

    Rows: center cell, interior rings, boundary ring (identity when
    ``dirichlet``).  For ``n != 0`` the center row is the identity, i.e. the
    regularity condition ``Y(0) = 0``.
    """
    n = abs(int(n))
    m = grid.n_r
    c = grid.flux_coeffs
    lr = grid.inv_r2_volumes
    main = np.zeros(m)
    lower = np.zeros(m - 1)
    upper = np.zeros(m - 1)
    main[1:] += c
    main[:-1] += c
    lower[:] = -c
    upper[:] = -c
    main[1:] += n**2 * lr[1:]
    if n != 0:
        main[0] = 1.0
        upper[0] = 0.0
        lower[0] = 0.0
    if dirichlet:
        main[-1] = 1.0
        lower[-1] = 0.0
    return sp.diags([lower, main, upper], [-1, 0, 1], format="csr")


def _banded(A):
    A = A.tocsr()
    m = A.shape[0]
    ab = np.zeros((3, m))
    ab[1] = A.diagonal()
    ab[0, 1:] = A.diagonal(1)
    ab[2, :-1] = A.diagonal(-1)
    return ab


def solve_dirichlet(grid: DiskGrid, rhs, boundary=None):
    """Solve ``-Delta phi = rhs`` in the disk, ``phi = boundary`` on the rim.

    ``boundary`` is an array of ``n_theta`` rim values (default zero).
    Returns the nodal solution.
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != grid.shape:
        raise GridError("rhs shape does not match grid")
    vol = grid.radial_volumes
    fh = np.fft.rfft(rhs, axis=1)
    gh = np.zeros(fh.shape[1], dtype=complex)
    if boundary is not None:
        gh = np.fft.rfft(np.asarray(boundary, dtype=float))
    out = np.empty_like(fh)
    for j in range(fh.shape[1]):
        A = disk_mode_operator(grid, j, dirichlet=True)
        b = vol * fh[:, j]
        if j != 0:
            b[0] = 0.0
        b[-1] = gh[j]
        ab = _banded(A)
        out[:, j] = solve_banded((1, 1), ab, b.real) + 1j * solve_banded((1, 1), ab, b.imag)
    phi = np.fft.irfft(out, n=grid.n_theta, axis=1)
    return phi


def dense_dirichlet_operator(grid: DiskGrid):
    """The full 2D discrete operator assembled node by node (dense).

    Used as an independent check of the mode-by-mode solver.  Returns
    ``(A, V)`` with ``A phi = V rhs`` on interior unknowns; the center is a
    single unknown and boundary nodes are eliminated.
    """
    nt = grid.n_theta
    nr = grid.n_r
    c = grid.flux_coeffs
    lr = grid.inv_r2_volumes
    dth = grid.dtheta
    # angular stiffness on one ring: int |d_theta f|^2 dtheta via spectral symbol
    k = np.fft.fftfreq(nt, d=1.0 / nt)
    I = np.eye(nt)
    F = np.fft.fft(I, axis=0)
    Kth = (np.conj(F).T @ np.diag(k**2) @ F).real / nt * dth
    n_unk = 1 + (nr - 2) * nt
    A = np.zeros((n_unk, n_unk))
    V = np.zeros(n_unk)

    def idx(i, j):
        return 1 + (i - 1) * nt + j

    V[0] = grid.radial_volumes[0] * 2 * np.pi
    for i in range(1, nr - 1):
        for j in range(nt):
            V[idx(i, j)] = grid.radial_volumes[i] * dth
    # radial fluxes, per unit angle times dth
    for j in range(nt):
        p = idx(1, j)
        A[p, p] += c[0] * dth
        A[p, 0] -= c[0] * dth
        A[0, p] -= c[0] * dth
        A[0, 0] += c[0] * dth
    for i in range(1, nr - 1):
        for j in range(nt):
            p = idx(i, j)
            A[p, p] += c[i] * dth
            if i + 1 <= nr - 2:
                q = idx(i + 1, j)
                A[p, p] += 0.0
                A[p, q] -= c[i] * dth
                A[q, p] -= c[i] * dth
                A[q, q] += c[i] * dth
    for i in range(1, nr - 1):
        sl = slice(idx(i, 0), idx(i, 0) + nt)
        A[sl, sl] += lr[i] * Kth
    return A, V


def dense_solve_dirichlet(grid: DiskGrid, rhs):
    """Brute-force dense solve of the same discrete problem (zero rim data)."""
    A, V = dense_dirichlet_operator(grid)
    rhs = np.asarray(rhs, dtype=float)
    nt = grid.n_theta
    b = np.empty(len(V))
    b[0] = V[0] * rhs[0].mean()
    b[1:] = V[1:] * rhs[1:-1].ravel()
    x = np.linalg.solve(A, b)
    phi = np.zeros(grid.shape)
    phi[0] = x[0]
    phi[1:-1] = x[1:].reshape(grid.n_r - 2, nt)
    return phi


def jacobian_rhs(grid, a, b, order=None):
    """Discrete Jacobian ``d1 a d2 b - d2 a d1 b``.

    High-order radial differences keep the spurious mean of the Jacobian
    (which feeds a global log mode into phi) negligible.
    """
    order = DIFF_ORDER if order is None else order
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape != grid.shape:
        raise GridError("a and b must be sampled on the grid")
    ax, ay = gradient(grid, a, order=order)
    bx, by = gradient(grid, b, order=order)
    return ax * by - ay * bx


def wente_weight(r):
    """``r^2 log^2(1 + 1/r) log(1 + log(1/r))`` with ``f(0) = 0``."""
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    pos = (r > 0) & (r < 1)
    rp = r[pos]
    out[pos] = rp**2 * np.log1p(1.0 / rp) ** 2 * np.log1p(np.log(1.0 / rp))
    return out


@dataclass(frozen=True)
class WenteProblem:
    grid: DiskGrid
    a: np.ndarray
    b: np.ndarray
    rhs: np.ndarray
    phi: np.ndarray

    @classmethod
    def solve(cls, grid, a, b):
        rhs = jacobian_rhs(grid, a, b)
        return cls(grid, np.asarray(a, float), np.asarray(b, float), rhs, solve_dirichlet(grid, rhs))

    def residual(self):
        """L2 norm of ``Delta phi + rhs`` over interior rings."""
        from .grid import laplacian_apply

        res = laplacian_apply(self.grid, self.phi) + self.rhs
        res[-1] = 0.0
        return float(np.sqrt(integrate(self.grid, res**2)))


def weighted_wente_ratio(grid, a, b, phi=None):
    """Empirical constant of the weighted Wente inequality for the pair (a, b)."""
    if phi is None:
        phi = solve_dirichlet(grid, jacobian_rhs(grid, a, b))
    ea = integrate(grid, grad_norm2(grid, a, order=DIFF_ORDER))
    eb = integrate(grid, wente_weight(grid.R) * grad_norm2(grid, b, order=DIFF_ORDER))
    num = integrate(grid, grid.R**2 * grad_norm2(grid, phi, order=DIFF_ORDER))
    rhs_scale = np.sqrt(integrate(grid, jacobian_rhs(grid, a, b) ** 2))
    if ea <= 1e-14 or eb <= 1e-14 or rhs_scale <= 1e-12 * max(1.0, np.sqrt(ea * eb)):
        raise DegenerateInputError("constant input or vanishing Jacobian")
    return float(num / (eb * ea))


def wente_sweep_pair(grid, mode, scale):
    """The (a, b) pair of the uniformity sweep at angular mode and support scale.

    Both are ``chi(r/eps) (r/eps)^m`` times ``cos(m theta)`` resp.
    ``sin(m theta)``, so the pair concentrates at scale ``eps``.
    """
    m = int(mode)
    eps = float(scale)
    R, TH = grid.R, grid.TH
    prof = cutoff(R / eps) * (R / eps) ** m
    return prof * np.cos(m * TH), prof * np.sin(m * TH)


def standard_wente_ratio(grid, a, b, phi=None):
    """``|grad phi|_2^2 / (|grad a|_2^2 |grad b|_2^2)``."""
    if phi is None:
        phi = solve_dirichlet(grid, jacobian_rhs(grid, a, b))
    ea = integrate(grid, grad_norm2(grid, a, order=DIFF_ORDER))
    eb = integrate(grid, grad_norm2(grid, b, order=DIFF_ORDER))
    if ea <= 1e-14 or eb <= 1e-14:
        raise DegenerateInputError("constant input")
    return float(integrate(grid, grad_norm2(grid, phi, order=DIFF_ORDER)) / (ea * eb))


@dataclass
class DyadicPieces:
    """Pieces ``b_0..b_{K-1}`` and the tail ``b^K`` with ``sum = b - const``."""

    grid: DiskGrid
    pieces: list
    tail: np.ndarray
    depth: int
    constants: list = field(default_factory=list)

    def all_pieces(self):
        return list(self.pieces) + [self.tail]

    def reconstruction_error(self, b):
        """Relative L2 error of ``sum grad b_k`` against ``grad b``."""
        g = self.grid
        total = sum(self.all_pieces())
        gx, gy = gradient(g, total)
        bx, by = gradient(g, b)
        err = integrate(g, (gx - bx) ** 2 + (gy - by) ** 2)
        ref = integrate(g, bx**2 + by**2)
        return float(np.sqrt(err / ref)) if ref > 0 else float(np.sqrt(err))

    def support_violation(self, tol=1e-10):
        """Max |grad b_k| outside ``B_{2^-k} \\ B_{2^-k-2}`` over all pieces."""
        g = self.grid
        worst = 0.0
        for k, piece in enumerate(self.pieces):
            outside = ~g.ring_mask(2.0 ** (-k - 2), 2.0 ** (-k) * (1 + 1e-9))
            # first ring inside the support on each side is allowed a stencil
            gn = np.sqrt(grad_norm2(g, piece))
            outside &= ~_stencil_halo(g, 2.0 ** (-k - 2), 2.0 ** (-k))
            if np.any(outside):
                worst = max(worst, float(gn[outside].max()))
        return worst

    def energy_constants(self, b):
        """Per-piece ratio ``int |grad b_k|^2 / int_{A_k u A_{k+1}} |grad b|^2``."""
        g = self.grid
        gb = grad_norm2(g, b)
        out = []
        for k, piece in enumerate(self.pieces):
            ring = g.ring_mask(2.0 ** (-k - 2), 2.0 ** (-k) * (1 + 1e-9))
            den = integrate(g, np.where(ring, gb, 0.0))
            num = integrate(g, grad_norm2(g, piece))
            out.append(float(num / den) if den > 1e-300 else (0.0 if num < 1e-20 else np.inf))
        return out


def _stencil_halo(grid, r_lo, r_hi):
    """Nodes adjacent (one ring) to the radii r_lo and r_hi."""
    r = grid.r
    halo = np.zeros(grid.n_r, dtype=bool)
    for rad in (r_lo, r_hi):
        i = np.searchsorted(r, rad)
        for j in (i - 2, i - 1, i, i + 1):
            if 0 <= j < grid.n_r:
                halo[j] = True
    return np.repeat(halo[:, None], grid.n_theta, 1)


def annulus_mean(grid, c, rho):
    """Mean of ``c`` over ``B_rho \\ B_{rho/2}`` with the grid quadrature."""
    mask = grid.ring_mask(rho / 2.0, rho)
    w = np.where(mask, grid.cell_areas, 0.0)
    if w.sum() <= 0:
        raise GridError(f"no nodes in the ring of radius {rho}")
    return float(np.sum(w * c) / w.sum())


def cutoff_to_mean(grid, c, rho):
    """``T_rho(c) = chi(|x|/rho) (c - mean_{B_rho \\ B_rho/2} c)``."""
    return cutoff(grid.R / rho) * (c - annulus_mean(grid, c, rho))


def max_dyadic_depth(grid):
    return int(np.floor(np.log2(grid.n_r))) - 2


def dyadic_decompose(grid, b, depth=None):
    """Dyadic Jacobian decomposition by iterated cutoff-to-mean operators."""
    b = np.asarray(b, dtype=float)
    kmax = max_dyadic_depth(grid)
    if depth is None:
        depth = kmax
    if depth > kmax or depth < 1:
        raise GridError(f"depth {depth} exceeds resolvable depth {kmax}")
    ring_nodes = np.sum((grid.r >= 2.0 ** (-depth - 1)) & (grid.r < 2.0 ** (-depth)))
    if ring_nodes < 2:
        raise GridError(f"ring A_{depth} is not resolved by the grid")
    levels = [b]
    consts = []
    for k in range(1, depth + 1):
        rho = 2.0 ** (-k)
        consts.append(annulus_mean(grid, levels[-1], rho))
        levels.append(cutoff_to_mean(grid, levels[-1], rho))
    pieces = [levels[k] - levels[k + 1] for k in range(depth)]
    return DyadicPieces(grid, pieces, levels[depth], depth, consts)


def ring_energies(grid, f, depth):
    """``int_{A_k} |grad f|^2`` for k = 0..depth, A_k = B_{2^-k} \\ B_{2^-k-1}."""
    g2 = grad_norm2(grid, f)
    out = []
    for k in range(depth + 1):
        mask = grid.ring_mask(2.0 ** (-k - 1), 2.0 ** (-k) * (1 + 1e-9))
        out.append(float(integrate(grid, np.where(mask, g2, 0.0))))
    return np.array(out)


@dataclass(frozen=True)
class MorreyReport:
    gamma: float
    alpha: float
    phi_ring_energies: np.ndarray
    b_ring_energies: np.ndarray
    a_energy: float
    c_alpha: float
    harmonic_decay: np.ndarray


def morrey_decrease_check(grid, a, b, alpha=1.0, depth=None, phi=None):
    """Dyadic ring energies of phi and the smallest C_alpha for which

    ``E_{k+1} <= gamma^{k+1} E_0 + C_alpha |grad a|^2 sum_n gamma^{|n-k|} B_n``

    holds for k = 0..depth-1, with ``gamma = max(2^-alpha, 2/3)``.
    ``harmonic_decay[k]`` is ``int_{B_{2^-k-1}} |grad phi|^2 / int_{A_k} |grad phi|^2``.
    """
    if not (0 < alpha < 2):
        raise ValueError("alpha must lie in (0, 2)")
    if depth is None:
        depth = max_dyadic_depth(grid)
    if phi is None:
        phi = solve_dirichlet(grid, jacobian_rhs(grid, a, b))
    gamma = max(2.0 ** (-alpha), 2.0 / 3.0)
    E = ring_energies(grid, phi, depth)
    B = ring_energies(grid, b, depth)
    g2 = grad_norm2(grid, phi)
    inner = []
    for k in range(depth):
        ball = integrate(grid, np.where(grid.R < 2.0 ** (-k - 1) * (1 - 1e-12), g2, 0.0))
        inner.append(ball / E[k] if E[k] > 0 else 0.0)
    ea = float(integrate(grid, grad_norm2(grid, a)))
    n = np.arange(depth + 1)
    c_alpha = 0.0
    for k in range(depth):
        excess = E[k + 1] - gamma ** (k + 1) * E[0]
        if excess <= 0:
            continue
        den = ea * np.sum(gamma ** np.abs(n - k) * B)
        c_alpha = max(c_alpha, excess / den if den > 0 else np.inf)
    return MorreyReport(gamma, alpha, E, B, ea, float(c_alpha), np.array(inner))
