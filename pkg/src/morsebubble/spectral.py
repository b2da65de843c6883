"""Second variation of sphere-valued maps, weighted eigenproblems, and the
weighted annulus eigenvalues.

Tangential variations are written in per-node orthonormal frames of
``T_u S^2`` (two unknowns per node).  The Dirichlet part of the form acts on
the three ambient components, ``int |dw|^2 = sum_c int |d w_c|^2``, so the
frame gauge drops out of the spectrum.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .grid import LogPolarGrid, fitted_symbol
from .maps import SphereMap, cylinder_of

DENSE_LIMIT = 2000


class SpectrumError(RuntimeError):
    pass


# --- weights ---------------------------------------------------------------


@dataclass(frozen=True)
class NeckWeight:
    """Three-branch weight of a degenerating neck ``A(eta, delta)``.

    ``outer`` selects the branch used outside ``B_eta``: ``"flat"`` is the
    constant branch; ``"sphere"`` multiplies it by the round density ratio
    ``rho(x)/rho(eta)`` so that a domain sphere keeps finite total weight.
    """

    eta: float
    delta: float
    beta: float = 0.5
    outer: str = "flat"

    def __post_init__(self):
        if not (0 < self.beta < 1):
            raise ValueError("beta must lie in (0, 1)")
        if not (0 < self.delta <= self.eta**2):
            raise ValueError("need 0 < delta <= eta^2")
        if self.outer not in ("flat", "sphere"):
            raise ValueError("outer must be 'flat' or 'sphere'")

    @property
    def log_modulus(self):
        return float(np.log(self.eta**2 / self.delta))

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        eta, d, b = self.eta, self.delta, self.beta
        L = self.log_modulus
        L2 = 1.0 / L**2 if L > 1e-12 else 0.0
        tail = d**b / eta ** (2 * b)
        out = np.empty_like(r)
        mid = (r >= d / eta) & (r <= eta)
        rm = r[mid]
        out[mid] = ((rm / eta) ** b + (d / (eta * rm)) ** b + L2) / rm**2
        hi = r > eta
        out[hi] = (1.0 + tail + L2) / eta**2
        if self.outer == "sphere":
            out[hi] *= ((1 + eta**2) / (1 + r[hi] ** 2)) ** 2
        lo = r < d / eta
        rl = r[lo]
        out[lo] = (eta**2 / d**2) * ((1 + eta**2) ** 2 / eta**4 / (1 + rl**2 / d**2) ** 2 + tail + L2)
        return out

    def on_grid(self, grid):
        cyl = cylinder_of(grid)
        return self(cyl.R)


def neck_weight(eta, delta, beta=0.5, outer="flat"):
    return NeckWeight(float(eta), float(delta), float(beta), outer)


def omega_eta_infty(r, eta, beta=0.5):
    """Limit weight on the base: ``1/eta^2`` outside ``B_eta``, ``|x|^{beta-2}/eta^beta`` inside."""
    r = np.asarray(r, dtype=float)
    return np.where(r >= eta, 1.0 / eta**2, r ** (beta - 2) / eta**beta)


def omega_hat_infty(r, eta, beta=0.5):
    """Limit weight in the bubble chart: round density for ``|y| <= 1/eta``,
    ``eta^-beta |y|^{-2-beta}`` beyond."""
    r = np.asarray(r, dtype=float)
    inner = (1 + eta**2) ** 2 / eta**2 / (1 + r**2) ** 2
    return np.where(r <= 1.0 / eta, inner, eta**-beta * r ** (-2 - beta))


def sphere_weight(r):
    """Round conformal factor ``4/(1+|x|^2)^2``."""
    r = np.asarray(r, dtype=float)
    return 4.0 / (1.0 + r**2) ** 2


# --- scalar operators on a cylinder -----------------------------------------


def s_weights(cyl: LogPolarGrid):
    w = np.full(cyl.n_s, cyl.h)
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def angular_stiffness(n_theta, h):
    """Dense circulant with symbol ``dtheta * fitted(n)``: the angular energy of one ring."""
    k = np.fft.fftfreq(n_theta, d=1.0 / n_theta)
    sym = fitted_symbol(k, h) * (2 * np.pi / n_theta)
    col = np.fft.ifft(sym).real
    idx = (np.arange(n_theta)[:, None] - np.arange(n_theta)[None, :]) % n_theta
    return col[idx]


def scalar_stiffness(cyl: LogPolarGrid):
    """Sparse form of ``int (f_s^2 + f_theta^2) ds dtheta`` on node values (row-major).

    Per angular mode the 1D operator is ``(1/h)[-1, 2 cosh(nh), -1]`` in the
    interior, which annihilates ``e^{+-ns}``.
    """
    n_s, n_t, h = cyl.n_s, cyl.n_theta, cyl.h
    dth = 2 * np.pi / n_t
    main = np.full(n_s, 2.0 / h)
    main[0] = main[-1] = 1.0 / h
    off = np.full(n_s - 1, -1.0 / h)
    Ks = sp.diags([off, main, off], [-1, 0, 1]) * dth
    C = angular_stiffness(n_t, h)
    Kt = sp.kron(sp.diags(s_weights(cyl)), sp.csr_matrix(C))
    return (sp.kron(Ks, sp.identity(n_t)) + Kt).tocsr()


# --- the Jacobi form --------------------------------------------------------


def tangent_frames(values):
    """Orthonormal ``(e1, e2)`` per node with ``e1, e2 ⟂ u``; shape ``(..., 3, 2)``."""
    u = np.asarray(values, dtype=float)
    a = np.zeros_like(u)
    use_x = np.abs(u[..., 2]) > 0.6
    a[..., 2] = np.where(use_x, 0.0, 1.0)
    a[..., 0] = np.where(use_x, 1.0, 0.0)
    e1 = a - np.sum(a * u, -1, keepdims=True) * u
    e1 /= np.linalg.norm(e1, axis=-1, keepdims=True)
    e2 = np.cross(u, e1)
    return np.stack([e1, e2], axis=-1)


@dataclass
class WeightedQuadraticForm:
    """``Q(w) = int |dw|^2 - V |w|^2`` on tangential w, with mass ``int omega |w|^2``.

    Matrices act on the reduced unknowns (two frame coordinates per free node).
    """

    stiffness: sp.csr_matrix
    potential: np.ndarray  # per reduced DOF: V * (ds dtheta cell)
    weight: np.ndarray  # per reduced DOF: omega |x|^2 * (ds dtheta cell)
    frames: np.ndarray  # (n_s, n_theta, 3, 2)
    free: np.ndarray  # node mask of unknowns
    V: np.ndarray  # |x|^2 |du|^2 per node
    omega: np.ndarray  # weight per node (flat measure)
    grid: LogPolarGrid

    @property
    def dof(self):
        return self.stiffness.shape[0]

    def operator(self):
        return (self.stiffness - sp.diags(self.potential)).tocsr()

    def mass(self):
        return sp.diags(self.weight).tocsr()

    def tangential_projector(self):
        """``P_u = F F^T`` per node."""
        F = self.frames
        return np.einsum("...ia,...ja->...ij", F, F)

    def mu(self):
        """``sup |du|^2 / omega`` over the free nodes."""
        cyl = self.grid
        q = self.V / (self.omega * cyl.R**2)
        return float(np.max(q[self.free])) if np.any(self.free) else 0.0

    def ambient(self, xi):
        """Map reduced coordinates (one column per vector) to R^3 fields."""
        xi = np.asarray(xi)
        cols = xi.reshape(self.dof, -1)
        F = self.frames[self.free]
        w = np.einsum("nca,nak->nck", F, cols.reshape(-1, 2, cols.shape[1]))
        out = np.zeros(self.grid.shape + (3, cols.shape[1]))
        out[self.free] = w
        return out


def _frame_embedding(F):
    """Sparse ``D_c`` (n_nodes x 2 n_nodes) with ``(D_c xi)_i = F_i[c, :] . xi_i``."""
    n = F.shape[0]
    rows = np.repeat(np.arange(n), 2)
    cols = np.arange(2 * n)
    return [sp.csr_matrix((F[:, c, :].ravel(), (rows, cols)), shape=(n, 2 * n)) for c in range(3)]


def assemble_jacobi(u: SphereMap, weight=None, dirichlet=False, potential_scale=None):
    """Assemble the second variation of the energy at ``u``.

    ``weight`` is a callable of |x| (flat-measure density) or an array per
    node; by default the round density ``4/(1+|x|^2)^2``.  ``dirichlet``
    fixes the end rings.  ``potential_scale`` optionally multiplies V per node.
    """
    cyl = cylinder_of(u.grid)
    V = u.energy_density()
    if potential_scale is not None:
        V = V * np.asarray(potential_scale)
    if weight is None:
        omega = sphere_weight(cyl.R)
    elif callable(weight):
        omega = np.asarray(weight(cyl.R), dtype=float)
    else:
        omega = np.broadcast_to(np.asarray(weight, dtype=float), cyl.shape)
    free = np.ones(cyl.shape, dtype=bool)
    if dirichlet:
        free[0] = free[-1] = False
    if np.any(omega[free] <= 0):
        raise ValueError("weight must be positive on the free nodes")
    frames = tangent_frames(u.values)
    K = scalar_stiffness(cyl)
    sel = np.flatnonzero(free.ravel())
    K = K[sel][:, sel]
    F = frames.reshape(-1, 3, 2)[sel]
    Ds = _frame_embedding(F)
    Kred = sum(D.T @ K @ D for D in Ds)
    Kred = (0.5 * (Kred + Kred.T)).tocsr()
    cell = (s_weights(cyl)[:, None] * np.full(cyl.n_theta, cyl.dtheta)[None, :]).ravel()[sel]
    pot = np.repeat(V.ravel()[sel] * cell, 2)
    mass = np.repeat((omega * cyl.R**2).ravel()[sel] * cell, 2)
    return WeightedQuadraticForm(Kred, pot, mass, frames, free, V, np.asarray(omega), cyl)


# --- eigen solves -------------------------------------------------------------


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_tolerance: float
    residuals: np.ndarray
    method: str

    @property
    def index(self):
        return int(np.sum(self.eigenvalues < -self.zero_tolerance))

    @property
    def nullity(self):
        return int(np.sum(np.abs(self.eigenvalues) <= self.zero_tolerance))

    def gap_ratio(self):
        """First eigenvalue above tau, in units of tau."""
        above = self.eigenvalues[self.eigenvalues > self.zero_tolerance]
        return float(above[0] / self.zero_tolerance) if above.size and self.zero_tolerance > 0 else np.inf


def default_tolerance(eigenvalues, rel=1e-3, count=20):
    lam = np.abs(np.asarray(eigenvalues)[:count])
    return float(rel * np.median(lam))


def solve_generalized(A, m, count, shift=None, dense_limit=DENSE_LIMIT):
    """Lowest ``count`` eigenpairs of ``A w = lam diag(m) w``; eigenvectors are m-orthonormal."""
    n = A.shape[0]
    count = min(count, n)
    if n <= dense_limit:
        Ad = A.toarray() if sp.issparse(A) else np.asarray(A)
        isq = 1.0 / np.sqrt(m)
        B = Ad * isq[:, None] * isq[None, :]
        lam, y = sla.eigh(0.5 * (B + B.T), subset_by_index=[0, count - 1])
        return lam, y * isq[:, None], "dense"
    if shift is None:
        raise ValueError("a shift below the spectrum is required for the iterative solver")
    M = sp.diags(m).tocsc()
    try:
        lam, vec = spla.eigsh(A.tocsc(), k=count, M=M, sigma=shift, which="LM", maxiter=5000, tol=1e-12)
    except spla.ArpackNoConvergence as err:
        raise SpectrumError(f"shift-invert iteration did not converge: {err}") from err
    order = np.argsort(lam)
    return lam[order], vec[:, order], "shift-invert"


def solve_weighted_eigen(form: WeightedQuadraticForm, count=20, shift=None, tau=None, rel_tol=1e-3):
    """Lowest eigenpairs of the weighted form; ``tau`` defaults to
    ``rel_tol * median|lam_1..lam_20|``."""
    A = form.operator()
    m = form.weight
    if shift is None:
        mu = form.mu()
        shift = -mu - 1e-2 * (1.0 + mu)
    lam, vec, method = solve_generalized(A, m, count, shift)
    res = np.linalg.norm(A @ vec - (m[:, None] * vec) * lam[None, :], axis=0) / np.linalg.norm(vec, axis=0)
    if tau is None:
        tau = default_tolerance(lam, rel_tol)
    return SpectrumReport(lam, vec, float(tau), res, method)


def index_nullity(report: SpectrumReport, tau=None):
    tau = report.zero_tolerance if tau is None else float(tau)
    lam = report.eigenvalues
    if lam.size and lam[-1] <= tau:
        raise SpectrumError("computed spectrum does not reach past +tau; request more eigenvalues")
    return int(np.sum(lam < -tau)), int(np.sum(np.abs(lam) <= tau))


# --- scalar weighted problems on annuli -------------------------------------------


def radial_weighted_eigen(weight, r_in, r_out, n_s=512, mode=0, count=1):
    """Dirichlet eigenvalues of ``-Delta f = lam omega f`` on ``B_{r_out} \\ B_{r_in}``
    restricted to angular mode ``mode``: ``-Y'' + n^2 Y = lam omega(e^s) e^{2s} Y``."""
    s = np.linspace(np.log(r_in), np.log(r_out), n_s)
    h = s[1] - s[0]
    si = s[1:-1]
    m = np.asarray(weight(np.exp(si)), dtype=float) * np.exp(2 * si) * h
    diag = np.full(si.size, 2.0 * np.cosh(mode * h) / h)
    off = np.full(si.size - 1, -1.0 / h)
    isq = 1.0 / np.sqrt(m)
    d = diag * isq * isq
    e = off * isq[:-1] * isq[1:]
    lam = sla.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1), eigvals_only=True)
    return lam


def hardy_exact(eta, delta):
    """``pi^2 / log^2(eta^2/delta)``."""
    return float(np.pi**2 / np.log(eta**2 / delta) ** 2)


def annulus_weight(variant, eta, delta, beta=0.5):
    if not (0 < delta < eta**2):
        raise ValueError("need 0 < delta < eta^2")
    if variant == "hardy":
        return lambda r: 1.0 / r**2
    if not (0 < beta < 1):
        raise ValueError("beta must lie in (0, 1)")
    if variant == "inner":
        return lambda r: delta**beta / (eta**beta * r ** (2 + beta))
    if variant == "outer":
        return lambda r: r ** (beta - 2) / eta**beta
    if variant == "neck":
        return NeckWeight(eta, delta, beta)
    raise ValueError(f"unknown variant {variant!r}")


def annulus_hardy_eigen(eta, delta, variant="hardy", beta=0.5, n_s=512):
    """First Dirichlet eigenvalue of the weighted problem on ``A(eta, delta)``
    (axisymmetric, which is the lowest mode for radial weights)."""
    w = annulus_weight(variant, eta, delta, beta)
    return float(radial_weighted_eigen(w, delta / eta, eta, n_s=n_s)[0])


# --- neck diagnostics -------------------------------------------------------


def neck_positivity_min(u: SphereMap, eta, delta, beta=0.5, inflate=1.0, count=1):
    """Lowest eigenvalue of the Jacobi form on ``A(eta, delta)`` (Dirichlet)
    against the neck weight."""
    sub = u.restrict(delta / eta, eta)
    w = NeckWeight(eta, delta, beta)
    form = assemble_jacobi(sub, weight=w, dirichlet=True, potential_scale=inflate)
    rep = solve_weighted_eigen(form, count=count, tau=0.0)
    return float(rep.eigenvalues[0])


def mu_ratio(u: SphereMap, weight):
    """``sup |du|^2 / omega`` over the nodes of the map's grid."""
    cyl = cylinder_of(u.grid)
    omega = weight(cyl.R) if callable(weight) else np.asarray(weight)
    return float(np.max(u.energy_density() / (cyl.R**2 * omega)))
