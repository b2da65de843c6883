"""Index-stability ladders and neck diagnostic suites.

A run glues a bubble into a background at each ladder scale, counts the
index and nullity of the second variation against the neck weight, and
compares with the counts of the two limit maps computed against their own
limit weights.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .grid import build_cylinder
from .maps import (
    BubbleFamily,
    GluingError,
    average_length,
    default_family,
    energy,
    glue_bubble,
    hopf_differential,
    neck_energy_profile,
    pointwise_bound_check,
    rational_harmonic_map,
    sphere_conservation_residual,
)
from .spectral import (
    NeckWeight,
    SpectrumError,
    annulus_hardy_eigen,
    assemble_jacobi,
    hardy_exact,
    index_nullity,
    mu_ratio,
    neck_positivity_min,
    omega_eta_infty,
    omega_hat_infty,
    solve_weighted_eigen,
)

VARIANTS = ("hardy", "inner", "outer", "neck")


@dataclass(frozen=True)
class IndexStabilityConfig:
    eta: float = 0.2
    ladder: tuple = (1e-2, 1e-3, 1e-4, 1e-5)
    beta: float = 0.5
    n_theta: int = 16
    h_target: float = 0.05
    count: int = 24
    rel_tol: float = 1e-3  # tau = rel_tol * median |lam_1..lam_20|
    limit_tail: float = 20.0  # cylinder length beyond the neck end for the limit problems
    threads: int = 1
    family: BubbleFamily | None = None

    def make_family(self):
        if self.family is not None:
            return self.family
        return default_family(self.eta, self.ladder, self.n_theta, self.h_target)


@dataclass
class ScaleRow:
    delta: float
    energy: float = float("nan")
    index: int | None = None
    nullity: int | None = None
    tau: float = float("nan")
    gap_ratio: float = float("nan")
    max_residual: float = float("nan")
    neck_lambda0: float = float("nan")
    mu_ratio: float = float("nan")
    average_length: float = float("nan")
    neck_ring_sup: float = float("nan")
    hopf_residual: float = float("nan")
    conservation_residual: float = float("nan")
    dof: int = 0
    method: str = ""
    eigenvalues: list = field(default_factory=list)
    error: str | None = None

    @property
    def ok(self):
        return self.error is None and self.index is not None


@dataclass
class LimitRow:
    name: str
    index: int | None = None
    nullity: int | None = None
    tau: float = float("nan")
    gap_ratio: float = float("nan")
    dof: int = 0
    eigenvalues: list = field(default_factory=list)
    error: str | None = None


@dataclass
class IndexStabilityRun:
    config: IndexStabilityConfig
    rows: list
    limits: list

    @property
    def finest(self):
        return self.rows[-1] if self.rows else None

    def limit_budget(self):
        """``(sum of limit indices, sum of limit index+nullity)``, None if a limit failed."""
        if any(r.index is None for r in self.limits):
            return None
        return sum(r.index for r in self.limits), sum(r.index + r.nullity for r in self.limits)

    def upper_ok(self, row=None):
        """Ind+Null(u_k) <= sum over limits of Ind+Null."""
        row = self.finest if row is None else row
        b = self.limit_budget()
        return bool(row is not None and row.ok and b is not None and row.index + row.nullity <= b[1])

    def lower_ok(self, row=None):
        """sum over limits of Ind <= Ind(u_k)."""
        row = self.finest if row is None else row
        b = self.limit_budget()
        return bool(row is not None and row.ok and b is not None and b[0] <= row.index)

    def table(self):
        cols = ("delta", "energy", "index", "nullity", "tau", "gap_ratio", "neck_lambda0", "mu_ratio",
                "average_length", "neck_ring_sup", "hopf_residual", "conservation_residual", "error")
        out = []
        for r in self.rows:
            d = asdict(r)
            out.append({c: d[c] for c in cols} | {"upper_ok": self.upper_ok(r), "lower_ok": self.lower_ok(r)})
        return out


def _spectrum_counts(form, count, rel_tol):
    rep = solve_weighted_eigen(form, count=count, rel_tol=rel_tol)
    ind, nul = index_nullity(rep)
    return rep, ind, nul


def _scale_row(family: BubbleFamily, k, cfg: IndexStabilityConfig):
    d = family.ladder[k]
    row = ScaleRow(delta=float(d))
    try:
        u = glue_bubble(family, k)
    except GluingError as err:
        row.error = f"gluing failed: {err}"
        return row
    eta = family.eta
    row.energy = energy(u)
    row.hopf_residual = hopf_differential(u).residual
    row.conservation_residual = sphere_conservation_residual(u)
    row.average_length = average_length(u, eta, d)
    row.neck_ring_sup = neck_energy_profile(u, eta, d).sup
    w = NeckWeight(eta, d, cfg.beta, outer="sphere")
    try:
        form = assemble_jacobi(u, weight=w)
        rep, row.index, row.nullity = _spectrum_counts(form, cfg.count, cfg.rel_tol)
    except (SpectrumError, ValueError) as err:
        row.error = f"spectrum failed: {err}"
        return row
    row.tau = rep.zero_tolerance
    row.gap_ratio = rep.gap_ratio()
    row.max_residual = float(rep.residuals.max())
    row.dof = form.dof
    row.method = rep.method
    row.eigenvalues = [float(x) for x in rep.eigenvalues]
    if d < eta**2 * np.exp(-0.5):
        # neck diagnostics need a few rings between delta/eta and eta
        row.neck_lambda0 = neck_positivity_min(u, eta, d, cfg.beta)
        row.mu_ratio = mu_ratio(u.restrict(d / eta, eta), NeckWeight(eta, d, cfg.beta))
    return row


def base_limit_weight(eta, beta):
    """Limit weight on the base sphere: the neck-side branch inside ``B_eta``
    and the round-density-tapered constant outside."""
    def w(r):
        out = omega_eta_infty(r, eta, beta)
        return np.where(r >= eta, out * ((1 + eta**2) / (1 + r**2)) ** 2, out)
    return w


def _limit_row(name, spec, s_min, s_max, weight, cfg: IndexStabilityConfig):
    row = LimitRow(name)
    cyl = build_cylinder(s_min, s_max, cfg.h_target, cfg.n_theta)
    u = rational_harmonic_map(spec, cyl)
    try:
        form = assemble_jacobi(u, weight=weight)
        rep, row.index, row.nullity = _spectrum_counts(form, cfg.count, cfg.rel_tol)
    except (SpectrumError, ValueError) as err:
        row.error = f"spectrum failed: {err}"
        return row
    row.tau = rep.zero_tolerance
    row.gap_ratio = rep.gap_ratio()
    row.dof = form.dof
    row.eigenvalues = [float(x) for x in rep.eigenvalues]
    return row


def limit_rows(family: BubbleFamily, cfg: IndexStabilityConfig):
    """Counts for the background (base chart, weight on the domain sphere)
    and for the bubble (bubble chart, weight transferred to its sphere)."""
    eta, beta, pad, tail = family.eta, cfg.beta, family.pad, cfg.limit_tail
    base = _limit_row("background", family.background, np.log(eta) - tail, pad,
                      base_limit_weight(eta, beta), cfg)
    bub = _limit_row("bubble", family.bubble, -pad, np.log(1 / eta) + tail,
                     lambda r: omega_hat_infty(r, eta, beta), cfg)
    return [base, bub]


def run_index_stability(config: IndexStabilityConfig | None = None):
    cfg = IndexStabilityConfig() if config is None else config
    family = cfg.make_family()
    if len(family.ladder) == 0:
        raise ValueError("ladder must contain at least one scale")
    work = range(len(family.ladder))
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(lambda k: _scale_row(family, k, cfg), work))
    else:
        rows = [_scale_row(family, k, cfg) for k in work]
    return IndexStabilityRun(cfg, rows, limit_rows(family, cfg))


# --- neck suite ----------------------------------------------------------------


@dataclass(frozen=True)
class NeckSuiteConfig:
    etas: tuple = (0.1,)
    deltas: tuple = (np.exp(-4.0) * 0.01, np.exp(-8.0) * 0.01, np.exp(-16.0) * 0.01)
    betas: tuple = (0.5,)
    variants: tuple = VARIANTS
    n_s: int = 512
    glued: bool = False  # also glue the default family and run the Jacobi diagnostics
    n_theta: int = 16
    h_target: float = 0.05


@dataclass
class NeckSuiteReport:
    spectra: list  # dicts: eta, delta, beta, variant, lambda1_analytic, lambda1_numeric, rel_err
    glued: list  # dicts: eta, delta, beta, neck_lambda0, pointwise_sup, neck_energy

    @property
    def empty(self):
        return not self.spectra and not self.glued

    def ratio(self, variant, eta, beta):
        """max/min of lambda1 over the deltas for one (variant, eta, beta)."""
        lam = [r["lambda1_numeric"] for r in self.spectra
               if r["variant"] == variant and r["eta"] == eta and r["beta"] == beta]
        return float(max(lam) / min(lam)) if lam else float("nan")


def run_neck_suite(config: NeckSuiteConfig | None = None):
    cfg = NeckSuiteConfig() if config is None else config
    spectra, glued = [], []
    for eta in cfg.etas:
        for beta in cfg.betas:
            for delta in cfg.deltas:
                if not (0 < delta < eta**2):
                    raise ValueError(f"need 0 < delta < eta^2, got eta={eta}, delta={delta}")
                for v in cfg.variants:
                    lam = annulus_hardy_eigen(eta, delta, v, beta, cfg.n_s)
                    exact = hardy_exact(eta, delta) if v == "hardy" else float("nan")
                    rel = abs(lam - exact) / exact if v == "hardy" else float("nan")
                    spectra.append(dict(eta=float(eta), delta=float(delta), beta=float(beta), variant=v,
                                        lambda1_analytic=exact, lambda1_numeric=lam, rel_err=rel))
                if cfg.glued:
                    fam = default_family(eta, (delta,), cfg.n_theta, cfg.h_target)
                    u = glue_bubble(fam, 0)
                    pb = pointwise_bound_check(u, eta, delta, beta)
                    glued.append(dict(eta=float(eta), delta=float(delta), beta=float(beta),
                                      neck_lambda0=neck_positivity_min(u, eta, delta, beta),
                                      pointwise_sup=pb.sup, neck_energy=pb.neck_energy))
    return NeckSuiteReport(spectra, glued)
