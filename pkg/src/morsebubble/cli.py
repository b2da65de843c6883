"""Command-line front end.

``morsebubble <subcommand> [--config PATH] [--out DIR] [--threads N] [--seed S]``

Configuration is sectioned key-value text (INI).  Every subcommand writes one
CSV table with a fixed column order and a JSON summary holding the config,
package versions, measured constants, regression comparisons and the
pass/fail state of each check.  The exit code is 0 iff every check passed.
"""
from __future__ import annotations

import argparse
import configparser
import csv
import json
import math
import platform
import sys
import time
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import scipy

SUBCOMMANDS = ("annulus-spectrum", "wente-bench", "lorentz", "harmonic-split", "series-check",
               "index", "index-stability", "neck-suite")

COLUMNS = {
    "annulus-spectrum": ("eta", "delta", "beta", "variant", "lambda1_analytic", "lambda1_numeric", "rel_err"),
    "wente-bench": ("mode", "scale", "weighted_ratio", "standard_ratio", "residual"),
    "lorentz": ("log_ratio", "weak", "weak_closed", "l2", "l2_closed", "l21", "l21_closed", "l21_exact",
                "l21_over_l2"),
    "harmonic-split": ("delta", "trial", "roundtrip_err", "condition", "ratio_plus", "ratio_minus",
                       "whitney_total", "whitney_outer", "whitney_inner", "series_dominant"),
    "series-check": ("suite", "checked", "violations", "worst_slack"),
    "index": ("map", "n_per_chart", "n_theta", "dof", "index", "nullity", "tau", "gap_ratio", "method"),
    "index-stability": ("side", "delta", "energy", "index", "nullity", "tau", "gap_ratio", "neck_lambda0",
                        "mu_ratio", "average_length", "neck_ring_sup", "hopf_residual",
                        "conservation_residual", "upper_ok", "lower_ok", "error"),
    "neck-suite": ("eta", "delta", "beta", "variant", "lambda1_analytic", "lambda1_numeric", "rel_err"),
}

# Empirically pinned constants: name -> (value, relative band).
REGRESSION_CONSTANTS = {
    "hardy_rel_err_max": (3.15e-6, 0.5),
    "wente_identity_numerator": (0.2618, 0.01),
    "lorentz_weak_L4": (1.7766, 0.01),
    "neck_lambda1_eta0.1_delta1e-9": (0.3529, 0.01),
    "series_c_mu_gamma_0.5_0.75": (6.2, 1e-12),
    "identity_nullity": (6.0, 0.0),
    "constant_nullity": (2.0, 0.0),
}


class ConfigError(ValueError):
    """Carries every violation found in a config."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class RunConfig:
    subcommand: str = "annulus-spectrum"
    seed: int = 0
    threads: int = 1
    # grid
    n_s: int = 512
    n_theta: int = 64
    n_r: int = 256
    n_per_chart: int = 128
    h_target: float = 0.05
    # parameters
    eta: float = 0.1
    deltas: tuple = ()
    beta: float = 0.5
    mu: float = 0.75
    gamma: float = 0.5
    eps0: float = 0.1
    tau: float = 0.0  # 0 selects the relative default
    log_ratios: tuple = (4.0, 8.0, 16.0)
    variants: tuple = ("hardy", "inner", "outer", "neck")
    modes: tuple = tuple(range(1, 17))
    scales: tuple = tuple(2.0 ** -k for k in range(2, 8))
    instances: int = 1000
    trials: int = 20
    # maps: "numerator/denominator" coefficient lists, highest degree first
    map: str = "1,0/1"
    background: str = "0/1"
    bubble: str = "1/1,0"
    out: str = "out"

    def to_dict(self):
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = list(v) if isinstance(v, tuple) else v
        return out

    @classmethod
    def for_subcommand(cls, name):
        return cls(subcommand=name, **SUBCOMMAND_DEFAULTS.get(name, {}))

    @classmethod
    def from_dict(cls, d):
        kw = {}
        for f in fields(cls):
            if f.name in d:
                v = d[f.name]
                kw[f.name] = tuple(v) if isinstance(v, list) else v
        return cls(**kw)


# defaults that differ from the RunConfig field defaults
SUBCOMMAND_DEFAULTS = {
    "wente-bench": {"n_theta": 128},
    "index-stability": {"eta": 0.2, "n_theta": 16},
}


def _parse_float(x):
    return float(x)


def _parse_int(x):
    v = float(x)
    if v != int(v):
        raise ValueError("not an integer")
    return int(v)


def _list(conv):
    def parse(x):
        return tuple(conv(p) for p in x.replace(";", ",").split(",") if p.strip())
    return parse


# section -> key -> (parser, description of the allowed range, predicate)
SCHEMA = {
    "run": {
        "subcommand": (str, f"one of {SUBCOMMANDS}", lambda v: v in SUBCOMMANDS),
        "seed": (_parse_int, "[0, 2^64)", lambda v: 0 <= v < 2**64),
        "threads": (_parse_int, ">= 1", lambda v: v >= 1),
    },
    "grid": {
        "n_s": (_parse_int, ">= 8", lambda v: v >= 8),
        "n_theta": (_parse_int, ">= 4", lambda v: v >= 4),
        "n_r": (_parse_int, ">= 16", lambda v: v >= 16),
        "n_per_chart": (_parse_int, ">= 8", lambda v: v >= 8),
        "h_target": (_parse_float, "(0, 1]", lambda v: 0 < v <= 1),
    },
    "params": {
        "eta": (_parse_float, "(0, 1)", lambda v: 0 < v < 1),
        "deltas": (_list(_parse_float), "each in (0, eta^2)", lambda v: all(x > 0 for x in v)),
        "beta": (_parse_float, "(0, 1)", lambda v: 0 < v < 1),
        "mu": (_parse_float, "(1/4, 1)", lambda v: 0.25 < v < 1),
        "gamma": (_parse_float, "(0, 1)", lambda v: 0 < v < 1),
        "eps0": (_parse_float, "[0, inf)", lambda v: v >= 0),
        "tau": (_parse_float, "[0, inf)", lambda v: v >= 0),
        "log_ratios": (_list(_parse_float), "each > 0", lambda v: len(v) > 0 and all(x > 0 for x in v)),
        "variants": (_list(str.strip), "subset of hardy, inner, outer, neck",
                     lambda v: all(x in ("hardy", "inner", "outer", "neck") for x in v)),
        "modes": (_list(_parse_int), "each >= 1", lambda v: len(v) > 0 and all(x >= 1 for x in v)),
        "scales": (_list(_parse_float), "each in (0, 1)", lambda v: len(v) > 0 and all(0 < x < 1 for x in v)),
        "instances": (_parse_int, ">= 1", lambda v: v >= 1),
        "trials": (_parse_int, ">= 1", lambda v: v >= 1),
    },
    "maps": {
        "map": (str.strip, "'num/den' coefficient lists", lambda v: _spec_ok(v)),
        "background": (str.strip, "'num/den' coefficient lists", lambda v: _spec_ok(v)),
        "bubble": (str.strip, "'num/den' coefficient lists", lambda v: _spec_ok(v)),
    },
    "output": {
        "out": (str.strip, "a directory path", lambda v: len(v) > 0),
    },
}


def parse_map_spec(text):
    from .maps import RationalMapSpec

    num, _, den = text.partition("/")
    num = tuple(float(c) for c in num.split(",") if c.strip())
    den = tuple(float(c) for c in den.split(",") if c.strip()) or (1.0,)
    return RationalMapSpec(num, den)


def _spec_ok(text):
    try:
        parse_map_spec(text)
    except (ValueError, TypeError):
        return False
    return True


def parse_config(text, base: RunConfig | None = None):
    """Validated :class:`RunConfig` from sectioned key-value text.

    Raises :class:`ConfigError` listing every violation (unknown sections or
    keys, unparsable values, out-of-range values, duplicate keys).
    """
    cp = configparser.ConfigParser(strict=True, interpolation=None)
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as err:
        raise ConfigError([f"malformed config: {err}"]) from err
    errors = []
    values = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]")
            continue
        for key, raw in cp.items(sec):
            if key not in SCHEMA[sec]:
                errors.append(f"unknown key '{key}' in [{sec}]")
                continue
            conv, rng, ok = SCHEMA[sec][key]
            try:
                v = conv(raw)
            except (ValueError, TypeError):
                errors.append(f"{key}: cannot parse {raw!r}; allowed range {rng}")
                continue
            if not ok(v):
                errors.append(f"{key} = {raw} outside allowed range {rng}")
                continue
            values[key] = v
    cfg = replace(base or RunConfig(), **values)
    errors.extend(_cross_checks(cfg, values))
    if errors:
        raise ConfigError(errors)
    return cfg


def _cross_checks(cfg: RunConfig, given):
    errs = []
    sub = cfg.subcommand
    needs_neck = sub in ("annulus-spectrum", "neck-suite", "harmonic-split", "index-stability")
    if needs_neck:
        lim = cfg.eta**2
        for d in cfg.deltas:
            if not (0 < d < lim or (sub == "index-stability" and d == lim)):
                errs.append(f"deltas: {d} outside allowed range (0, eta^2) = (0, {lim:g})")
        if sub == "index-stability":
            if list(cfg.deltas) != sorted(cfg.deltas, reverse=True):
                errs.append("deltas: ladder must be decreasing")
    if sub == "series-check" and "gamma" in given and "mu" in given and not cfg.gamma < cfg.mu:
        errs.append(f"gamma = {cfg.gamma} must be below mu = {cfg.mu}: allowed range (0, mu)")
    return errs


def format_config(cfg: RunConfig):
    """Inverse of :func:`parse_config`."""
    d = cfg.to_dict()
    lines = []
    for sec, keys in SCHEMA.items():
        lines.append(f"[{sec}]")
        for key in keys:
            v = d[key]
            if isinstance(v, list):
                v = ",".join(x if isinstance(x, str) else repr(x) for x in v)
            lines.append(f"{key} = {v}")
        lines.append("")
    return "\n".join(lines)


# --- emission ---------------------------------------------------------------


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def emit_csv(table, path, columns):
    """Write rows (dicts) with a fixed column order; an empty table gives a header-only file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
        w.writerow(columns)
        for row in table:
            w.writerow([_cell(row.get(c)) for c in columns])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


@dataclass
class RunResult:
    config: RunConfig
    table: list
    checks: dict = field(default_factory=dict)
    constants: dict = field(default_factory=dict)
    elapsed: float = 0.0

    @property
    def passed(self):
        return all(self.checks.values())


def versions():
    from . import __version__

    return {"morsebubble": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "python": platform.python_version()}


def regression_report(constants):
    """Compare measured constants with the pinned table."""
    out = {}
    for name, value in constants.items():
        if name in REGRESSION_CONSTANTS:
            ref, band = REGRESSION_CONSTANTS[name]
            ok = abs(value - ref) <= band * abs(ref) + 1e-15
            out[name] = {"value": value, "reference": ref, "band": band, "ok": bool(ok)}
    return out


def summary_dict(run: RunResult):
    reg = regression_report(run.constants)
    return _jsonable({
        "subcommand": run.config.subcommand,
        "config": run.config.to_dict(),
        "versions": versions(),
        "constants": run.constants,
        "regression": reg,
        "checks": run.checks,
        "passed": run.passed,
        "elapsed_seconds": run.elapsed,
        "columns": list(COLUMNS[run.config.subcommand]),
    })


def emit_summary(run: RunResult, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(summary_dict(run), fh, indent=2, sort_keys=True)
        fh.write("\n")


def config_from_summary(path_or_dict):
    d = path_or_dict
    if not isinstance(d, dict):
        d = json.loads(Path(d).read_text())
    return RunConfig.from_dict(d["config"])


# --- subcommands ------------------------------------------------------------


def _deltas(cfg, default):
    return cfg.deltas if cfg.deltas else default


def run_annulus_spectrum(cfg: RunConfig):
    from .experiments import NeckSuiteConfig, run_neck_suite

    deltas = _deltas(cfg, tuple(cfg.eta**2 * np.exp(-L) for L in cfg.log_ratios))
    rep = run_neck_suite(NeckSuiteConfig((cfg.eta,), deltas, (cfg.beta,), cfg.variants, cfg.n_s))
    hardy = [r for r in rep.spectra if r["variant"] == "hardy"]
    checks = {f"hardy_within_1pct_delta={r['delta']:.6g}": r["rel_err"] < 0.01 for r in hardy}
    const = {}
    if hardy:
        const["hardy_rel_err_max"] = max(r["rel_err"] for r in hardy)
    return rep.spectra, checks, const


def run_neck_suite_cmd(cfg: RunConfig):
    from .experiments import NeckSuiteConfig, run_neck_suite

    deltas = _deltas(cfg, (1e-3, 1e-5, 1e-7, 1e-9))
    rep = run_neck_suite(NeckSuiteConfig((cfg.eta,), deltas, (cfg.beta,), cfg.variants, cfg.n_s))
    checks, const = {}, {}
    if "neck" in cfg.variants and len(deltas) > 1:
        ratio = rep.ratio("neck", cfg.eta, cfg.beta)
        const["neck_lambda1_ratio"] = ratio
        checks["neck_lambda1_ratio<=3"] = ratio <= 3.0
        lam = [r["lambda1_numeric"] for r in rep.spectra if r["variant"] == "neck"]
        const[f"neck_lambda1_eta{cfg.eta:g}_delta{deltas[-1]:g}"] = lam[-1]
    for r in rep.spectra:
        if r["variant"] == "hardy":
            checks[f"hardy_within_1pct_delta={r['delta']:.6g}"] = r["rel_err"] < 0.01
    return rep.spectra, checks, const


def run_wente_bench(cfg: RunConfig):
    from .grid import build_disk
    from .wente import WenteProblem, standard_wente_ratio, wente_sweep_pair, weighted_wente_ratio

    g = build_disk(n_r=cfg.n_r, n_theta=cfg.n_theta)
    prob = WenteProblem.solve(g, g.x, g.y)
    phi_err = float(np.abs(prob.phi - (1 - g.R**2) / 4).max())
    rows = []
    for m in cfg.modes:
        if 2 * m > cfg.n_theta // 2:
            continue
        for eps in cfg.scales:
            a, b = wente_sweep_pair(g, m, eps)
            p = WenteProblem.solve(g, a, b)
            rows.append(dict(mode=m, scale=eps, weighted_ratio=weighted_wente_ratio(g, a, b, p.phi),
                             standard_ratio=standard_wente_ratio(g, a, b, p.phi), residual=p.residual()))
    from .grid import grad_norm2, integrate

    num = integrate(g, g.R**2 * grad_norm2(g, prob.phi, order=6))
    ratios = [r["weighted_ratio"] for r in rows]
    spread = max(ratios) / min(ratios) if ratios else float("nan")
    checks = {"identity_phi_error<1e-6": phi_err < 1e-6}
    if ratios:
        checks["weighted_ratio_spread<=20"] = spread <= 20
    const = {"wente_identity_phi_error": phi_err, "wente_identity_numerator": num, "weighted_ratio_spread": spread}
    return rows, checks, const


def run_lorentz(cfg: RunConfig):
    from .grid import build_radial_annulus
    from .lorentz import log_gradient_closed_forms, log_gradient_exact, lorentz_triple

    rows = []
    for L in cfg.log_ratios:
        g = build_radial_annulus(np.exp(-L), 1.0, cfg.n_s, cfg.n_theta)
        weak, l2, l21 = lorentz_triple(g, 1.0 / g.R)
        cw, c2, c21 = log_gradient_closed_forms(L)
        rows.append(dict(log_ratio=L, weak=weak, weak_closed=cw, l2=l2, l2_closed=c2, l21=l21, l21_closed=c21,
                         l21_exact=log_gradient_exact(L)[2], l21_over_l2=l21 / l2))
    checks = {}
    for r in rows:
        L = r["log_ratio"]
        checks[f"weak_within_2pct_L={L:g}"] = abs(r["weak"] / r["weak_closed"] - 1) <= 0.02
        checks[f"l2_within_1pct_L={L:g}"] = abs(r["l2"] / r["l2_closed"] - 1) <= 0.01
        checks[f"l21_within_3pct_of_exact_L={L:g}"] = abs(r["l21"] / r["l21_exact"] - 1) <= 0.03
    const = {f"lorentz_weak_L{r['log_ratio']:g}": r["weak"] for r in rows}
    return rows, checks, const


def run_harmonic_split(cfg: RunConfig):
    from .grid import build_annulus
    from .harmonic_tools import (fourier_split, pointwise_bound_ratio_minus, pointwise_bound_ratio_plus,
                                 synthesize, whitney_constants, whitney_extend)
    from .series import dyadic_window, harmonic_series_weights

    rng = np.random.default_rng(cfg.seed)
    deltas = _deltas(cfg, tuple(cfg.eta**2 * np.exp(-L) for L in cfg.log_ratios))
    rows = []
    for d in deltas:
        g = build_annulus(cfg.eta, d, cfg.n_s, cfg.n_theta)
        N = min(4, cfg.n_theta // 4)
        r_in, r_out = g.inner_radius, g.outer_radius
        for t in range(cfg.trials):
            n = np.arange(1, N + 1)
            pos = (rng.normal(size=N) + 1j * rng.normal(size=N)) * r_out ** (-n.astype(float))
            neg = (rng.normal(size=N) + 1j * rng.normal(size=N)) * r_in ** n.astype(float)
            f = synthesize(g, rng.normal(), rng.normal(), pos, neg)
            dec = fourier_split(g, f, max_mode=N)
            err = float(np.abs(dec.evaluate(g.z) - f).max() / np.abs(f).max())
            ext = whitney_extend(g, f)
            wc = whitney_constants(g, f, ext)
            s1, s2 = dyadic_window(cfg.eta, d)
            rep = harmonic_series_weights(dec, cfg.eta, d, cfg.mu, (s1 + s2) // 2) if s2 >= s1 else None
            rows.append(dict(delta=d, trial=t, roundtrip_err=err, condition=dec.condition,
                             ratio_plus=pointwise_bound_ratio_plus(g, dec),
                             ratio_minus=pointwise_bound_ratio_minus(g, dec),
                             whitney_total=wc["total"], whitney_outer=wc["outer"], whitney_inner=wc["inner"],
                             series_dominant=rep.dominant if rep else ""))
    worst = max((r["roundtrip_err"] for r in rows), default=0.0)
    checks = {"roundtrip<1e-10": worst < 1e-10}
    return rows, checks, {"roundtrip_err_max": worst}


def run_series_check(cfg: RunConfig):
    from .series import c_mu_gamma, exhaustive_suite, randomized_suite

    rnd = randomized_suite(cfg.instances, cfg.seed)
    exh = exhaustive_suite(8)
    rows = [dict(suite="randomized", **asdict(rnd)), dict(suite="exhaustive", **asdict(exh))]
    checks = {"randomized_zero_violations": rnd.violations == 0, "exhaustive_zero_violations": exh.violations == 0}
    const = {"series_c_mu_gamma_0.5_0.75": c_mu_gamma(0.5, 0.75)}
    if cfg.gamma < cfg.mu:
        const["series_c_mu_gamma_config"] = c_mu_gamma(cfg.gamma, cfg.mu)
    return rows, checks, const


def run_index(cfg: RunConfig):
    from .grid import build_sphere
    from .maps import constant_map, rational_harmonic_map
    from .spectral import assemble_jacobi, index_nullity, solve_weighted_eigen

    s = build_sphere(cfg.n_per_chart, cfg.n_theta)
    spec = parse_map_spec(cfg.map)
    u = constant_map(s) if spec.degree == 0 else rational_harmonic_map(spec, s)
    form = assemble_jacobi(u)
    rep = solve_weighted_eigen(form, count=24, tau=cfg.tau if cfg.tau > 0 else None)
    ind, nul = index_nullity(rep)
    gap = rep.gap_ratio()
    row = dict(map=cfg.map, n_per_chart=cfg.n_per_chart, n_theta=cfg.n_theta, dof=form.dof, index=ind,
               nullity=nul, tau=rep.zero_tolerance, gap_ratio=gap, method=rep.method)
    checks = {"gap_ratio>10": gap > 10}
    const = {}
    if spec.degree == 0:
        const["constant_nullity"] = float(nul)
    elif spec.degree == 1:
        const["identity_nullity"] = float(nul)
    return [row], checks, const


def run_index_stability_cmd(cfg: RunConfig):
    from .experiments import IndexStabilityConfig, run_index_stability
    from .maps import BubbleFamily

    ladder = _deltas(cfg, (1e-2, 1e-3, 1e-4, 1e-5))
    fam = BubbleFamily(parse_map_spec(cfg.background), parse_map_spec(cfg.bubble), cfg.eta, tuple(ladder),
                       n_theta=min(cfg.n_theta, 16), h_target=cfg.h_target)
    run = run_index_stability(IndexStabilityConfig(eta=cfg.eta, ladder=tuple(ladder), beta=cfg.beta,
                                                   n_theta=fam.n_theta, h_target=cfg.h_target,
                                                   threads=cfg.threads, family=fam))
    rows = [dict(side="glued", **r) for r in run.table()]
    for lim in run.limits:
        rows.append(dict(side=lim.name, index=lim.index, nullity=lim.nullity, tau=lim.tau, gap_ratio=lim.gap_ratio,
                         error=lim.error))
    fin = run.finest
    checks = {
        "finest_upper_semicontinuity": run.upper_ok(),
        "finest_lower_semicontinuity": run.lower_ok(),
        "finest_hopf_residual<1e-2": fin.hopf_residual < 1e-2,
        "finest_conservation_residual<1e-2": fin.conservation_residual < 1e-2,
    }
    budget = run.limit_budget()
    const = {"limit_index": budget[0] if budget else float("nan"),
             "limit_index_plus_nullity": budget[1] if budget else float("nan"),
             "finest_energy_over_4pi": fin.energy / (4 * np.pi)}
    return rows, checks, const


RUNNERS = {
    "annulus-spectrum": run_annulus_spectrum,
    "wente-bench": run_wente_bench,
    "lorentz": run_lorentz,
    "harmonic-split": run_harmonic_split,
    "series-check": run_series_check,
    "index": run_index,
    "index-stability": run_index_stability_cmd,
    "neck-suite": run_neck_suite_cmd,
}


def execute(cfg: RunConfig):
    t0 = time.perf_counter()
    table, checks, const = RUNNERS[cfg.subcommand](cfg)
    const = {k: float(v) for k, v in const.items()}
    run = RunResult(cfg, table, {k: bool(v) for k, v in checks.items()}, const)
    for name, entry in regression_report(const).items():
        run.checks[f"regression:{name}"] = entry["ok"]
    run.elapsed = time.perf_counter() - t0
    return run


def build_parser():
    p = argparse.ArgumentParser(prog="morsebubble", description=__doc__.splitlines()[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="sectioned key-value config file")
    p.add_argument("--out", type=Path, help="output directory (overrides [output] out)")
    p.add_argument("--threads", type=int, help="worker threads")
    p.add_argument("--seed", type=int, help="random seed (u64)")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    text = args.config.read_text() if args.config else ""
    try:
        cfg = parse_config(text, RunConfig.for_subcommand(args.subcommand))
        over = {"subcommand": args.subcommand}
        if args.out is not None:
            over["out"] = str(args.out)
        if args.threads is not None:
            over["threads"] = args.threads
        if args.seed is not None:
            over["seed"] = args.seed
        cfg = replace(cfg, **over)
        bad = []
        if cfg.threads < 1:
            bad.append(f"threads = {cfg.threads} outside allowed range >= 1")
        if not 0 <= cfg.seed < 2**64:
            bad.append(f"seed = {cfg.seed} outside allowed range [0, 2^64)")
        bad.extend(_cross_checks(cfg, {}))
        if bad:
            raise ConfigError(bad)
    except ConfigError as err:
        for e in err.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    run = execute(cfg)
    out = Path(cfg.out)
    stem = cfg.subcommand.replace("-", "_")
    emit_csv(run.table, out / f"{stem}.csv", COLUMNS[cfg.subcommand])
    emit_summary(run, out / f"{stem}_summary.json")
    for name, ok in run.checks.items():
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return 0 if run.passed else 1


if __name__ == "__main__":
    sys.exit(main())
