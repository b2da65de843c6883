"""Weighted geometric series comparisons.

Dyadic convention: ring ``A_l = B_{2^-l} \\ B_{2^-l-1}``; the neck
``A(eta, delta)`` covers ``l`` in ``[s1, s2]`` with
``s1 = floor(log2(1/eta))`` and ``s2 = floor(log2(eta/delta))``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np


class HypothesisViolation(ValueError):
    pass


def case_bounds(gamma, mu):
    """The four case constants of the convolution estimate (gamma < mu < 1)."""
    _check_gm(gamma, mu)
    gm, q = gamma * mu, gamma / mu
    return (
        1 / (1 - gm) + 1 / (1 - q) + gm / (1 - gm),
        1 / (1 - q) + gm / (1 - gm),
        2 / (1 - gm) + 1 / (1 - q),
        1 / (1 - gm) + 1 / (1 - q),
    )


def c_mu_gamma(gamma, mu):
    return float(max(case_bounds(gamma, mu)))


def _check_gm(gamma, mu):
    if not (0 < gamma < mu < 1):
        raise ValueError("need 0 < gamma < mu < 1")


def discrete_convolution_bound(gamma, mu, s1, s2, n, k):
    """``(value, bound)`` with value = sum_{l=s1}^{s2} gamma^|n-l| mu^|l-k|
    and bound = C_{mu,gamma} mu^|n-k|."""
    _check_gm(gamma, mu)
    if s2 < s1:
        raise ValueError("empty window")
    ell = np.arange(s1, s2 + 1)
    value = float(np.sum(gamma ** np.abs(n - ell) * mu ** np.abs(ell - k)))
    bound = c_mu_gamma(gamma, mu) * mu ** abs(n - k)
    if value > bound * (1 + 1e-12):
        raise AssertionError(f"convolution bound violated: {value} > {bound}")
    return value, bound


@dataclass(frozen=True)
class WeightedSeriesInstance:
    """Non-negative sequences on ``0..N-1`` satisfying
    ``a_k <= b_k + eps0 sum_n gamma^|n-k| a_n`` for k in the window."""

    a: np.ndarray
    b: np.ndarray
    gamma: float
    mu: float
    eps0: float
    s1: int
    s2: int

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        b = np.asarray(self.b, dtype=float)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)
        _check_gm(self.gamma, self.mu)
        if a.shape != b.shape or a.ndim != 1:
            raise ValueError("a and b must be 1D of equal length")
        if np.any(a < 0) or np.any(b < 0) or self.eps0 < 0:
            raise ValueError("sequences and eps0 must be non-negative")
        if not (0 <= self.s1 <= self.s2 < a.size):
            raise ValueError("invalid window")
        slack = self.hypothesis_slack()
        if slack.min() < -1e-12 * (1 + a.max()):
            raise HypothesisViolation("a_k <= b_k + eps0 sum gamma^|n-k| a_n fails in the window")

    def hypothesis_slack(self):
        n = np.arange(self.a.size)
        k = np.arange(self.s1, self.s2 + 1)
        conv = (self.gamma ** np.abs(n[None, :] - k[:, None])) @ self.a
        return self.b[k] + self.eps0 * conv - self.a[k]


def series_bound_check(inst: WeightedSeriesInstance, k, constant=None):
    """``(lhs, rhs, C)`` of the comparison at index k; raises if lhs > rhs."""
    if not (inst.s1 <= k <= inst.s2):
        raise ValueError("k outside the window")
    C = c_mu_gamma(inst.gamma, inst.mu) if constant is None else float(constant)
    ell = np.arange(inst.s1, inst.s2 + 1)
    wl = inst.mu ** np.abs(ell - k)
    lhs = float(wl @ inst.a[ell])
    n = np.arange(inst.a.size)
    rhs = float(wl @ inst.b[ell] + C * inst.eps0 * (inst.mu ** np.abs(n - k)) @ inst.a)
    if lhs > rhs * (1 + 1e-12) + 1e-300:
        raise AssertionError(f"series bound violated at k={k}: {lhs} > {rhs}")
    return lhs, rhs, C


def random_instance(rng, n_max=24, max_tries=1000):
    """Rejection-sample an instance satisfying the hypothesis."""
    for _ in range(max_tries):
        N = int(rng.integers(2, n_max + 1))
        gamma = float(rng.uniform(0.05, 0.9))
        mu = float(rng.uniform(gamma, 1.0))
        if not gamma < mu < 1:
            continue
        eps0 = float(rng.uniform(0.0, 0.5))
        a = rng.exponential(1.0, N) * (rng.random(N) < 0.8)
        b = a * rng.uniform(0.0, 1.5, N)
        s1 = int(rng.integers(0, N))
        s2 = int(rng.integers(s1, N))
        try:
            return WeightedSeriesInstance(a, b, gamma, mu, eps0, s1, s2)
        except HypothesisViolation:
            continue
    raise RuntimeError("could not sample a valid instance")


@dataclass(frozen=True)
class SuiteResult:
    checked: int
    violations: int
    worst_slack: float  # min over checks of (rhs - lhs)/max(rhs, tiny)


def randomized_suite(n_instances=1000, seed=0):
    rng = np.random.default_rng(seed)
    checked = violations = 0
    worst = np.inf
    for _ in range(n_instances):
        inst = random_instance(rng)
        for k in range(inst.s1, inst.s2 + 1):
            checked += 1
            try:
                lhs, rhs, _ = series_bound_check(inst, k)
                worst = min(worst, (rhs - lhs) / max(rhs, 1e-300))
            except AssertionError:
                violations += 1
    return SuiteResult(checked, violations, float(worst))


def exhaustive_suite(max_len=8, params=((0.25, 0.5), (0.5, 0.75), (2 / 3, 0.8)), eps_values=(0.1, 0.5)):
    """All 0/1 sequences a on windows of length <= max_len inside ``0..max_len-1``
    with the extremal ``b_k = max(0, a_k - eps0 sum gamma^|n-k| a_n)``."""
    checked = violations = 0
    worst = np.inf
    N = max_len
    n = np.arange(N)
    for gamma, mu in params:
        G = gamma ** np.abs(n[:, None] - n[None, :])
        C = c_mu_gamma(gamma, mu)
        for eps0 in eps_values:
            for bits in itertools.product((0.0, 1.0), repeat=N):
                a = np.array(bits)
                b = np.maximum(0.0, a - eps0 * G @ a)
                for s1 in range(N):
                    for s2 in range(s1, N):
                        inst = WeightedSeriesInstance(a, b, gamma, mu, eps0, s1, s2)
                        for k in range(s1, s2 + 1):
                            checked += 1
                            try:
                                lhs, rhs, _ = series_bound_check(inst, k, C)
                                if rhs > 0:
                                    worst = min(worst, (rhs - lhs) / rhs)
                            except AssertionError:
                                violations += 1
    return SuiteResult(checked, violations, float(worst))


# --- harmonic parts on necks ------------------------------------------------


def dyadic_window(eta, delta):
    """``(s1, s2) = (floor(log2(1/eta)), floor(log2(eta/delta)))``."""
    return int(np.floor(np.log2(1.0 / eta))), int(np.floor(np.log2(eta / delta)))


def part_energies(decomposition, r_in, r_out):
    """Exact ``int |grad h|^2`` over ``B_{r_out} \\ B_{r_in}`` split as (plus, minus, log)."""
    n = np.arange(1, decomposition.max_mode + 1)
    hp = np.abs(decomposition.positive_coeffs) ** 2
    hm = np.abs(decomposition.negative_coeffs) ** 2
    plus = float(np.sum(np.pi * n * hp * (r_out ** (2 * n) - r_in ** (2 * n))))
    minus = float(np.sum(np.pi * n * hm * (r_in ** (-2.0 * n) - r_out ** (-2.0 * n))))
    log = float(2 * np.pi * decomposition.log_coeff**2 * np.log(r_out / r_in))
    return plus, minus, log


def ring_energies(decomposition, ells):
    """Per dyadic ring ``A_l`` energies, shape (len(ells), 3)."""
    ells = np.asarray(ells)
    out = [part_energies(decomposition, 2.0 ** (-ell - 1), 2.0 ** (-ell)) for ell in ells]
    return np.array(out).reshape(-1, 3)


@dataclass(frozen=True)
class SeriesWeightReport:
    j: int
    window: tuple
    beta: float
    lhs: float
    lhs_parts: tuple  # (plus, minus, log)
    plus_term: float
    minus_term: float
    log_term: float
    total_energy: float
    constants: tuple  # measured (C_plus, C_minus)

    @property
    def dominant(self):
        """Which of the three bound terms is largest."""
        terms = (self.plus_term, self.minus_term, self.log_term)
        return ("plus", "minus", "log")[int(np.argmax(terms))]


def harmonic_series_weights(decomposition, eta, delta, mu, j):
    """Weighted dyadic sum of the ring energies of a neck harmonic part and the
    three terms of its bound, with the measured constants of the +/- parts."""
    if not (0.25 < mu < 1):
        raise ValueError("need 1/4 < mu < 1")
    s1, s2 = dyadic_window(eta, delta)
    if not (s1 <= j <= s2):
        raise ValueError(f"j={j} outside the window [{s1}, {s2}]")
    beta = -np.log2(mu)
    ells = np.arange(s1, s2 + 1)
    E = ring_energies(decomposition, ells)
    w = mu ** np.abs(ells - j)
    parts = tuple(float(x) for x in w @ E)
    Ep, Em, E0 = part_energies(decomposition, delta / (2 * eta), 2 * eta)
    total = Ep + Em + E0
    # each bound term carries the energy of its own part on A(2 eta, delta/(2 eta))
    plus_term = (2.0 ** (-j) / eta) ** beta * Ep
    minus_term = (delta / (2.0 ** (-j) * eta)) ** beta * Em
    log_term = decomposition.log_coeff**2
    cp = parts[0] / plus_term if plus_term > 0 else 0.0
    cm = parts[1] / minus_term if minus_term > 0 else 0.0
    return SeriesWeightReport(j, (s1, s2), float(beta), float(sum(parts)), parts,
                              float(plus_term), float(minus_term), float(log_term), float(total), (cp, cm))
