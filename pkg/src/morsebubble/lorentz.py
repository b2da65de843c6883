"""L^2, weak-L^2 and L^{2,1} norms of sampled fields.

Distribution functions are taken from the discrete measure (cell areas), so
the norms are exact for the step function the samples define.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import _check_field, integrate


@dataclass(frozen=True)
class RearrangedField:
    """Distinct magnitudes in decreasing order and ``|{|f| >= value}|``."""

    values: np.ndarray
    measure: np.ndarray

    @classmethod
    def from_samples(cls, field, areas):
        f = np.abs(np.asarray(field, dtype=float)).ravel()
        w = np.broadcast_to(np.asarray(areas, dtype=float), np.shape(field)).ravel()
        if f.size == 0:
            return cls(np.zeros(0), np.zeros(0))
        order = np.argsort(-f, kind="stable")
        f, w = f[order], w[order]
        cum = np.cumsum(w)
        # collapse ties: keep the last index of each run of equal values
        last = np.r_[f[1:] != f[:-1], True]
        return cls(f[last], cum[last])

    @classmethod
    def from_grid(cls, grid, field):
        field = _check_field(grid, field)
        return cls.from_samples(field, grid.cell_areas)

    @property
    def total_measure(self):
        return float(self.measure[-1]) if self.measure.size else 0.0

    def distribution(self, lam):
        """``|{|f| > lam}|`` of the step function."""
        idx = np.searchsorted(-self.values, -lam, side="left")
        return float(self.measure[idx - 1]) if idx > 0 else 0.0


def l2_norm(grid, field):
    field = np.abs(_check_field(grid, field))
    return float(np.sqrt(integrate(grid, field**2)))


def l2_weak_quasinorm(grid, field):
    """``sup_lam lam |{|f| > lam}|^{1/2}``; the sup is approached as lam rises to a sample value."""
    rf = RearrangedField.from_grid(grid, field)
    if rf.values.size == 0:
        return 0.0
    return float(np.max(rf.values * np.sqrt(rf.measure)))


def l21_norm(grid, field):
    """``int_0^inf |{|f| > s}|^{1/2} ds`` integrated exactly over the step distribution."""
    rf = RearrangedField.from_grid(grid, field)
    if rf.values.size == 0:
        return 0.0
    steps = rf.values - np.r_[rf.values[1:], 0.0]
    return float(np.sum(steps * np.sqrt(rf.measure)))


def lorentz_triple(grid, field):
    """``(weak, l2, l21)`` norms of one field."""
    return l2_weak_quasinorm(grid, field), l2_norm(grid, field), l21_norm(grid, field)


def log_gradient_closed_forms(log_ratio):
    """Continuum closed forms quoted for ``|grad log|x||`` on an annulus of
    modulus ``log(eta^2/delta) = L``: ``(sqrt(pi), sqrt(2 pi L), sqrt(2 pi) L)``."""
    L = float(log_ratio)
    return np.sqrt(np.pi), np.sqrt(2 * np.pi * L), np.sqrt(2 * np.pi) * L


def log_gradient_exact(log_ratio):
    """Exact norms of ``1/|x|`` on ``B_1 \\ B_{e^-L}``.

    The L^{2,1} integral evaluates to ``sqrt(pi) (L + log 2)`` for large L;
    the formula below is exact for every L > 0.
    """
    L = float(log_ratio)
    d = np.exp(-L)
    weak = np.sqrt(np.pi * (1.0 - d * d))
    l2 = np.sqrt(2 * np.pi * L)
    # int_0^1 sqrt(pi(1-d^2)) ds + int_1^{1/d} sqrt(pi(1/s^2 - d^2)) ds
    u = np.sqrt(1.0 - d * d)
    tail = np.sqrt(np.pi) * (np.log((1.0 + u) / d) - u)
    return weak, l2, float(np.sqrt(np.pi) * u + tail)
