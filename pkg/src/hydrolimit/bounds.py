"""Closed-form bound functions alpha_1..alpha_8, beta_1, beta_2.

All of them are nested exponentials in a generic constant C, the time t and
initial-data norms. Squared norms enter as printed: ``n1v = ||v0||_{H1}^2`` etc.
Overflow of the exponential yields ``inf`` rather than an exception.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ParameterError


@dataclass(frozen=True)
class BoundConfig:
    """Generic constant and initial-data norms (not squared)."""

    C: float = 1.0
    v0_h1: float = 0.0
    theta0_h1: float = 0.0
    v0_h2: float = 0.0
    theta0_h2: float = 0.0
    w0_l2: float = 0.0
    v0_l2: float = 0.0
    theta0_l2: float = 0.0

    def __post_init__(self):
        if not self.C > 0:
            raise ParameterError(f"bound constant C must be positive, got {self.C}")
        for name in ("v0_h1", "theta0_h1", "v0_h2", "theta0_h2", "w0_l2", "v0_l2", "theta0_l2"):
            value = getattr(self, name)
            if not value >= 0 or not math.isfinite(value):
                raise ParameterError(f"{name} must be a finite nonnegative number, got {value}")


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def _mul(a: float, b: float) -> float:
    # inf * 0 would give nan; a zero prefactor wins
    if a == 0 or b == 0:
        return 0.0
    return a * b


def _alphas(t: float, cfg: BoundConfig) -> list[float]:
    C = cfg.C
    v1, th1 = cfg.v0_h1**2, cfg.theta0_h1**2
    v2, th2 = cfg.v0_h2**2, cfg.theta0_h2**2
    a1 = (8 * t + 1) * (v1 + th1)
    a2 = _mul((t + 2) * _exp(C * (t + 2) * (a1**2 + a1 + 1)), v1**2 + th1**2 + a1)
    a3 = _mul(C * _exp(C * t * a2**2), v1 + t * a1)
    a4 = _mul(C * _exp(C * t * (1 + a2**2)), th1 + _mul(math.sqrt(a2) + t * a2**2 + 1, a3))
    a5 = _mul(C * _exp(C * (a1**2 + a3**2)), v1 + a1)
    a6 = _mul(C * _exp(C * (a1**2 + a3**2)), th1 + a4**2 + a5**2)
    a7 = _mul(C * (t + 1) * _exp(C * a5**2), v2 + a6)
    a8 = _mul(C * _exp(C * a5**2), th2 + a6**2 + a7**2)
    return [a1, a2, a3, a4, a5, a6, a7, a8]


def _check_t(t: float) -> None:
    if not t >= 0:
        raise ParameterError(f"time must be nonnegative, got {t}")


def alpha(i: int, t: float, cfg: BoundConfig) -> float:
    """alpha_i(t) for i in 1..8."""
    if i not in range(1, 9):
        raise ParameterError(f"alpha index must be in 1..8, got {i}")
    _check_t(t)
    return _alphas(t, cfg)[i - 1]


def beta(which: int, t: float, cfg: BoundConfig, eps: float) -> float:
    """beta_1(t) (basic energy bound) or beta_2(t) (first-order bound)."""
    _check_t(t)
    if not 0 <= eps <= 1:
        raise ParameterError(f"eps must lie in [0, 1], got {eps}")
    C = cfg.C
    a = _alphas(t, cfg)
    a5, a6, a7, a8 = a[4], a[5], a[6], a[7]
    if which == 1:
        data = cfg.v0_l2**2 + eps**2 * cfg.w0_l2**2 + t * cfg.theta0_l2**2
        return _mul(C * _exp(C * (t + a5**2 + a6**2)), a5 + a5**2 + data**2)
    if which == 2:
        return _mul(C * _exp(C * (t + a8**2 + (1 + eps**4) * a7**2)), a7 + a7**2)
    raise ParameterError(f"beta index must be 1 or 2, got {which}")


def bound_table(times, cfg: BoundConfig, eps: float) -> list[dict[str, float]]:
    rows = []
    for t in times:
        _check_t(t)
        row = {"t": float(t)}
        row.update({f"alpha{i}": v for i, v in enumerate(_alphas(t, cfg), start=1)})
        row["beta1"] = beta(1, t, cfg, eps)
        row["beta2"] = beta(2, t, cfg, eps)
        rows.append(row)
    return rows
