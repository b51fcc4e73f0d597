"""Norms, energy budgets, difference norms and the Ladyzhenskaya ratio probe.

Norm conventions: ||f||_2 is the L2 norm over the box, vector fields use the
Euclidean pointwise modulus, and ||f||_{H1}^2 = ||f||_2^2 + ||grad f||_2^2.

Time integrals of the energy budgets are accumulated per step at the
Crank-Nicolson midpoint state (u^n + u^{n+1}) / 2. For the linear part of the
scheme this reproduces the discrete energy balance exactly, so the budget
residuals measure only the O(dt^2) error of the explicit terms.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ParameterError
from .spectral import Grid, SpectralField, check_same_grid, inner, l2_norm_sq
from .state import State

SAMPLE_FIELDS = (
    "t",
    "v_l2", "theta_l2", "w_l2",
    "v_l4", "theta_l4",
    "dzv_l2", "dztheta_l2",
    "gradv_l2", "gradtheta_l2", "gradw_l2",
    "lapv_l2", "laptheta_l2",
)

BUDGET_FIELDS = ("int_gradtheta_sq", "int_gradu_sq", "int_theta_gradv", "int_theta_w")

RECORD_FIELDS = SAMPLE_FIELDS + BUDGET_FIELDS


# -- single-field norms ---------------------------------------------------------


def _grad_sq(grid: Grid, c: np.ndarray) -> float:
    return float(grid.volume * np.sum(grid.parseval_weights * grid.k2 * np.abs(c) ** 2))


def _dz_sq(grid: Grid, c: np.ndarray) -> float:
    return float(grid.volume * np.sum(grid.parseval_weights * grid.kz**2 * np.abs(c) ** 2))


def _lap_sq(grid: Grid, c: np.ndarray) -> float:
    return float(grid.volume * np.sum(grid.parseval_weights * grid.k2**2 * np.abs(c) ** 2))


def grad_norm_sq(*fields: SpectralField) -> float:
    """||grad f||_2^2 summed over components."""
    return sum(_grad_sq(f.grid, f.coeffs) for f in fields)


def lap_norm_sq(*fields: SpectralField) -> float:
    return sum(_lap_sq(f.grid, f.coeffs) for f in fields)


def l2_sq(*fields: SpectralField) -> float:
    return sum(l2_norm_sq(f.grid, f.coeffs) for f in fields)


def h1_norm_sq(*fields: SpectralField) -> float:
    return l2_sq(*fields) + grad_norm_sq(*fields)


def h2_norm_sq(*fields: SpectralField) -> float:
    return h1_norm_sq(*fields) + lap_norm_sq(*fields)


def l4_norm(*fields: SpectralField) -> float:
    """(int |f|^4)^(1/4) of a scalar or vector field, by quadrature on a 2x padded grid."""
    g = fields[0].grid
    big = g.padded(2)
    modulus_sq = sum(big.inverse(g.pad(f.coeffs)) ** 2 for f in fields)
    return float((g.volume * np.mean(modulus_sq**2)) ** 0.25)


def norms(state: State) -> dict[str, float]:
    """One sample row of the norms tracked along a trajectory."""
    g = state.grid
    v, th = state.v, state.theta
    return {
        "t": state.time,
        "v_l2": math.sqrt(l2_sq(*v)),
        "theta_l2": math.sqrt(l2_sq(th)),
        "w_l2": math.sqrt(l2_sq(state.w)),
        "v_l4": l4_norm(*v),
        "theta_l4": l4_norm(th),
        "dzv_l2": math.sqrt(sum(_dz_sq(g, f.coeffs) for f in v)),
        "dztheta_l2": math.sqrt(_dz_sq(g, th.coeffs)),
        "gradv_l2": math.sqrt(grad_norm_sq(*v)),
        "gradtheta_l2": math.sqrt(grad_norm_sq(th)),
        "gradw_l2": math.sqrt(grad_norm_sq(state.w)),
        "lapv_l2": math.sqrt(lap_norm_sq(*v)),
        "laptheta_l2": math.sqrt(lap_norm_sq(th)),
    }


# -- trajectory record -------------------------------------------------------------


def _midpoint(a: State, b: State) -> State:
    return State(
        ((a.v[0] + b.v[0]) * 0.5, (a.v[1] + b.v[1]) * 0.5),
        (a.w + b.w) * 0.5,
        (a.theta + b.theta) * 0.5,
        0.5 * (a.time + b.time),
    )


@dataclass
class TrajectoryRecord:
    """Sampled norms plus running budget integrals along one run.

    ``eps`` weights w in the kinetic energy (use 0 for primitive runs, where
    the energy is ||v||^2 alone).
    """

    eps: float = 0.0
    sample_every: int = 1
    samples: list[dict[str, float]] = field(default_factory=list)
    _acc: dict[str, float] = field(default_factory=lambda: dict.fromkeys(BUDGET_FIELDS, 0.0))
    _steps: int = 0

    def start(self, state: State) -> None:
        self.samples.clear()
        self._acc = dict.fromkeys(BUDGET_FIELDS, 0.0)
        self._steps = 0
        self._sample(state)

    def observe(self, prev: State, new: State) -> None:
        """Accumulate the step prev -> new; usable as a stepper callback."""
        dt = new.time - prev.time
        mid = _midpoint(prev, new)
        g = mid.grid
        e2 = self.eps**2
        grad_v = grad_norm_sq(*mid.v)
        self._acc["int_gradtheta_sq"] += dt * grad_norm_sq(mid.theta)
        self._acc["int_gradu_sq"] += dt * (grad_v + e2 * grad_norm_sq(mid.w))
        self._acc["int_theta_gradv"] += dt * math.sqrt(l2_sq(mid.theta) * grad_v)
        self._acc["int_theta_w"] += dt * inner(g, mid.theta.coeffs, mid.w.coeffs)
        self._steps += 1
        if self._steps % self.sample_every == 0:
            self._sample(new)

    def _sample(self, state: State) -> None:
        row = norms(state)
        if self.samples and row["t"] <= self.samples[-1]["t"]:
            raise ParameterError("sample times must be strictly increasing")
        row.update(self._acc)
        self.samples.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([s[name] for s in self.samples])

    def write_csv(self, path) -> None:
        write_rows_csv(path, RECORD_FIELDS, self.samples)


def write_rows_csv(path, header: Sequence[str], rows: Iterable[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(header), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(row[k]) for k in header})


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def record_from_csv(path, eps: float = 0.0) -> TrajectoryRecord:
    rec = TrajectoryRecord(eps=eps)
    with open(path, newline="") as fh:
        rec.samples = [{k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)]
    return rec


# -- energy budgets --------------------------------------------------------------------


def _check_uniform(t: np.ndarray) -> None:
    if len(t) < 2:
        return
    dt = np.diff(t)
    if np.any(dt <= 0) or np.ptp(dt) > 1e-9 * max(abs(dt.mean()), 1e-300):
        raise ParameterError("energy budgets need uniformly sampled records")


def energy_budget(record: TrajectoryRecord, which: str) -> np.ndarray:
    """Residual series of an energy balance, one value per sample.

    theta:        ||theta||^2 + 2 int ||grad theta||^2 - ||theta_0||^2          (equality, ~0)
    v:            4 sqrt(2) int ||theta|| ||grad v|| - (KE - KE_0 + 2 int G_u)   (slack, >= 0)
    combined_eps: E/2 + int (G_u + ||grad theta||^2) - E_0/2 - int <theta, w>   (equality, ~0)

    with KE = ||v||^2 + eps^2 ||w||^2, G_u = ||grad v||^2 + eps^2 ||grad w||^2 and
    E = KE + ||theta||^2.
    """
    if not record.samples:
        return np.zeros(0)
    _check_uniform(record.column("t"))
    th2 = record.column("theta_l2") ** 2
    ke = record.column("v_l2") ** 2 + record.eps**2 * record.column("w_l2") ** 2
    i_th = record.column("int_gradtheta_sq")
    i_u = record.column("int_gradu_sq")
    if which == "theta":
        return th2 + 2 * i_th - th2[0]
    if which == "v":
        return 4 * math.sqrt(2) * record.column("int_theta_gradv") - (ke - ke[0] + 2 * i_u)
    if which == "combined_eps":
        e = ke + th2
        return 0.5 * (e - e[0]) + i_u + i_th - record.column("int_theta_w")
    raise ParameterError(f"unknown budget {which!r}; choose theta, v or combined_eps")


# -- difference norms ----------------------------------------------------------------------


@dataclass(frozen=True)
class DifferenceNorms:
    """Squared norms of (V, eps W, Phi) at one instant."""

    t: float
    V_l2_sq: float
    W_l2_sq: float  # already weighted by eps^2
    Phi_l2_sq: float
    grad_sq: float
    lap_sq: float

    @property
    def l2_sq(self) -> float:
        return self.V_l2_sq + self.W_l2_sq + self.Phi_l2_sq

    @property
    def h1_sq(self) -> float:
        return self.l2_sq + self.grad_sq


def difference_norms(bq: State, pe: State, eps: float) -> DifferenceNorms:
    """Norms of (v_eps - v, eps (w_eps - w), theta_eps - theta)."""
    check_same_grid(bq.grid, pe.grid)
    if not math.isclose(bq.time, pe.time, rel_tol=1e-12, abs_tol=1e-12):
        raise ParameterError(f"states at different times: {bq.time} vs {pe.time}")
    V = (bq.v[0] - pe.v[0], bq.v[1] - pe.v[1])
    W = (bq.w - pe.w) * eps
    Phi = bq.theta - pe.theta
    return DifferenceNorms(
        t=bq.time,
        V_l2_sq=l2_sq(*V),
        W_l2_sq=l2_sq(W),
        Phi_l2_sq=l2_sq(Phi),
        grad_sq=grad_norm_sq(*V, W, Phi),
        lap_sq=lap_norm_sq(*V, W, Phi),
    )


DIFFERENCE_FIELDS = (
    "t", "V_l2", "epsW_l2", "Phi_l2", "l2", "grad_l2", "h1",
    "sup_l2_sq", "int_grad_sq", "sup_h1_sq", "int_grad_h1_sq",
)


@dataclass
class DifferenceTracker:
    """Running sup and trapezoid time integrals of the difference norms."""

    eps: float
    sup_l2_sq: float = 0.0
    int_grad_sq: float = 0.0
    sup_h1_sq: float = 0.0
    int_grad_h1_sq: float = 0.0
    rows: list[dict[str, float]] = field(default_factory=list)
    _last: DifferenceNorms | None = None

    def observe(self, bq: State, pe: State) -> DifferenceNorms:
        d = difference_norms(bq, pe, self.eps)
        if self._last is not None:
            dt = d.t - self._last.t
            self.int_grad_sq += 0.5 * dt * (self._last.grad_sq + d.grad_sq)
            self.int_grad_h1_sq += 0.5 * dt * (
                self._last.grad_sq + self._last.lap_sq + d.grad_sq + d.lap_sq
            )
        self.sup_l2_sq = max(self.sup_l2_sq, d.l2_sq)
        self.sup_h1_sq = max(self.sup_h1_sq, d.h1_sq)
        self._last = d
        return d

    def sample(self) -> None:
        d = self._last
        self.rows.append({
            "t": d.t,
            "V_l2": math.sqrt(d.V_l2_sq),
            "epsW_l2": math.sqrt(d.W_l2_sq),
            "Phi_l2": math.sqrt(d.Phi_l2_sq),
            "l2": math.sqrt(d.l2_sq),
            "grad_l2": math.sqrt(d.grad_sq),
            "h1": math.sqrt(d.h1_sq),
            "sup_l2_sq": self.sup_l2_sq,
            "int_grad_sq": self.int_grad_sq,
            "sup_h1_sq": self.sup_h1_sq,
            "int_grad_h1_sq": self.int_grad_h1_sq,
        })

    @property
    def composite(self) -> float:
        """sup_t ||(V, eps W, Phi)||_2 + (int ||grad (V, eps W, Phi)||_2^2 dt)^(1/2)."""
        return math.sqrt(self.sup_l2_sq) + math.sqrt(self.int_grad_sq)

    @property
    def composite_h1(self) -> float:
        return math.sqrt(self.sup_h1_sq) + math.sqrt(self.int_grad_h1_sq)


# -- Ladyzhenskaya-type probe ------------------------------------------------------------


def ladyzhenskaya_ratio(phi: SpectralField, psi: SpectralField, chi: SpectralField) -> float:
    """Empirical ratio lhs / rhs (without C) for

        int_M (int |phi| dz)(int |psi chi| dz) dx dy
            <= ||phi||^(1/2) (||phi||^(1/2) + ||grad_h phi||^(1/2))
               ||psi||^(1/2) (||psi||^(1/2) + ||grad_h psi||^(1/2)) ||chi||.

    Recorded for inspection only.
    """
    g = check_same_grid(phi.grid, psi.grid, chi.grid)
    big = g.padded(2)
    a, b, c = (big.inverse(g.pad(f.coeffs)) for f in (phi, psi, chi))
    column = 2 * g.depth  # int dz = column * mean over z
    lhs = g.horizontal_area * np.mean(column * np.abs(a).mean(axis=2) * column * np.abs(b * c).mean(axis=2))

    def factor(f: SpectralField) -> float:
        n = math.sqrt(l2_sq(f))
        gh = math.sqrt(float(g.volume * np.sum(g.parseval_weights * g.kh2 * np.abs(f.coeffs) ** 2)))
        return math.sqrt(n) * (math.sqrt(n) + math.sqrt(gh))

    rhs = factor(phi) * factor(psi) * math.sqrt(l2_sq(chi))
    if lhs == 0:
        return 0.0
    if rhs == 0:
        raise ParameterError("Ladyzhenskaya ratio: right-hand side vanishes")
    return float(lhs / rhs)
