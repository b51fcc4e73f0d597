"""IMEX time stepping shared by both solvers.

Linear diffusion is integrated with Crank-Nicolson; the remaining terms
(advection, buoyancy, pressure, forcing) go through a two-stage Heun
predictor/corrector, giving

    u* = B [A u + dt N(t, u)]
    u' = B [A u + dt/2 (N(t, u) + N(t + dt, u*))],   A = 1 - dt K/2,  B = 1/(1 + dt K/2)

per Fourier mode with diffusion symbol K. For N = 0 this is exactly one
Crank-Nicolson step.
"""

from __future__ import annotations

import logging
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import BlowUpError, CFLError, ParameterError
from .spectral import Grid
from .state import State

log = logging.getLogger(__name__)

Forcing = Callable[[float], Sequence[np.ndarray]]


@dataclass(frozen=True)
class IMEXScheme:
    name: str = "imex-cn-heun"
    cfl_limit: float = 0.5  # math.inf disables the check
    blowup_speed: float = 1e6

    def __post_init__(self):
        if self.name != "imex-cn-heun":
            raise ParameterError(f"unknown scheme {self.name!r}; only 'imex-cn-heun' is available")
        if not self.cfl_limit > 0:
            raise ParameterError("cfl_limit must be positive")


class CNHeunStepper:
    """Base class: subclasses provide the explicit right-hand side and the state packing."""

    #: message appended to blow-up reports
    blowup_hint = ""

    def __init__(self, grid: Grid, dt: float, scheme: IMEXScheme, symbols: Sequence[np.ndarray],
                 forcing: Forcing | None = None):
        if not dt > 0:
            raise ParameterError(f"dt must be positive, got {dt}")
        self.grid = grid
        self.dt = float(dt)
        self.scheme = scheme
        self.forcing = forcing
        self._A = [1.0 - 0.5 * self.dt * K for K in symbols]
        self._B = [1.0 / (1.0 + 0.5 * self.dt * K) for K in symbols]
        self.history: deque[tuple[float, float]] = deque(maxlen=32)
        self.last_cfl = 0.0
        self.last_parity_drift = 0.0

    # subclass interface -------------------------------------------------------

    def unpack(self, state: State) -> list[np.ndarray]:
        raise NotImplementedError

    def pack(self, u: list[np.ndarray], time: float) -> State:
        raise NotImplementedError

    def rhs(self, u: list[np.ndarray], t: float) -> tuple[list[np.ndarray], float]:
        """Projected explicit tendency and the max pointwise speed."""
        raise NotImplementedError

    def finalize(self, u: list[np.ndarray]) -> list[np.ndarray]:
        """Re-impose parity and constraints after a step."""
        return u

    # ---------------------------------------------------------------------------

    def check_speed(self, speed: float, t: float) -> None:
        self.history.append((t, speed))
        if not math.isfinite(speed) or speed > self.scheme.blowup_speed:
            raise BlowUpError(
                f"blow-up at t={t:.6g}: max|u| = {speed:.3e}{self.blowup_hint}", t, list(self.history)
            )
        kmax = self.grid.max_retained_wavenumber
        cfl = speed * self.dt * kmax
        self.last_cfl = cfl
        if cfl > self.scheme.cfl_limit:
            suggested = 0.9 * self.scheme.cfl_limit / (speed * kmax)
            raise CFLError(
                f"CFL number {cfl:.3f} exceeds limit {self.scheme.cfl_limit} at t={t:.6g}; "
                f"try dt <= {suggested:.3e}",
                cfl,
                suggested,
            )

    def advance(self, u: list[np.ndarray], t: float) -> list[np.ndarray]:
        dt = self.dt
        n0, speed = self.rhs(u, t)
        self.check_speed(speed, t)
        base = [a * x for a, x in zip(self._A, u)]
        stage = [b * (x + dt * n) for b, x, n in zip(self._B, base, n0)]
        n1, _ = self.rhs(stage, t + dt)
        new = [b * (x + 0.5 * dt * (p + q)) for b, x, p, q in zip(self._B, base, n0, n1)]
        if not all(np.isfinite(x).all() for x in new):
            raise BlowUpError(f"non-finite values after step at t={t + dt:.6g}{self.blowup_hint}",
                              t + dt, list(self.history))
        return self.finalize(new)

    def step(self, state: State) -> State:
        u = self.advance(self.unpack(state), state.time)
        return self.pack(u, state.time + self.dt)

    def run(self, state: State, n_steps: int, callback: Callable[[State, State], None] | None = None) -> State:
        """Advance ``n_steps``; ``callback(previous, current)`` is called after every step."""
        for _ in range(n_steps):
            new = self.step(state)
            if callback is not None:
                callback(state, new)
            state = new
        return state


def steps_for(horizon: float, dt: float) -> int:
    n = round(horizon / dt)
    if n < 1 or abs(n * dt - horizon) > 1e-9 * max(1.0, horizon):
        raise ParameterError(f"horizon {horizon} is not a whole number of steps of {dt}")
    return int(n)
