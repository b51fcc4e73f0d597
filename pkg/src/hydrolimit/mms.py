"""Manufactured solutions for solver verification.

A manufactured solution prescribes v and theta symbolically; w follows from
w = -int_{-1}^z div_h v. The forcing is the residual of the equations in the
stepper's tendency form, computed with sympy. Pressure is left to the
solvers' projections, which remove any gradient part of the residual.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
import sympy as sp

from .boussinesq import BoussinesqStepper
from .errors import ParameterError
from .primitive import PrimitiveStepper
from .spectral import Grid, Parity, SpectralField
from .state import PhysicalParams, State

x, y, z, t, xi = sp.symbols("x y z t xi", real=True)


@dataclass(frozen=True)
class ManufacturedSolution:
    v1: sp.Expr
    v2: sp.Expr
    theta: sp.Expr

    @property
    def w(self) -> sp.Expr:
        div = sp.diff(self.v1, x) + sp.diff(self.v2, y)
        return sp.simplify(-sp.integrate(div.subs(z, xi), (xi, -1, z)))

    def fields(self) -> tuple[sp.Expr, sp.Expr, sp.Expr, sp.Expr]:
        return self.v1, self.v2, self.w, self.theta

    def exact_state(self, grid: Grid, time: float) -> State:
        parities = (Parity.EVEN, Parity.EVEN, Parity.ODD, Parity.ODD)
        vals = _evaluate(self.fields(), grid, time)
        v1, v2, w, th = (SpectralField(grid, grid.forward(a), p) for a, p in zip(vals, parities))
        return State((v1, v2), w, th, time)

    def boussinesq_forcing(self, params: PhysicalParams) -> tuple[sp.Expr, ...]:
        """(F_v1, F_v2, F_w, F_theta) for the scaled system, w-equation divided by eps^2."""
        eps, mu_h, mu_z = params.eps, params.mu_h, params.mu_z
        k_h, k_z = params.kappa_h, params.kappa_z

        def visc(f):
            return mu_h * (sp.diff(f, x, 2) + sp.diff(f, y, 2)) + mu_z / eps**2 * sp.diff(f, z, 2)

        def diff(f):
            return k_h * (sp.diff(f, x, 2) + sp.diff(f, y, 2)) + k_z / eps**2 * sp.diff(f, z, 2)

        v1, v2, w, th = self.fields()
        adv = _transport(v1, v2, w)
        return (
            sp.diff(v1, t) - visc(v1) + adv(v1),
            sp.diff(v2, t) - visc(v2) + adv(v2),
            sp.diff(w, t) - visc(w) + adv(w) - th / eps**2,
            sp.diff(th, t) - diff(th) + adv(th),
        )

    def primitive_forcing(self) -> tuple[sp.Expr, ...]:
        """(F_v1, F_v2, F_theta) for the primitive system with p_nu = 0."""
        v1, v2, w, th = self.fields()
        adv = _transport(v1, v2, w)
        big_theta = sp.integrate(th.subs(z, xi), (xi, 0, z))
        return (
            sp.diff(v1, t) - _lap(v1) + adv(v1) + sp.diff(big_theta, x),
            sp.diff(v2, t) - _lap(v2) + adv(v2) + sp.diff(big_theta, y),
            sp.diff(th, t) - _lap(th) + adv(th),
        )


def _lap(f: sp.Expr) -> sp.Expr:
    return sp.diff(f, x, 2) + sp.diff(f, y, 2) + sp.diff(f, z, 2)


def _transport(v1, v2, w) -> Callable[[sp.Expr], sp.Expr]:
    return lambda f: v1 * sp.diff(f, x) + v2 * sp.diff(f, y) + w * sp.diff(f, z)


def _evaluate(exprs, grid: Grid, time: float) -> list[np.ndarray]:
    X, Y, Z = grid.mesh()
    out = []
    for e in exprs:
        fn = sp.lambdify((x, y, z, t), e, "numpy")
        out.append(np.broadcast_to(np.asarray(fn(X, Y, Z, time), dtype=float), grid.shape))
    return out


def forcing_function(exprs, grid: Grid) -> Callable[[float], list[np.ndarray]]:
    """Compile forcing expressions into t -> coefficient arrays on ``grid``."""
    X, Y, Z = grid.mesh()
    fns = [sp.lambdify((x, y, z, t), e, "numpy") for e in exprs]

    def forcing(time: float) -> list[np.ndarray]:
        return [grid.forward(np.broadcast_to(np.asarray(f(X, Y, Z, time), dtype=float), grid.shape))
                for f in fns]

    return forcing


def state_error(a: State, b: State) -> float:
    """Relative L2 distance between two states over (v, w, theta)."""
    num = den = 0.0
    for f, g in zip((*a.v, a.w, a.theta), (*b.v, b.w, b.theta)):
        num += (f - g).norm() ** 2
        den += g.norm() ** 2
    if den == 0:
        raise ParameterError("reference state is zero")
    return float(np.sqrt(num / den))


def run_manufactured(solution: ManufacturedSolution, solver: str, grid: Grid, dt: float, n_steps: int,
                     eps: float = 0.5) -> float:
    """Integrate the forced system from the exact data and return the relative error at the end."""
    if solver == "boussinesq":
        params = PhysicalParams.scaled(eps)
        forcing = forcing_function(solution.boussinesq_forcing(params), grid)
        stepper = BoussinesqStepper(params, grid, dt, forcing=forcing)
    elif solver == "primitive":
        forcing = forcing_function(solution.primitive_forcing(), grid)
        stepper = PrimitiveStepper(grid, dt, forcing=forcing)
    else:
        raise ParameterError(f"solver must be boussinesq or primitive, got {solver!r}")
    final = stepper.run(solution.exact_state(grid, 0.0), n_steps)
    return state_error(final, solution.exact_state(grid, final.time))


def steady_smooth(amplitude: float = 0.5) -> ManufacturedSolution:
    """Time-independent, not band-limited in x and y (spectral-accuracy probe)."""
    a = amplitude
    return ManufacturedSolution(
        v1=a * sp.exp(sp.sin(x)) * sp.cos(y) * sp.cos(sp.pi * z),
        v2=a * sp.exp(sp.cos(y)) * sp.sin(x) * sp.cos(sp.pi * z),
        theta=a * sp.exp(sp.sin(x + y)) * sp.sin(sp.pi * z),
    )


def single_mode(amplitude: float = 0.5) -> ManufacturedSolution:
    """One low mode per unknown with time-dependent amplitudes (temporal-order probe)."""
    a = amplitude
    return ManufacturedSolution(
        v1=a * sp.cos(t) * sp.sin(x) * sp.cos(sp.pi * z),
        v2=-a * sp.exp(-t) * sp.sin(y) * sp.cos(sp.pi * z),
        theta=a * (1 + t) * sp.cos(x) * sp.sin(sp.pi * z),
    )
