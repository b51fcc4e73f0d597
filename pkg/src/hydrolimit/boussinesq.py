"""Scaled Boussinesq system on the fixed domain.

    d_t v - Lap v + (v . grad_h) v + w d_z v + grad_h p = 0
    eps^2 (d_t w - Lap w + u . grad w) + d_z p - theta = 0
    d_t theta - Lap theta + u . grad theta = 0
    div_h v + d_z w = 0

The w equation is divided by eps^2, so buoyancy enters the w tendency as
theta / eps^2 and the pressure gradient as eps^-2 d_z p. Taking the divergence
gives the anisotropic Poisson problem solved by :func:`pressure_project`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .advection import Velocity
from .errors import BlowUpError, ParameterError
from .spectral import Grid, Parity, SpectralField, check_same_grid, parity_part
from .state import PhysicalParams, State
from .stepping import CNHeunStepper, Forcing, IMEXScheme


@dataclass(frozen=True, eq=False)
class Tendency:
    v: tuple[SpectralField, SpectralField]
    w: SpectralField
    theta: SpectralField


def explicit_tendency(state: State, params: PhysicalParams) -> Tendency:
    """Advection and buoyancy, before pressure projection (all products dealiased)."""
    g = state.grid
    u = Velocity(g, state.v[0].coeffs, state.v[1].coeffs, state.w.coeffs)
    speed = u.max_speed()
    if not np.isfinite(speed):
        raise BlowUpError(f"non-finite velocity at t={state.time:.6g}", state.time, [(state.time, speed)])
    n_v1 = -u.transport(state.v[0].coeffs)
    n_v2 = -u.transport(state.v[1].coeffs)
    n_w = -u.transport(state.w.coeffs) + state.theta.coeffs / params.eps**2
    n_theta = -u.transport(state.theta.coeffs)
    return Tendency(
        (SpectralField(g, n_v1, Parity.EVEN), SpectralField(g, n_v2, Parity.EVEN)),
        SpectralField(g, n_w, Parity.ODD),
        SpectralField(g, n_theta, Parity.ODD),
    )


def _project_arrays(grid: Grid, n1, n2, nw, eps: float):
    if not eps > 0:
        raise ParameterError(f"aspect ratio must be positive, got {eps}")
    rhs = grid.ikx * n1 + grid.iky * n2 + grid.ikz * nw
    # Same as poisson_aniso away from Nyquist modes; there the derivatives vanish
    # and the symbol must match them for the projection to be exact.
    symbol = (grid.ikx**2 + grid.iky**2 + grid.ikz**2 / eps**2).real
    singular = symbol == 0
    p = rhs / np.where(singular, 1.0, symbol)
    p[np.broadcast_to(singular, p.shape)] = 0.0
    return n1 - grid.ikx * p, n2 - grid.iky * p, nw - grid.ikz * p / eps**2, p


def pressure_project(
    n_v: tuple[SpectralField, SpectralField], n_w: SpectralField, eps: float
) -> tuple[tuple[SpectralField, SpectralField], SpectralField, SpectralField]:
    """Remove the pressure part so that div_h N_v + d_z N_w = 0.

    Solves (Lap_h + eps^-2 d_zz) p = div_h N_v + d_z N_w (zero mean), then returns
    (N_v - grad_h p, N_w - eps^-2 d_z p, p).
    """
    g = check_same_grid(n_v[0].grid, n_v[1].grid, n_w.grid)
    c1, c2, cw, p = _project_arrays(g, n_v[0].coeffs, n_v[1].coeffs, n_w.coeffs, eps)
    return (
        (n_v[0].replace(c1), n_v[1].replace(c2)),
        n_w.replace(cw),
        SpectralField(g, p, Parity.EVEN),
    )


class BoussinesqStepper(CNHeunStepper):
    """Advance (v, w, theta) of the scaled system by one IMEX step.

    ``forcing``, if given, maps t to coefficient arrays (F_v1, F_v2, F_w, F_theta)
    added to the tendencies d_t v, d_t w, d_t theta before projection.
    """

    blowup_hint = ""

    def __init__(self, params: PhysicalParams, grid: Grid, dt: float,
                 scheme: IMEXScheme = IMEXScheme(), forcing: Forcing | None = None):
        self.params = params
        visc = params.viscous_symbol(grid)
        diff = params.diffusive_symbol(grid)
        super().__init__(grid, dt, scheme, [visc, visc, visc, diff], forcing)
        self.last_divergence_drift = 0.0

    def unpack(self, state: State) -> list[np.ndarray]:
        check_same_grid(state.grid, self.grid)
        mask = self.grid.dealias_mask
        return [np.where(mask, f.coeffs, 0.0) for f in (state.v[0], state.v[1], state.w, state.theta)]

    def pack(self, u: list[np.ndarray], time: float) -> State:
        g = self.grid
        return State(
            (SpectralField(g, u[0], Parity.EVEN), SpectralField(g, u[1], Parity.EVEN)),
            SpectralField(g, u[2], Parity.ODD),
            SpectralField(g, u[3], Parity.ODD),
            time,
        )

    def rhs(self, u, t):
        g = self.grid
        eps = self.params.eps
        vel = Velocity(g, u[0], u[1], u[2])
        n1 = -vel.transport(u[0])
        n2 = -vel.transport(u[1])
        nw = -vel.transport(u[2]) + u[3] / eps**2
        nt = -vel.transport(u[3])
        if self.forcing is not None:
            f1, f2, fw, ft = self.forcing(t)
            mask = g.dealias_mask
            n1 = n1 + np.where(mask, f1, 0.0)
            n2 = n2 + np.where(mask, f2, 0.0)
            nw = nw + np.where(mask, fw, 0.0)
            nt = nt + np.where(mask, ft, 0.0)
        n1, n2, nw, _ = _project_arrays(g, n1, n2, nw, eps)
        return [n1, n2, nw, nt], vel.max_speed()

    def finalize(self, u):
        g = self.grid
        parities = (Parity.EVEN, Parity.EVEN, Parity.ODD, Parity.ODD)
        projected = [parity_part(g, x, p) for x, p in zip(u, parities)]
        drift = 0.0
        for x, y in zip(u, projected):
            scale = np.abs(x).max()
            if scale > 0:
                drift = max(drift, float(np.abs(x - y).max() / scale))
        self.last_parity_drift = drift
        # remove round-off divergence with the energy-orthogonal projection
        v1, v2, w, theta = projected
        div = g.ikx * v1 + g.iky * v2 + g.ikz * w
        self.last_divergence_drift = float(np.abs(div).max())
        v1, v2, w, _ = _project_arrays(g, v1, v2, w, self.params.eps)
        return [v1, v2, w, theta]
