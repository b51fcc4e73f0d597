"""Primitive equations with full viscosity and full diffusion.

Pressure is hydrostatic, p = p_nu(x, y) + int_0^z theta, so the momentum
equation becomes

    d_t v - Lap v + (v . grad_h) v + w d_z v + grad_h p_nu + grad_h int_0^z theta = 0,

w is diagnosed from v, and the surface pressure p_nu is whatever keeps the
depth-integrated divergence of v at zero.
"""

from __future__ import annotations

import numpy as np

from .advection import Velocity, dealiased_product
from .errors import ParityError
from .spectral import (
    Grid,
    Parity,
    SpectralField,
    check_same_grid,
    parity_part,
    parity_residual,
    poisson_horizontal,
    vertical_antiderivative,
)
from .state import State, diagnose_w, remove_barotropic_divergence
from .stepping import CNHeunStepper, Forcing, IMEXScheme

PARITY_TOL = 1e-10


def hydrostatic_pressure(theta: SpectralField, p_nu: SpectralField) -> SpectralField:
    """p = p_nu + int_0^z theta; even in z with d_z p = theta and p(z=0) = p_nu."""
    if parity_residual(theta, Parity.ODD) > PARITY_TOL:
        raise ParityError("hydrostatic pressure needs theta odd in z")
    check_same_grid(theta.grid, p_nu.grid)
    return SpectralField(theta.grid, p_nu.coeffs + vertical_antiderivative(theta, 0).coeffs, Parity.EVEN)


def _slab(grid: Grid, c: np.ndarray) -> SpectralField:
    out = np.zeros_like(c)
    out[:, :, 0] = c[:, :, 0]
    return SpectralField(grid, out, Parity.EVEN)


def surface_pressure(v: tuple[SpectralField, SpectralField], theta: SpectralField) -> SpectralField:
    """p_nu from its elliptic problem.

        -Lap_h p_nu = 1/2 int_{-1}^{1} div_h [ div_h (v (x) v) + int_0^z grad_h theta ] dz,

    with zero horizontal mean. The tensor products are dealiased.
    """
    g = check_same_grid(v[0].grid, v[1].grid, theta.grid)
    c1, c2 = v[0].coeffs, v[1].coeffs
    v11 = dealiased_product(g, c1, c1)
    v12 = dealiased_product(g, c1, c2)
    v22 = dealiased_product(g, c2, c2)
    # div_h div_h (v (x) v) = d_xx v1v1 + 2 d_xy v1v2 + d_yy v2v2
    momentum = g.ikx**2 * v11 + 2 * g.ikx * g.iky * v12 + g.iky**2 * v22
    baroclinic = -g.kh2 * vertical_antiderivative(theta, 0).coeffs
    # the m = 0 slab is the vertical mean
    rhs = _slab(g, momentum + baroclinic)
    return poisson_horizontal(rhs)


def _baroclinic_tendency(grid: Grid, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """-grad_h int_0^z theta."""
    big_theta = vertical_antiderivative(SpectralField(grid, theta, Parity.ODD), 0).coeffs
    return -grid.ikx * big_theta, -grid.iky * big_theta


def _barotropic_pressure(grid: Grid, n1: np.ndarray, n2: np.ndarray) -> np.ndarray:
    """p_nu (m = 0 slab only) making the depth-mean of (n - grad_h p_nu) divergence-free."""
    div = grid.ikx[:, :, 0] * n1[:, :, 0] + grid.iky[:, :, 0] * n2[:, :, 0]
    kh2 = -(grid.ikx[:, :, 0] ** 2 + grid.iky[:, :, 0] ** 2).real
    kh2[kh2 == 0] = 1.0
    p = np.zeros_like(n1)
    # Lap_h p_nu = mean_z div_h n  ->  p_nu = -div / kh2
    p[:, :, 0] = -div / kh2
    p[0, 0, 0] = 0.0
    return p


def surface_pressure_projection(v: tuple[SpectralField, SpectralField], theta: SpectralField) -> SpectralField:
    """p_nu obtained by projecting the depth-averaged momentum tendency."""
    g = check_same_grid(v[0].grid, v[1].grid, theta.grid)
    c1, c2 = v[0].coeffs, v[1].coeffs
    w = diagnose_w(v).coeffs
    vel = Velocity(g, c1, c2, w)
    b1, b2 = _baroclinic_tendency(g, theta.coeffs)
    n1 = -vel.transport(c1) + b1
    n2 = -vel.transport(c2) + b2
    return SpectralField(g, _barotropic_pressure(g, n1, n2), Parity.EVEN)


class PrimitiveStepper(CNHeunStepper):
    """Advance (v, theta) of the primitive equations; w is re-diagnosed after every stage.

    ``forcing``, if given, maps t to coefficient arrays (F_v1, F_v2, F_theta).
    """

    blowup_hint = (
        "; the primitive equations with full dissipation have global strong solutions, "
        "so this indicates a numerical fault (reduce dt or check the data)"
    )

    def __init__(self, grid: Grid, dt: float, scheme: IMEXScheme = IMEXScheme(),
                 forcing: Forcing | None = None):
        lap = grid.k2
        super().__init__(grid, dt, scheme, [lap, lap, lap], forcing)

    def unpack(self, state: State) -> list[np.ndarray]:
        check_same_grid(state.grid, self.grid)
        mask = self.grid.dealias_mask
        return [np.where(mask, f.coeffs, 0.0) for f in (state.v[0], state.v[1], state.theta)]

    def _w(self, v1: np.ndarray, v2: np.ndarray) -> np.ndarray:
        g = self.grid
        return diagnose_w((SpectralField(g, v1, Parity.EVEN), SpectralField(g, v2, Parity.EVEN))).coeffs

    def pack(self, u: list[np.ndarray], time: float) -> State:
        g = self.grid
        return State(
            (SpectralField(g, u[0], Parity.EVEN), SpectralField(g, u[1], Parity.EVEN)),
            SpectralField(g, self._w(u[0], u[1]), Parity.ODD),
            SpectralField(g, u[2], Parity.ODD),
            time,
        )

    def rhs(self, u, t):
        g = self.grid
        v1, v2, theta = u
        vel = Velocity(g, v1, v2, self._w(v1, v2))
        b1, b2 = _baroclinic_tendency(g, theta)
        n1 = -vel.transport(v1) + b1
        n2 = -vel.transport(v2) + b2
        nt = -vel.transport(theta)
        if self.forcing is not None:
            f1, f2, ft = self.forcing(t)
            mask = g.dealias_mask
            n1 = n1 + np.where(mask, f1, 0.0)
            n2 = n2 + np.where(mask, f2, 0.0)
            nt = nt + np.where(mask, ft, 0.0)
        p_nu = _barotropic_pressure(g, n1, n2)
        return [n1 - g.ikx * p_nu, n2 - g.iky * p_nu, nt], vel.max_speed()

    def finalize(self, u):
        g = self.grid
        parities = (Parity.EVEN, Parity.EVEN, Parity.ODD)
        projected = [parity_part(g, x, p) for x, p in zip(u, parities)]
        drift = 0.0
        for x, y in zip(u, projected):
            scale = np.abs(x).max()
            if scale > 0:
                drift = max(drift, float(np.abs(x - y).max() / scale))
        self.last_parity_drift = drift
        v = remove_barotropic_divergence(
            (SpectralField(g, projected[0], Parity.EVEN), SpectralField(g, projected[1], Parity.EVEN))
        )
        return [v[0].coeffs, v[1].coeffs, projected[2]]


def surface_pressure_of(state: State) -> SpectralField:
    return surface_pressure(state.v, state.theta)
