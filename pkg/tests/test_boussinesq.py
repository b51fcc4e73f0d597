from __future__ import annotations

import math

import numpy as np
import pytest

from hydrolimit import profiles
from hydrolimit.boussinesq import BoussinesqStepper, explicit_tendency, pressure_project
from hydrolimit.errors import BlowUpError, CFLError, ParameterError
from hydrolimit.spectral import Grid, Parity, SpectralField, parity_residual
from hydrolimit.state import PhysicalParams, State, make_state, random_initial_data
from hydrolimit.stepping import IMEXScheme

G = Grid(8, 8, 8)


def field(grid, fn, parity=Parity.NONE):
    x, y, z = grid.mesh()
    return SpectralField.from_physical(grid, fn(x, y, z) * np.ones(grid.shape), parity)


def state(v1=None, v2=None, theta=None, grid=G):
    zero = lambda x, y, z: 0 * x  # noqa: E731
    v = (field(grid, v1 or zero, Parity.EVEN), field(grid, v2 or zero, Parity.EVEN))
    return make_state(v, field(grid, theta or zero, Parity.ODD))


class TestExplicitTendency:
    def test_rest_gives_buoyancy_only(self):
        eps = 0.2
        s = state(theta=lambda x, y, z: np.sin(x) * np.sin(np.pi * z))
        n = explicit_tendency(s, PhysicalParams.scaled(eps))
        assert np.abs(n.v[0].coeffs).max() == 0 and np.abs(n.theta.coeffs).max() == 0
        assert np.allclose(n.w.coeffs, s.theta.coeffs / eps**2)

    def test_theta_without_x_dependence(self):
        s = state(v1=lambda x, y, z: np.sin(y), theta=lambda x, y, z: np.sin(np.pi * z))
        n = explicit_tendency(s, PhysicalParams.scaled(0.5))
        assert np.abs(n.theta.coeffs).max() < 1e-15

    def test_zero_theta(self):
        s = state(v1=lambda x, y, z: np.sin(x) * np.cos(np.pi * z))
        n = explicit_tendency(s, PhysicalParams.scaled(0.5))
        assert np.abs(n.theta.coeffs).max() == 0

    def test_parities(self):
        v, th = random_initial_data(G, 3, amplitude=0.5, max_mode=2)
        n = explicit_tendency(make_state(v, th), PhysicalParams.scaled(0.3))
        for f, p in ((n.v[0], Parity.EVEN), (n.v[1], Parity.EVEN), (n.w, Parity.ODD), (n.theta, Parity.ODD)):
            assert f.parity is p
            assert parity_residual(f) < 1e-13


class TestPressureProject:
    def test_divergence_free_input_unchanged(self):
        n_v = (field(G, lambda x, y, z: np.sin(y)), field(G, lambda x, y, z: np.sin(x)))
        n_w = SpectralField.zeros(G)
        (p1, p2), pw, p = pressure_project(n_v, n_w, 0.5)
        assert np.allclose(p1.coeffs, n_v[0].coeffs) and np.abs(p.coeffs).max() < 1e-16

    def test_single_mode_pressure(self):
        # div N_v = -sin x cos(pi z), so p = sin x cos(pi z) / (1 + pi^2)
        n_v = (field(G, lambda x, y, z: np.cos(x) * np.cos(np.pi * z)), SpectralField.zeros(G))
        _, _, p = pressure_project(n_v, SpectralField.zeros(G), 1.0)
        x, _, z = G.mesh()
        assert np.allclose(p.physical(), np.sin(x) * np.cos(np.pi * z) / (1 + np.pi**2), atol=1e-15)

    def test_buoyancy_only(self):
        eps = 0.3
        th = field(G, lambda x, y, z: np.sin(x) * np.sin(np.pi * z), Parity.ODD)
        zero = SpectralField.zeros(G)
        (n1, n2), nw, p = pressure_project((zero, zero), th / eps**2, eps)
        div = G.ikx * n1.coeffs + G.iky * n2.coeffs + G.ikz * nw.coeffs
        assert np.abs(div).max() < 1e-12
        # mode (1, 0, 1): rhs = i pi theta_hat / eps^2, symbol -(1 + pi^2 / eps^2)
        rhs = 1j * np.pi * th.coeffs[1, 0, 1] / eps**2
        assert p.coeffs[1, 0, 1] == pytest.approx(rhs / -(1 + np.pi**2 / eps**2))

    def test_idempotent(self):
        rng = np.random.default_rng(1)
        n_v = tuple(SpectralField.from_physical(G, rng.standard_normal(G.shape)) for _ in range(2))
        n_w = SpectralField.from_physical(G, rng.standard_normal(G.shape))
        c = n_w.coeffs.copy()
        once = pressure_project(n_v, n_w, 0.4)
        twice = pressure_project(once[0], once[1], 0.4)
        assert np.allclose(twice[1].coeffs, once[1].coeffs, atol=1e-14)
        assert np.array_equal(n_w.coeffs, c)


class TestStep:
    def test_pure_diffusion_is_crank_nicolson(self):
        # a z-only temperature profile never moves the fluid
        eps, dt = 0.3, 0.01
        s = state(theta=lambda x, y, z: np.sin(np.pi * z))
        st = BoussinesqStepper(PhysicalParams.scaled(eps), G, dt)
        # buoyancy of theta(z) is balanced by pressure; v, w stay 0
        new = st.step(s)
        K = np.pi**2
        factor = (1 - dt * K / 2) / (1 + dt * K / 2)
        assert np.allclose(new.theta.coeffs, s.theta.coeffs * factor, atol=1e-15)
        assert np.abs(new.w.coeffs).max() < 1e-15

    def test_velocity_mode_cn(self):
        dt = 0.02
        s = state(v1=lambda x, y, z: np.sin(y), v2=lambda x, y, z: np.sin(x))
        new = BoussinesqStepper(PhysicalParams.scaled(0.5), G, dt).step(s)
        factor = (1 - dt / 2) / (1 + dt / 2)
        # (sin y, sin x) is a steady Euler flow, so only diffusion acts
        assert np.allclose(new.v[0].coeffs, s.v[0].coeffs * factor, atol=1e-15)

    def test_zero_state(self):
        new = BoussinesqStepper(PhysicalParams.scaled(0.1), G, 0.01).step(State.zeros(G))
        assert all(np.abs(f.coeffs).max() == 0 for f in (*new.v, new.w, new.theta))
        assert new.time == pytest.approx(0.01)

    def test_theta_decays(self):
        s = state(theta=lambda x, y, z: np.sin(x) * np.sin(np.pi * z))
        new = BoussinesqStepper(PhysicalParams.scaled(0.2), G, 1e-3).step(s)
        assert new.theta.norm() < s.theta.norm()

    def test_constraints_after_steps(self):
        g = Grid(12, 12, 12)
        v, th = random_initial_data(g, 11, amplitude=0.5)
        st = BoussinesqStepper(PhysicalParams.scaled(0.2), g, 2e-3)
        s = make_state(v, th)
        for _ in range(20):
            s = st.step(s)
            assert s.divergence_residual() <= 1e-10
            assert st.last_parity_drift <= 1e-12
            assert s.boundary_w() <= 1e-10

    def test_cfl_error_suggests_dt(self):
        v, th = profiles.well_prepared(G, amplitude=5.0)
        st = BoussinesqStepper(PhysicalParams.scaled(0.2), G, 0.5)
        with pytest.raises(CFLError) as info:
            st.step(make_state(v, th))
        assert info.value.suggested_dt < 0.5
        assert "try dt" in str(info.value)

    def test_nan_is_blowup(self):
        s = state(v1=lambda x, y, z: np.sin(y))
        bad = State((s.v[0] * math.nan, s.v[1]), s.w, s.theta, 0.0)
        with pytest.raises(BlowUpError):
            BoussinesqStepper(PhysicalParams.scaled(0.2), G, 1e-3).step(bad)

    def test_blowup_threshold(self):
        s = state(v1=lambda x, y, z: 2e6 * np.sin(y))
        st = BoussinesqStepper(PhysicalParams.scaled(0.2), G, 1e-3, IMEXScheme(cfl_limit=math.inf))
        with pytest.raises(BlowUpError) as info:
            st.step(s)
        assert info.value.history

    def test_bad_dt(self):
        with pytest.raises(ParameterError):
            BoussinesqStepper(PhysicalParams.scaled(0.2), G, 0.0)

    def test_unknown_scheme(self):
        with pytest.raises(ParameterError):
            IMEXScheme("rk4")
