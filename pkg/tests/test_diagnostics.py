from __future__ import annotations

import math

import numpy as np
import pytest

from hydrolimit import profiles
from hydrolimit.boussinesq import BoussinesqStepper
from hydrolimit.diagnostics import (
    RECORD_FIELDS,
    DifferenceTracker,
    TrajectoryRecord,
    difference_norms,
    energy_budget,
    grad_norm_sq,
    l2_sq,
    l4_norm,
    ladyzhenskaya_ratio,
    lap_norm_sq,
    norms,
    record_from_csv,
)
from hydrolimit.errors import ParameterError
from hydrolimit.primitive import PrimitiveStepper
from hydrolimit.spectral import Grid, Parity, SpectralField, dealias, derivative
from hydrolimit.state import PhysicalParams, State, make_state, random_initial_data

G = Grid(8, 8, 8)
G16 = Grid(16, 16, 16)


def field(grid, fn, parity=Parity.NONE):
    x, y, z = grid.mesh()
    return SpectralField.from_physical(grid, fn(x, y, z) * np.ones(grid.shape), parity)


def run_record(stepper, s, steps, eps=0.0, every=1):
    rec = TrajectoryRecord(eps=eps, sample_every=every)
    rec.start(s)
    stepper.run(s, steps, rec.observe)
    return rec


class TestNorms:
    def test_l2_sin_pi_z(self):
        assert math.sqrt(l2_sq(field(G, lambda x, y, z: np.sin(np.pi * z)))) == pytest.approx(2 * np.pi, rel=1e-12)

    def test_gradient_and_laplacian(self):
        f = field(G, lambda x, y, z: np.sin(x) * np.sin(np.pi * z))
        base = 2 * np.pi**2  # int sin^2 x sin^2 pi z
        assert grad_norm_sq(f) == pytest.approx((1 + np.pi**2) * base, rel=1e-12)
        assert lap_norm_sq(f) == pytest.approx((1 + np.pi**2) ** 2 * base, rel=1e-12)

    def test_l4_closed_form(self):
        # int sin^4 x over the box = 3 pi / 4 * 2 pi * 2
        f = field(G, lambda x, y, z: np.sin(x))
        assert l4_norm(f) == pytest.approx((3 * np.pi**2) ** 0.25, rel=1e-12)

    def test_l4_matches_fine_quadrature(self):
        v, _ = random_initial_data(G, 4, amplitude=1.0, max_mode=2)
        fine = G.padded(8)
        vals = [fine.inverse(G.pad(f.coeffs, 8)) for f in v]
        quad = (G.volume * np.mean((vals[0] ** 2 + vals[1] ** 2) ** 2)) ** 0.25
        assert l4_norm(*v) == pytest.approx(quad, rel=1e-10)

    def test_gradient_and_laplacian_match_quadrature(self):
        rng = np.random.default_rng(8)
        f = dealias(SpectralField.from_physical(G16, rng.standard_normal(G16.shape)))
        d = [derivative(f, a).physical() for a in "xyz"]
        lap = sum(derivative(derivative(f, a), a).physical() for a in "xyz")
        assert grad_norm_sq(f) == pytest.approx(G16.volume * np.mean(sum(x**2 for x in d)), rel=1e-8)
        assert lap_norm_sq(f) == pytest.approx(G16.volume * np.mean(lap**2), rel=1e-8)

    def test_norms_row(self):
        v, th = profiles.well_prepared(G)
        row = norms(make_state(v, th, time=0.5))
        assert row["t"] == 0.5 and set(row) <= set(RECORD_FIELDS)
        assert row["v_l2"] == pytest.approx(math.sqrt(l2_sq(*v)))

    def test_zero_state(self):
        row = norms(State.zeros(G))
        assert all(row[k] == 0 for k in row)


class TestBudgets:
    @pytest.mark.parametrize("solver", ["boussinesq", "primitive"])
    def test_theta_budget_second_order(self, solver):
        v, th = profiles.well_prepared(G16, amplitude=1.0, theta_amplitude=1.0)
        residuals = []
        for dt in (2e-3, 1e-3):
            if solver == "boussinesq":
                st = BoussinesqStepper(PhysicalParams.scaled(0.2), G16, dt)
            else:
                st = PrimitiveStepper(G16, dt)
            rec = run_record(st, make_state(v, th), round(0.1 / dt))
            residuals.append(np.abs(energy_budget(rec, "theta")).max())
        assert residuals[1] < 1e-5
        assert residuals[0] / residuals[1] >= 3.5

    def test_velocity_slack_nonnegative(self):
        v, th = profiles.well_prepared(G16, amplitude=0.5, theta_amplitude=0.5)
        rec = run_record(PrimitiveStepper(G16, 1e-3), make_state(v, th), 100, every=10)
        assert energy_budget(rec, "v").min() >= -1e-8

    def test_velocity_slack_boussinesq_two_step_sizes(self):
        v, th = profiles.well_prepared(G16, amplitude=0.5, theta_amplitude=0.5)
        for dt in (2e-3, 1e-3):
            st = BoussinesqStepper(PhysicalParams.scaled(0.2), G16, dt)
            rec = run_record(st, make_state(v, th), round(0.1 / dt), eps=0.2, every=5)
            assert energy_budget(rec, "v").min() >= -1e-8

    def test_zero_trajectory(self):
        rec = run_record(PrimitiveStepper(G, 1e-3), State.zeros(G), 10)
        for which in ("theta", "v", "combined_eps"):
            assert np.abs(energy_budget(rec, which)).max() == 0

    def test_combined_budget(self):
        eps = 0.2
        v, th = profiles.well_prepared(G16, amplitude=0.5, theta_amplitude=0.5)
        st = BoussinesqStepper(PhysicalParams.scaled(eps), G16, 1e-3)
        rec = run_record(st, make_state(v, th), 100, eps=eps, every=10)
        assert np.abs(energy_budget(rec, "combined_eps")).max() < 1e-5

    def test_sample_every(self):
        v, th = profiles.well_prepared(G)
        rec = run_record(PrimitiveStepper(G, 1e-3), make_state(v, th), 20, every=5)
        assert np.allclose(rec.column("t"), [0, 0.005, 0.01, 0.015, 0.02])

    def test_non_uniform_sampling_rejected(self):
        rec = TrajectoryRecord()
        rec.samples = [dict.fromkeys(RECORD_FIELDS, 0.0) for _ in range(3)]
        for row, t in zip(rec.samples, (0.0, 0.1, 0.3)):
            row["t"] = t
        with pytest.raises(ParameterError):
            energy_budget(rec, "theta")

    def test_unknown_budget(self):
        rec = TrajectoryRecord()
        rec.start(State.zeros(G))
        with pytest.raises(ParameterError):
            energy_budget(rec, "salt")

    def test_csv_round_trip(self, tmp_path):
        v, th = profiles.well_prepared(G)
        rec = run_record(PrimitiveStepper(G, 1e-3), make_state(v, th), 4, every=2)
        rec.write_csv(tmp_path / "r.csv")
        back = record_from_csv(tmp_path / "r.csv")
        assert back.samples == rec.samples
        assert (tmp_path / "r.csv").read_text().splitlines()[0] == ",".join(RECORD_FIELDS)


class TestDifferenceNorms:
    def test_self_is_zero(self):
        v, th = random_initial_data(G, 1)
        s = make_state(v, th)
        d = difference_norms(s, s, 0.1)
        assert d.l2_sq == 0 and d.h1_sq == 0 and d.lap_sq == 0

    def test_sin_y_perturbation(self):
        delta = 1e-3
        v, th = profiles.well_prepared(G)
        a = make_state(v, th)
        bump = field(G, lambda x, y, z: delta * np.sin(y), Parity.EVEN)
        b = State((a.v[0] + bump, a.v[1]), a.w, a.theta, 0.0)
        d = difference_norms(b, a, 0.1)
        assert d.V_l2_sq == pytest.approx(4 * np.pi**2 * delta**2, rel=1e-12)
        assert d.grad_sq == pytest.approx(4 * np.pi**2 * delta**2, rel=1e-12)

    def test_w_weighted_by_eps(self):
        w = field(G, lambda x, y, z: np.sin(x) * np.sin(np.pi * z), Parity.ODD)
        z = State.zeros(G)
        a = State(z.v, w, z.theta, 0.0)
        for eps in (0.5, 0.1):
            assert difference_norms(a, z, eps).W_l2_sq == pytest.approx(eps**2 * 2 * np.pi**2, rel=1e-12)

    def test_time_mismatch(self):
        with pytest.raises(ParameterError):
            difference_norms(State.zeros(G, 0.0), State.zeros(G, 0.1), 0.1)

    def test_tracker_constant_difference(self):
        bump = field(G, lambda x, y, z: np.sin(y), Parity.EVEN)
        tr = DifferenceTracker(0.1)
        for k in range(11):
            t = 0.1 * k
            z = State.zeros(G, t)
            tr.observe(State((bump, z.v[1]), z.w, z.theta, t), z)
        tr.sample()
        c = 4 * np.pi**2
        assert tr.sup_l2_sq == pytest.approx(c)
        assert tr.int_grad_sq == pytest.approx(c * 1.0)
        assert tr.composite == pytest.approx(2 * math.sqrt(c))
        assert tr.composite_h1 == pytest.approx(math.sqrt(2 * c) + math.sqrt(2 * c))
        assert tr.rows[-1]["t"] == pytest.approx(1.0)


class TestLadyzhenskaya:
    def test_random_is_finite(self):
        rng = np.random.default_rng(0)
        fs = [SpectralField.from_physical(G, rng.standard_normal(G.shape)) for _ in range(3)]
        r = ladyzhenskaya_ratio(*fs)
        assert 0 < r < np.inf

    def test_single_mode(self):
        f = field(G, lambda x, y, z: np.sin(x))
        r = ladyzhenskaya_ratio(f, f, f)
        assert 0 < r < np.inf

    def test_zero_chi(self):
        f = field(G, lambda x, y, z: np.sin(x))
        assert ladyzhenskaya_ratio(f, f, SpectralField.zeros(G)) == 0.0

    def test_scale_invariant(self):
        rng = np.random.default_rng(3)
        fs = [SpectralField.from_physical(G, rng.standard_normal(G.shape)) for _ in range(3)]
        r = ladyzhenskaya_ratio(*fs)
        assert ladyzhenskaya_ratio(fs[0] * 7.0, fs[1] * 0.01, fs[2] * 3.0) == pytest.approx(r, rel=1e-10)

    def test_constant_fields(self):
        # unit constants: lhs = 4 |M| and rhs = |Omega|^(3/2) with |Omega| = 2 |M|
        one = SpectralField.from_physical(G, np.ones(G.shape))
        area = 4 * np.pi**2
        assert ladyzhenskaya_ratio(one, one, one) == pytest.approx(4 * area / (2 * area) ** 1.5, rel=1e-12)
