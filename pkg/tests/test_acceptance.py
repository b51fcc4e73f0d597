"""End-to-end acceptance checks, one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v -s``; the full module takes
a few minutes, most of it in the long-horizon run.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from hydrolimit import mms, profiles
from hydrolimit.bounds import BoundConfig, alpha, beta
from hydrolimit.boussinesq import BoussinesqStepper
from hydrolimit.diagnostics import TrajectoryRecord, energy_budget
from hydrolimit.harness import SweepPlan, run_pair, run_sweep
from hydrolimit.primitive import PrimitiveStepper, hydrostatic_pressure, surface_pressure, surface_pressure_projection
from hydrolimit.spectral import Grid, derivative
from hydrolimit.state import PhysicalParams, make_state, random_initial_data, validate_initial_data

from oracles import bound_values

pytestmark = pytest.mark.slow

G32 = Grid(32, 32, 32)
EPS = (0.4, 0.2, 0.1, 0.05)
DT = 1e-3


@pytest.fixture
def verdict(capsys):
    def emit(number: int, name: str, ok: bool, detail: str) -> None:
        with capsys.disabled():
            print(f"\n[{number}] {name}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail

    return emit


def acceptance_plan(epsilons=EPS, horizon=0.5) -> SweepPlan:
    v, th = profiles.well_prepared(G32, amplitude=0.1, theta_amplitude=0.1)
    return SweepPlan(epsilons, G32, DT, horizon, v, th, {"profile": "well_prepared"}, sample_every=10)


def test_rate_of_convergence(verdict):
    plan = acceptance_plan()
    assert validate_initial_data(plan.v0, plan.theta0).ok
    rep = run_sweep(plan)
    fit = rep.fit
    es = ", ".join(f"E({r['eps']:g})={r['E']:.3e}" for r in rep.rows)
    ok = rep.all_ok and rep.monotone and fit is not None and fit.slope >= 0.9 and fit.residual < 0.1
    ok = ok and rep.stability is not None and rep.stability < 0.2
    detail = f"{es}; slope {fit.slope:.3f}, residual {fit.residual:.2e}, slope change {rep.stability:.3f}"
    verdict(1, "O(eps) rate", ok, detail)


def _theta_residual(stepper_factory, dt, v, th, horizon=0.5):
    stepper = stepper_factory(dt)
    s = make_state(v, th)
    rec = TrajectoryRecord(sample_every=10)
    rec.start(s)
    stepper.run(s, round(horizon / dt), rec.observe)
    th2 = rec.column("theta_l2") ** 2
    return float(np.abs(energy_budget(rec, "theta")).max() / th2[0])


def test_theta_energy_identity(verdict):
    v, th = profiles.well_prepared(G32)
    factories = {
        "boussinesq": lambda dt: BoussinesqStepper(PhysicalParams.scaled(0.1), G32, dt),
        "primitive": lambda dt: PrimitiveStepper(G32, dt),
    }
    ok, parts = True, []
    for name, factory in factories.items():
        r1 = _theta_residual(factory, DT, v, th)
        r2 = _theta_residual(factory, DT / 2, v, th)
        ok = ok and r1 <= 1e-5 and r1 / r2 >= 3.5
        parts.append(f"{name}: {r1:.2e} at dt=1e-3, ratio {r1 / r2:.2f}")
    verdict(2, "theta energy identity", ok, "; ".join(parts))


@pytest.fixture(scope="module")
def constraint_runs():
    v, th = random_initial_data(G32, seed=7, amplitude=0.5)
    s0 = make_state(v, th)
    out = {}
    for name, stepper in (
        ("boussinesq", BoussinesqStepper(PhysicalParams.scaled(0.1), G32, DT)),
        ("primitive", PrimitiveStepper(G32, DT)),
    ):
        worst = dict.fromkeys(("divergence", "parity", "boundary_w", "barotropic", "hydrostatic"), 0.0)
        s = s0
        for i in range(1, 501):
            s = stepper.step(s)
            worst["divergence"] = max(worst["divergence"], s.divergence_residual())
            worst["parity"] = max(worst["parity"], stepper.last_parity_drift)
            worst["boundary_w"] = max(worst["boundary_w"], s.boundary_w())
            worst["barotropic"] = max(worst["barotropic"], s.barotropic_residual())
            if name == "primitive" and i % 10 == 0:
                p = hydrostatic_pressure(s.theta, surface_pressure(s.v, s.theta))
                residual = (derivative(p, "z") - s.theta).physical()
                worst["hydrostatic"] = max(worst["hydrostatic"], float(np.abs(residual).max()))
        out[name] = worst
    return out


def test_constraint_preservation(verdict, constraint_runs):
    limits = {"divergence": 1e-10, "parity": 1e-12, "boundary_w": 1e-10, "barotropic": 1e-10}
    ok = all(w[k] <= lim for w in constraint_runs.values() for k, lim in limits.items())
    detail = "; ".join(
        f"{name}: " + ", ".join(f"{k} {w[k]:.1e}" for k in limits) for name, w in constraint_runs.items()
    )
    verdict(3, "constraints over 500 steps", ok, detail)


def test_hydrostatic_balance(verdict, constraint_runs):
    worst = constraint_runs["primitive"]["hydrostatic"]
    verdict(4, "hydrostatic balance", worst <= 1e-12, f"max |d_z p - theta| = {worst:.2e} over 50 samples")


def test_manufactured_solutions(verdict):
    ok, parts = True, []
    for solver in ("boussinesq", "primitive"):
        sol = mms.steady_smooth()
        coarse, fine = (mms.run_manufactured(sol, solver, Grid(n, n, n), DT, 100) for n in (16, 24))
        sol = mms.single_mode()
        errs = [mms.run_manufactured(sol, solver, Grid(16, 16, 16), dt, round(0.5 / dt)) for dt in (4e-3, 2e-3, 1e-3)]
        orders = [math.log2(a / b) for a, b in zip(errs, errs[1:])]
        ok = ok and coarse / fine >= 1e3 and all(abs(p - 2.0) <= 0.2 for p in orders)
        parts.append(f"{solver}: spatial drop {coarse / fine:.0f}, temporal orders "
                     + ", ".join(f"{p:.3f}" for p in orders))
    verdict(5, "manufactured solutions", ok, "; ".join(parts))


def test_bound_formula_oracle(verdict):
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(20):
        t = rng.uniform(0, 1)
        cfg = BoundConfig(rng.uniform(1e-3, 2e-2), *rng.uniform(0, 0.3, size=7))
        eps = rng.uniform(0, 1)
        got = [alpha(i, t, cfg) for i in range(1, 9)] + [beta(1, t, cfg, eps), beta(2, t, cfg, eps)]
        ref = bound_values(t, cfg.C, cfg.v0_h1, cfg.theta0_h1, cfg.v0_h2, cfg.theta0_h2, cfg.w0_l2, cfg.v0_l2,
                           cfg.theta0_l2, eps)
        for a, b in zip(got, ref):
            b = float(b)
            worst = max(worst, 0.0 if a == b else abs(a - b) / abs(b))
    verdict(6, "bound formula oracle", worst <= 1e-12, f"max relative deviation {worst:.1e} on 20 points")


def test_surface_pressure_routes(verdict):
    worst = 0.0
    for seed in range(10):
        v, th = random_initial_data(G32, seed=100 + seed, amplitude=1.0)
        assert validate_initial_data(v, th).ok
        a = surface_pressure(v, th).coeffs
        b = surface_pressure_projection(v, th).coeffs
        worst = max(worst, float(np.abs(a - b).max()))
    verdict(7, "surface pressure cross-check", worst <= 1e-10, f"max coefficient difference {worst:.1e}")


def test_long_horizon(verdict):
    plan = acceptance_plan(epsilons=(0.05,), horizon=5.0)
    res = run_pair(0.05, plan)
    rows = res.tracker.rows
    t = np.array([r["t"] for r in rows])
    h1 = np.array([r["h1"] for r in rows])
    early = h1[t <= 2.0 + 1e-9].max()
    late = h1.max()
    ok = res.status == "ok" and t[-1] == pytest.approx(5.0) and late <= 1.1 * early
    verdict(8, "long horizon", ok,
            f"status {res.status}, t_end {t[-1]:.3f}, sup-H1 to t=2 {early:.3e}, to t=5 {late:.3e}")
