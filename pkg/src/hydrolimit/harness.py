"""Paired Boussinesq / primitive runs over an eps sweep and the rate fit.

The primitive trajectory does not depend on eps, so it is computed once per
time step size and stored at the sample times, compressed to the retained
(dealiased) modes. Each eps run then replays it to evaluate the difference
norms at the same instants.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .boussinesq import BoussinesqStepper
from .diagnostics import DIFFERENCE_FIELDS, DifferenceTracker, TrajectoryRecord, write_rows_csv
from .errors import BlowUpError, CFLError, ParameterError, SolverError
from .primitive import PrimitiveStepper
from .spectral import Grid, Parity, SpectralField
from .state import PhysicalParams, State, diagnose_w, make_state, validate_initial_data
from .stepping import IMEXScheme, steps_for

SCHEMA_VERSION = 1

ROW_FIELDS = (
    "eps", "dt", "status",
    "sup_l2", "int_grad", "E",
    "sup_h1", "int_grad_h1", "E_h1",
    "sup_V_l2", "sup_epsW_l2", "sup_Phi_l2",
)

MIN_SLOPE = 0.9
MAX_RESIDUAL = 0.1


# -- plan ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SweepPlan:
    """One sweep: the eps list, numerics and the shared initial data.

    ``dt`` is either one step size for every eps or a mapping eps -> dt.
    ``description`` identifies the initial data in reports and the config hash.
    """

    epsilons: tuple[float, ...]
    grid: Grid
    dt: float | dict[float, float]
    horizon: float
    v0: tuple[SpectralField, SpectralField]
    theta0: SpectralField
    description: dict = field(default_factory=dict)
    sample_every: int = 10
    scheme: IMEXScheme = IMEXScheme()
    workers: int = 1
    require_mean_zero: bool = True

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        object.__setattr__(self, "epsilons", eps)
        if not eps:
            raise ParameterError("sweep needs at least one eps")
        if any(not 0 < e < 1 for e in eps):
            raise ParameterError(f"every eps must lie in (0, 1), got {list(eps)}")
        if any(a <= b for a, b in zip(eps, eps[1:])):
            raise ParameterError(f"eps values must be distinct and descending, got {list(eps)}")
        if not self.horizon > 0:
            raise ParameterError(f"horizon must be positive, got {self.horizon}")
        if self.sample_every < 1:
            raise ParameterError("sample_every must be >= 1")
        for e in eps:
            steps_for(self.horizon, self.dt_for(e))

    def dt_for(self, eps: float) -> float:
        if isinstance(self.dt, dict):
            try:
                return float(self.dt[eps])
            except KeyError:
                raise ParameterError(f"no dt given for eps = {eps}") from None
        return float(self.dt)

    def metadata(self) -> dict:
        g = self.grid
        dts = {repr(e): self.dt_for(e) for e in self.epsilons}
        return {
            "epsilons": list(self.epsilons),
            "grid": [g.nx, g.ny, g.nz],
            "dt": dts,
            "horizon": self.horizon,
            "sample_every": self.sample_every,
            "scheme": {"name": self.scheme.name, "cfl_limit": _jsonable(self.scheme.cfl_limit)},
            "initial_data": self.description,
        }

    def config_hash(self) -> str:
        doc = json.dumps(self.metadata(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(doc.encode()).hexdigest()


def _jsonable(x: float):
    return x if math.isfinite(x) else repr(x)


# -- primitive reference trajectory ----------------------------------------------------


@dataclass
class ReferenceTrajectory:
    """Primitive states at the sample times, stored as retained-mode vectors."""

    grid: Grid
    times: list[float]
    packed: list[np.ndarray]
    record: TrajectoryRecord

    @classmethod
    def compute(cls, plan: SweepPlan, dt: float) -> ReferenceTrajectory:
        g = plan.grid
        stepper = PrimitiveStepper(g, dt, plan.scheme)
        state = _initial_state(plan)
        record = TrajectoryRecord(eps=0.0, sample_every=plan.sample_every)
        record.start(state)
        times, packed = [state.time], [_pack(state)]
        n = steps_for(plan.horizon, dt)
        for i in range(1, n + 1):
            new = stepper.step(state)
            record.observe(state, new)
            if i % plan.sample_every == 0 or i == n:
                times.append(new.time)
                packed.append(_pack(new))
            state = new
        return cls(g, times, packed, record)

    def state(self, i: int) -> State:
        g = self.grid
        mask = g.dealias_mask
        arrays = []
        for block in np.split(self.packed[i], 3):
            c = np.zeros(g.spectral_shape, dtype=complex)
            c[mask] = block
            arrays.append(c)
        v = (SpectralField(g, arrays[0], Parity.EVEN), SpectralField(g, arrays[1], Parity.EVEN))
        return State(v, diagnose_w(v), SpectralField(g, arrays[2], Parity.ODD), self.times[i])


def _pack(s: State) -> np.ndarray:
    mask = s.grid.dealias_mask
    return np.concatenate([s.v[0].coeffs[mask], s.v[1].coeffs[mask], s.theta.coeffs[mask]])


def _initial_state(plan: SweepPlan) -> State:
    return make_state(plan.v0, plan.theta0)


# -- paired runs -------------------------------------------------------------------------


@dataclass
class PairResult:
    eps: float
    dt: float
    status: str  # "ok", "blowup", "cfl" or "error"
    message: str
    tracker: DifferenceTracker
    record: TrajectoryRecord
    wall_time: float

    def row(self) -> dict:
        tr = self.tracker
        sups = {k: max((r[k] for r in tr.rows), default=0.0) for k in ("V_l2", "epsW_l2", "Phi_l2")}
        return {
            "eps": self.eps,
            "dt": self.dt,
            "status": self.status,
            "sup_l2": math.sqrt(tr.sup_l2_sq),
            "int_grad": math.sqrt(tr.int_grad_sq),
            "E": tr.composite,
            "sup_h1": math.sqrt(tr.sup_h1_sq),
            "int_grad_h1": math.sqrt(tr.int_grad_h1_sq),
            "E_h1": tr.composite_h1,
            "sup_V_l2": sups["V_l2"],
            "sup_epsW_l2": sups["epsW_l2"],
            "sup_Phi_l2": sups["Phi_l2"],
        }


def run_pair(eps: float, plan: SweepPlan, reference: ReferenceTrajectory | SolverError | None = None) -> PairResult:
    """Advance the scaled system at ``eps`` alongside the primitive reference."""
    start = _time.perf_counter()
    dt = plan.dt_for(eps)
    tracker = DifferenceTracker(eps)
    record = TrajectoryRecord(eps=eps, sample_every=plan.sample_every)
    try:
        if reference is None:
            reference = ReferenceTrajectory.compute(plan, dt)
    except SolverError as exc:
        reference = exc
    if isinstance(reference, SolverError):
        status = "cfl" if isinstance(reference, CFLError) else "blowup"
        return PairResult(eps, dt, status, f"primitive run failed: {reference}", tracker, record,
                          _time.perf_counter() - start)

    stepper = BoussinesqStepper(PhysicalParams.scaled(eps), plan.grid, dt, plan.scheme)
    state = _initial_state(plan)
    record.start(state)
    tracker.observe(state, reference.state(0))
    tracker.sample()
    n = steps_for(plan.horizon, dt)
    k = 1
    status, message = "ok", ""
    try:
        for i in range(1, n + 1):
            new = stepper.step(state)
            record.observe(state, new)
            state = new
            if i % plan.sample_every == 0 or i == n:
                tracker.observe(state, reference.state(k))
                tracker.sample()
                k += 1
    except BlowUpError as exc:
        status, message = "blowup", str(exc)
    except CFLError as exc:
        status, message = "cfl", str(exc)
    return PairResult(eps, dt, status, message, tracker, record, _time.perf_counter() - start)


def _pair_task(args):
    eps, plan, reference = args
    return run_pair(eps, plan, reference)


def run_sweep(plan: SweepPlan) -> ConvergenceReport:
    """Validate the data, run every eps and assemble the report."""
    report = validate_initial_data(plan.v0, plan.theta0, require_mean_zero=plan.require_mean_zero)
    if not report.ok:
        raise ParameterError(f"initial data rejected:\n{report}")
    references: dict[float, ReferenceTrajectory | SolverError] = {}
    ref_time: dict[float, float] = {}
    for eps in plan.epsilons:
        dt = plan.dt_for(eps)
        if dt not in references:
            t0 = _time.perf_counter()
            try:
                references[dt] = ReferenceTrajectory.compute(plan, dt)
            except SolverError as exc:
                references[dt] = exc
            ref_time[dt] = _time.perf_counter() - t0
    tasks = [(eps, plan, references[plan.dt_for(eps)]) for eps in plan.epsilons]
    if plan.workers > 1:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            results = list(pool.map(_pair_task, tasks))
    else:
        results = [_pair_task(task) for task in tasks]
    timing = [{"eps": r.eps, "bq_seconds": r.wall_time, "pe_seconds": ref_time[r.dt]} for r in results]
    return ConvergenceReport.build(
        [r.row() for r in results],
        plan.metadata(),
        plan.config_hash(),
        series={r.eps: r.tracker.rows for r in results},
        timing=timing,
        messages={r.eps: r.message for r in results if r.message},
    )


# -- fitting -------------------------------------------------------------------------------


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    residual: float  # RMS of log E residuals
    n: int


def fit_rate(rows: Sequence[tuple[float, float]]) -> FitResult:
    """Least-squares slope of log E against log eps."""
    rows = list(rows)
    if len(rows) < 3:
        raise ParameterError(f"rate fit needs at least 3 points, got {len(rows)}")
    eps = np.array([r[0] for r in rows], dtype=float)
    err = np.array([r[1] for r in rows], dtype=float)
    if np.any(err <= 0) or np.any(eps <= 0):
        raise ParameterError("rate fit needs positive eps and E values")
    lx, ly = np.log(eps), np.log(err)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    return FitResult(float(slope), float(intercept), float(np.sqrt(np.mean(resid**2))), len(rows))


def strictly_decreasing(rows: Sequence[tuple[float, float]]) -> bool:
    """E strictly decreases as eps decreases (rows in descending eps)."""
    ordered = sorted(rows, key=lambda r: -r[0])
    return all(b[1] < a[1] for a, b in zip(ordered, ordered[1:]))


# -- report ----------------------------------------------------------------------------------


@dataclass
class ConvergenceReport:
    rows: list[dict]
    metadata: dict
    config_hash: str
    fit: FitResult | None
    fit_error: str
    monotone: bool
    stability: float | None  # |slope change| when the largest eps is dropped
    series: dict[float, list[dict]] = field(default_factory=dict)
    timing: list[dict] = field(default_factory=list)
    messages: dict[float, str] = field(default_factory=dict)

    @classmethod
    def build(cls, rows, metadata, config_hash, series=None, timing=None, messages=None) -> ConvergenceReport:
        if not rows:
            raise ParameterError("empty sweep: nothing to report")
        good = [(r["eps"], r["E"]) for r in rows if r["status"] == "ok"]
        fit, fit_error, stability = None, "", None
        try:
            fit = fit_rate(good)
        except ParameterError as exc:
            fit_error = str(exc)
        if fit is not None and len(good) >= 4:
            rest = sorted(good, key=lambda r: -r[0])[1:]
            stability = abs(fit_rate(rest).slope - fit.slope)
        return cls(
            rows=list(rows),
            metadata=metadata,
            config_hash=config_hash,
            fit=fit,
            fit_error=fit_error,
            monotone=len(good) > 1 and strictly_decreasing(good),
            stability=stability,
            series=series or {},
            timing=timing or [],
            messages=messages or {},
        )

    @property
    def all_ok(self) -> bool:
        return all(r["status"] == "ok" for r in self.rows)

    @property
    def passed(self) -> bool:
        return (
            self.all_ok
            and self.fit is not None
            and self.monotone
            and self.fit.slope >= MIN_SLOPE
            and self.fit.residual < MAX_RESIDUAL
        )

    def summary(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "package_version": __version__,
            "config_hash": self.config_hash,
            "config": self.metadata,
            "rows": self.rows,
            "excluded": [r["eps"] for r in self.rows if r["status"] != "ok"],
            "fit": None if self.fit is None else asdict(self.fit),
            "fit_error": self.fit_error,
            "monotone": self.monotone,
            "slope_change_without_largest_eps": self.stability,
            "thresholds": {"min_slope": MIN_SLOPE, "max_residual": MAX_RESIDUAL},
            "passed": self.passed,
        }


def _summary_text(report: ConvergenceReport) -> str:
    return json.dumps(report.summary(), indent=2, sort_keys=True) + "\n"


def emit_report(report: ConvergenceReport, outdir) -> list[Path]:
    """Write rows.csv, summary.json, config.json, loglog_*.dat, per-eps series and timing.csv."""
    if not report.rows:
        raise ParameterError("empty sweep: nothing to emit")
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    rows_path = out / "rows.csv"
    write_rows_csv(rows_path, ROW_FIELDS, report.rows)
    paths.append(rows_path)

    config_path = out / "config.json"
    config_path.write_text(
        json.dumps({"config_hash": report.config_hash, "config": report.metadata}, indent=2, sort_keys=True) + "\n"
    )
    paths.append(config_path)

    summary_path = out / "summary.json"
    summary_path.write_text(_summary_text(report))
    paths.append(summary_path)

    for key, name in (("E", "loglog_E.dat"), ("E_h1", "loglog_E_h1.dat")):
        lines = ["# log(eps) log(" + key + ")"]
        for r in report.rows:
            if r["status"] == "ok" and r[key] > 0:
                lines.append(f"{math.log(r['eps'])!r} {math.log(r[key])!r}")
        path = out / name
        path.write_text("\n".join(lines) + "\n")
        paths.append(path)

    for eps, rows in sorted(report.series.items(), key=lambda kv: -kv[0]):
        path = out / f"series_eps_{eps!r}.csv"
        write_rows_csv(path, DIFFERENCE_FIELDS, rows)
        paths.append(path)

    if report.timing:
        path = out / "timing.csv"
        write_rows_csv(path, ("eps", "bq_seconds", "pe_seconds"), report.timing)
        paths.append(path)
    return paths


def _parse_row(raw: dict) -> dict:
    row = {}
    for k in ROW_FIELDS:
        row[k] = raw[k] if k == "status" else float(raw[k])
    return row


def rebuild_summary(outdir) -> str:
    """Recompute summary.json text from rows.csv and config.json alone."""
    out = Path(outdir)
    with open(out / "rows.csv", newline="") as fh:
        rows = [_parse_row(r) for r in csv.DictReader(fh)]
    config = json.loads((out / "config.json").read_text())
    report = ConvergenceReport.build(rows, config["config"], config["config_hash"])
    return _summary_text(report)
