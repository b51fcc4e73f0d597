"""Command-line front end: validate, simulate, sweep, bounds.

Exit codes: 0 success, 1 hypothesis violation, 2 parse or usage error,
3 blow-up, 4 acceptance-check failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import scipy.fft

from . import profiles
from .bounds import BoundConfig, bound_table
from .boussinesq import BoussinesqStepper
from .diagnostics import TrajectoryRecord, h1_norm_sq, h2_norm_sq, l2_sq
from .errors import BlowUpError, CFLError, HydroLimitError, ParameterError
from .fileio import read_checkpoint, read_initial_data, write_checkpoint
from .harness import SweepPlan, emit_report, run_sweep
from .manifest import ManifestError, RunConfig, load_manifest
from .primitive import PrimitiveStepper
from .state import PhysicalParams, make_state, validate_initial_data
from .stepping import IMEXScheme, steps_for

EXIT_OK, EXIT_HYPOTHESIS, EXIT_PARSE, EXIT_BLOWUP, EXIT_ACCEPTANCE = 0, 1, 2, 3, 4

THREADS_ENV = "HYDROLIMIT_THREADS"

log = logging.getLogger("hydrolimit")


class UsageError(HydroLimitError):
    pass


# -- configuration --------------------------------------------------------------------


def _grid_arg(text: str) -> tuple[int, int, int]:
    parts = text.replace("x", ",").split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected NX,NY,NZ")
    return tuple(int(p) for p in parts)  # type: ignore[return-value]


def _eps_arg(text: str) -> tuple[float, ...]:
    return tuple(float(p) for p in text.replace(",", " ").split())


def load_config(args) -> RunConfig:
    cfg = load_manifest(args.config) if args.config else RunConfig()
    eps = getattr(args, "eps", None)
    overrides = {
        "grid": args.grid,
        "dt": args.dt,
        "horizon": args.horizon,
        "out": args.out,
    }
    if eps is not None:
        overrides["epsilons"] = eps
        if len(eps) == 1:
            overrides["eps"] = eps[0]
    return cfg.with_overrides(**overrides)


def config_hash(cfg: RunConfig) -> str:
    doc = {k: v for k, v in vars(cfg).items() if k not in ("source_text", "out")}
    text = json.dumps(doc, sort_keys=True, default=repr)
    return hashlib.sha256(text.encode()).hexdigest()


def initial_data(cfg: RunConfig):
    grid = cfg.make_grid()
    if cfg.initial_file is not None:
        path = Path(cfg.initial_file)
        v0, theta0 = read_initial_data(path)
        if v0[0].grid != grid:
            raise UsageError(f"{path}: grid {v0[0].grid.shape} does not match the configured {grid.shape}")
        return v0, theta0, {"file": str(path)}
    if cfg.profile is None:
        raise UsageError("no initial data: set [initial] profile or file")
    params = dict(cfg.profile_params)
    return (*profiles.build(cfg.profile, grid, **params), {"profile": cfg.profile, **params})


def _validated(cfg: RunConfig):
    v0, theta0, desc = initial_data(cfg)
    report = validate_initial_data(v0, theta0, tol=cfg.hypothesis_tol, require_mean_zero=cfg.require_mean_zero)
    return v0, theta0, desc, report


def _scheme(cfg: RunConfig) -> IMEXScheme:
    return IMEXScheme(cfg.scheme, cfg.cfl_limit)


# -- commands -----------------------------------------------------------------------------


def cmd_validate(cfg: RunConfig, out=sys.stdout) -> int:
    *_, report = _validated(cfg)
    print("hypothesis checklist:", file=out)
    print(report, file=out)
    print("all hypotheses hold" if report.ok else f"{len(report.violations)} hypothesis check(s) failed", file=out)
    return EXIT_OK if report.ok else EXIT_HYPOTHESIS


def cmd_simulate(cfg: RunConfig, resume: str | None = None, out=sys.stdout) -> int:
    grid = cfg.make_grid()
    scheme = _scheme(cfg)
    if cfg.solver == "boussinesq" and cfg.eps is None:
        raise UsageError("the boussinesq solver needs eps (manifest [run] eps or --eps)")
    if resume is not None:
        state, meta = read_checkpoint(resume)
        if state.grid != grid:
            raise UsageError(f"checkpoint grid {state.grid.shape} does not match the configured {grid.shape}")
        if meta.get("solver") != cfg.solver:
            raise UsageError(f"checkpoint was written by the {meta.get('solver')} solver")
    else:
        v0, theta0, _, report = _validated(cfg)
        if not report.ok:
            print(report, file=out)
            return EXIT_HYPOTHESIS
        state = make_state(v0, theta0)

    if cfg.solver == "boussinesq":
        stepper = BoussinesqStepper(PhysicalParams.scaled(cfg.eps), grid, cfg.dt, scheme)
        eps_weight = cfg.eps
    else:
        stepper = PrimitiveStepper(grid, cfg.dt, scheme)
        eps_weight = 0.0
    n = steps_for(cfg.horizon - state.time, cfg.dt)

    outdir = Path(cfg.out)
    outdir.mkdir(parents=True, exist_ok=True)
    meta = {"eps": cfg.eps, "dt": cfg.dt, "scheme": cfg.scheme, "solver": cfg.solver,
            "config_hash": config_hash(cfg)}
    record = TrajectoryRecord(eps=eps_weight, sample_every=cfg.sample_every)
    record.start(state)
    status = EXIT_OK
    try:
        for i in range(1, n + 1):
            new = stepper.step(state)
            record.observe(state, new)
            state = new
            if cfg.checkpoint_every and i % cfg.checkpoint_every == 0 and i < n:
                write_checkpoint(outdir / f"checkpoint_{i:07d}.bin", state, **meta)
    except (BlowUpError, CFLError) as exc:
        print(f"error: {exc}", file=out)
        status = EXIT_BLOWUP
    record.write_csv(outdir / "record.csv")
    if status == EXIT_OK:
        write_checkpoint(outdir / "final.bin", state, **meta)
        print(f"reached t = {state.time:.6g}; wrote {outdir / 'record.csv'} and {outdir / 'final.bin'}", file=out)
    return status


def cmd_sweep(cfg: RunConfig, out=sys.stdout) -> int:
    epsilons = cfg.epsilons or ((cfg.eps,) if cfg.eps is not None else ())
    if len(epsilons) < 3:
        print(f"error: a rate fit needs at least 3 eps values, got {len(epsilons)}", file=out)
        return EXIT_ACCEPTANCE
    v0, theta0, desc, report = _validated(cfg)
    if not report.ok:
        print(report, file=out)
        return EXIT_HYPOTHESIS
    dt = dict(cfg.dt_per_eps) if cfg.dt_per_eps else cfg.dt
    plan = SweepPlan(
        epsilons=tuple(epsilons),
        grid=cfg.make_grid(),
        dt=dt,
        horizon=cfg.horizon,
        v0=v0,
        theta0=theta0,
        description=desc,
        sample_every=cfg.sample_every,
        scheme=_scheme(cfg),
        workers=cfg.workers,
        require_mean_zero=cfg.require_mean_zero,
    )
    result = run_sweep(plan)
    emit_report(result, cfg.out)
    print(f"{'eps':>8} {'status':>7} {'E':>12} {'E_h1':>12}", file=out)
    for row in result.rows:
        print(f"{row['eps']:8.4g} {row['status']:>7} {row['E']:12.5e} {row['E_h1']:12.5e}", file=out)
    for eps, msg in result.messages.items():
        print(f"eps = {eps:g}: {msg}", file=out)
    if result.fit is not None:
        print(f"slope {result.fit.slope:.4f}, residual {result.fit.residual:.2e}, monotone {result.monotone}",
              file=out)
    else:
        print(f"no fit: {result.fit_error}", file=out)
    print(f"report written to {cfg.out}", file=out)
    if not result.all_ok:
        return EXIT_BLOWUP
    return EXIT_OK if result.passed else EXIT_ACCEPTANCE


def _bound_config(cfg: RunConfig) -> BoundConfig:
    given = {k: v for k, v in cfg.bounds.items() if k != "c"}
    norms = {"v0_h1", "theta0_h1", "v0_h2", "theta0_h2", "w0_l2", "v0_l2", "theta0_l2"}
    if set(given) != norms:
        if cfg.profile is None and cfg.initial_file is None:
            missing = ", ".join(sorted(norms - set(given)))
            raise UsageError(f"[bounds] is missing {missing} and no initial data is given to compute them")
        v0, theta0, _ = initial_data(cfg)
        state = make_state(v0, theta0)
        computed = {
            "v0_h1": math.sqrt(h1_norm_sq(*state.v)),
            "theta0_h1": math.sqrt(h1_norm_sq(state.theta)),
            "v0_h2": math.sqrt(h2_norm_sq(*state.v)),
            "theta0_h2": math.sqrt(h2_norm_sq(state.theta)),
            "w0_l2": math.sqrt(l2_sq(state.w)),
            "v0_l2": math.sqrt(l2_sq(*state.v)),
            "theta0_l2": math.sqrt(l2_sq(state.theta)),
        }
        given = {**computed, **given}
    return BoundConfig(C=cfg.bounds.get("c", 1.0), **given)


def cmd_bounds(cfg: RunConfig, out=sys.stdout) -> int:
    bc = _bound_config(cfg)
    rows = bound_table(sorted(cfg.bound_times), bc, cfg.bound_eps)
    cols = ["t"] + [f"alpha{i}" for i in range(1, 9)] + ["beta1", "beta2"]
    print(f"C = {bc.C:g}, eps = {cfg.bound_eps:g}", file=out)
    print(" ".join(f"{c:>12}" for c in cols), file=out)
    for row in rows:
        print(" ".join(f"{row[c]:12.5g}" for c in cols), file=out)
    return EXIT_OK


# -- entry point ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run manifest")
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, metavar="N",
                        help=f"FFT worker threads (default ${THREADS_ENV} or 1)")
    common.add_argument("--dt", type=float)
    common.add_argument("--grid", type=_grid_arg, metavar="NX,NY,NZ")
    common.add_argument("--eps", type=_eps_arg, metavar="LIST")
    common.add_argument("--horizon", type=float, metavar="T")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="hydrolimit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check initial data against the hypotheses")
    sim = sub.add_parser("simulate", parents=[common], help="run one solver and write a record")
    sim.add_argument("--resume", metavar="CHECKPOINT", help="continue from a checkpoint file")
    sub.add_parser("sweep", parents=[common], help="paired runs over eps and the rate fit")
    bnd = sub.add_parser("bounds", parents=[common], help="tabulate the bound functions")
    bnd.add_argument("--times", type=_eps_arg, metavar="LIST")
    bnd.add_argument("--C", type=float, dest="bound_c")
    return parser


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args)
        if args.command == "bounds":
            if args.times is not None:
                cfg.bound_times = args.times
            if args.bound_c is not None:
                cfg.bounds["c"] = args.bound_c
        threads = _threads(args)
        if threads < 1:
            raise UsageError("--threads must be >= 1")
        with scipy.fft.set_workers(threads):
            if args.command == "validate":
                return cmd_validate(cfg, out=sys.stdout)
            if args.command == "simulate":
                return cmd_simulate(cfg, args.resume, out=sys.stdout)
            if args.command == "sweep":
                return cmd_sweep(cfg, out=sys.stdout)
            return cmd_bounds(cfg, out=sys.stdout)
    except ManifestError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (UsageError, ParameterError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
