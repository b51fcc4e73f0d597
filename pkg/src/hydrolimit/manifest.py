"""Run manifests: flat key = value text in [sections], parsed with configparser.

Example::

    [grid]
    nx = 32
    ny = 32
    nz = 32

    [run]
    solver = boussinesq
    eps = 0.1
    dt = 1e-3
    horizon = 0.5

    [initial]
    profile = well_prepared
    amplitude = 0.1

Every key is validated before anything is computed; unknown sections and
keys are rejected with their line number.
"""

from __future__ import annotations

import configparser
import inspect
import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path

from .errors import HydroLimitError
from .profiles import PROFILES
from .spectral import Grid

SCHEMA: dict[str, dict[str, str]] = {
    "grid": {"nx": "int", "ny": "int", "nz": "int"},
    "run": {
        "solver": "str",
        "eps": "float",
        "epsilons": "floats",
        "dt": "float",
        "dt_per_eps": "pairs",
        "horizon": "float",
        "sample_every": "int",
        "scheme": "str",
        "cfl_limit": "float",
        "workers": "int",
        "checkpoint_every": "int",
    },
    "initial": {"profile": "str", "file": "str", "*": "float"},
    "output": {"dir": "str"},
    "tolerance": {"hypothesis": "float", "require_mean_zero": "bool"},
    "bounds": {
        "c": "float",
        "eps": "float",
        "times": "floats",
        "v0_h1": "float",
        "theta0_h1": "float",
        "v0_h2": "float",
        "theta0_h2": "float",
        "w0_l2": "float",
        "v0_l2": "float",
        "theta0_l2": "float",
    },
}


class ManifestError(HydroLimitError, ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<manifest>"):
        where = f"{source}:{line}: " if line is not None else f"{source}: "
        super().__init__(where + message)
        self.line = line


@dataclass
class RunConfig:
    grid: tuple[int, int, int] = (32, 32, 32)
    solver: str = "boussinesq"
    eps: float | None = None
    epsilons: tuple[float, ...] = ()
    dt: float = 1e-3
    dt_per_eps: dict[float, float] = field(default_factory=dict)
    horizon: float = 0.5
    sample_every: int = 10
    scheme: str = "imex-cn-heun"
    cfl_limit: float = 0.5
    workers: int = 1
    checkpoint_every: int = 0
    profile: str | None = None
    profile_params: dict[str, float] = field(default_factory=dict)
    initial_file: str | None = None
    out: str = "out"
    hypothesis_tol: float = 1e-10
    require_mean_zero: bool = True
    bounds: dict[str, float] = field(default_factory=dict)
    bound_times: tuple[float, ...] = (0.0,)
    bound_eps: float = 0.0
    source_text: str = ""

    def make_grid(self) -> Grid:
        return Grid(*self.grid)

    def with_overrides(self, **kw) -> RunConfig:
        kw = {k: v for k, v in kw.items() if v is not None}
        cfg = replace(self, **kw)
        cfg.check()
        return cfg

    def check(self) -> None:
        if any(n < 4 or n % 2 for n in self.grid):
            raise ManifestError(f"grid sizes must be even and >= 4, got {self.grid}")
        if self.solver not in ("boussinesq", "primitive"):
            raise ManifestError(f"solver must be boussinesq or primitive, got {self.solver!r}")
        if self.eps is not None and not 0 < self.eps <= 1:
            raise ManifestError(f"eps must lie in (0, 1], got {self.eps}")
        for name in ("dt", "horizon", "cfl_limit"):
            if not getattr(self, name) > 0:
                raise ManifestError(f"{name} must be positive")
        if self.sample_every < 1 or self.workers < 1 or self.checkpoint_every < 0:
            raise ManifestError("sample_every and workers must be >= 1, checkpoint_every >= 0")
        if self.scheme != "imex-cn-heun":
            raise ManifestError(f"unknown scheme {self.scheme!r}; only imex-cn-heun is available")
        if self.profile is not None and self.initial_file is not None:
            raise ManifestError("[initial] takes either profile or file, not both")
        if self.profile is not None:
            if self.profile not in PROFILES:
                raise ManifestError(f"unknown profile {self.profile!r}; choose from {', '.join(sorted(PROFILES))}")
            allowed = set(inspect.signature(PROFILES[self.profile]).parameters) - {"grid"}
            extra = set(self.profile_params) - allowed
            if extra:
                raise ManifestError(
                    f"profile {self.profile!r} does not take {', '.join(sorted(extra))}"
                    f" (allowed: {', '.join(sorted(allowed)) or 'none'})"
                )


def _key_line(text: str, section: str, key: str) -> int | None:
    current = None
    for no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        m = re.fullmatch(r"\[([^\]]+)\]", line)
        if m:
            current = m.group(1).strip().lower()
        elif current == section and re.match(rf"{re.escape(key)}\s*[=:]", line, re.IGNORECASE):
            return no
    return None


def _section_line(text: str, section: str) -> int | None:
    for no, raw in enumerate(text.splitlines(), start=1):
        if raw.strip().lower() == f"[{section}]":
            return no
    return None


def _convert(kind: str, value: str):
    if kind == "int":
        return int(value)
    if kind == "float":
        x = float(value)
        if math.isnan(x):
            raise ValueError("nan")
        return x
    if kind == "floats":
        return tuple(float(v) for v in value.replace(",", " ").split())
    if kind == "bool":
        low = value.strip().lower()
        if low in ("1", "true", "yes", "on"):
            return True
        if low in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {value!r}")
    if kind == "pairs":
        out = {}
        for item in value.split(","):
            e, d = item.split(":")
            out[float(e)] = float(d)
        return out
    return value.strip()


def parse_manifest(text: str, source: str = "<manifest>") -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    try:
        parser.read_string(text, source=source)
    except configparser.ParsingError as exc:
        lineno, raw = exc.errors[0] if getattr(exc, "errors", None) else (None, "")
        raise ManifestError(f"cannot parse line {raw.strip()}", lineno, source) from None
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        raise ManifestError(exc.message.splitlines()[0], line, source) from None

    values: dict[str, dict[str, object]] = {}
    for section in parser.sections():
        name = section.strip().lower()
        if name not in SCHEMA:
            raise ManifestError(f"unknown section [{section}]", _section_line(text, name), source)
        spec = SCHEMA[name]
        values[name] = {}
        for key, raw in parser.items(section):
            kind = spec.get(key, spec.get("*"))
            if kind is None:
                raise ManifestError(f"unknown key {key!r} in [{name}]", _key_line(text, name, key), source)
            try:
                values[name][key] = _convert(kind, raw)
            except ValueError as exc:
                raise ManifestError(f"bad value for {key!r}: {exc}", _key_line(text, name, key), source) from None

    kw: dict[str, object] = {"source_text": text}
    grid = values.get("grid", {})
    if grid:
        missing = {"nx", "ny", "nz"} - set(grid)
        if missing:
            raise ManifestError(f"[grid] is missing {', '.join(sorted(missing))}", _section_line(text, "grid"), source)
        kw["grid"] = (grid["nx"], grid["ny"], grid["nz"])
    run = values.get("run", {})
    kw.update(run)
    init = dict(values.get("initial", {}))
    if "profile" in init:
        kw["profile"] = init.pop("profile")
    if "file" in init:
        kw["initial_file"] = init.pop("file")
    kw["profile_params"] = init
    if "dir" in values.get("output", {}):
        kw["out"] = values["output"]["dir"]
    tol = values.get("tolerance", {})
    if "hypothesis" in tol:
        kw["hypothesis_tol"] = tol["hypothesis"]
    if "require_mean_zero" in tol:
        kw["require_mean_zero"] = tol["require_mean_zero"]
    bounds = dict(values.get("bounds", {}))
    if "times" in bounds:
        kw["bound_times"] = bounds.pop("times")
    if "eps" in bounds:
        kw["bound_eps"] = bounds.pop("eps")
    kw["bounds"] = bounds
    cfg = RunConfig(**kw)
    try:
        cfg.check()
    except ManifestError as exc:
        raise ManifestError(str(exc).split(": ", 1)[-1], None, source) from None
    return cfg


def load_manifest(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ManifestError(f"cannot read manifest: {exc.strerror}", None, str(path)) from None
    return parse_manifest(text, str(path))
