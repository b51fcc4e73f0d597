"""Coefficient files and checkpoints.

Coefficient file layout (all little-endian):

    int64 nx, int64 ny, int64 nz
    then one block per field, each block the full complex spectrum of shape
    (nx, ny, nz) in row-major (kx, ky, m) FFT order, every coefficient stored
    as two float64 values (real, imaginary).

Coefficients use the normalisation f = sum_k c_k exp(i k.x). Initial-data files
hold the fields (v1, v2, theta); checkpoints hold (v1, v2, w, theta) and are
accompanied by a JSON manifest with the time, eps, dt and scheme.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .spectral import Grid, Parity, SpectralField
from .state import State

_HEADER = np.dtype("<i8")
_VALUE = np.dtype("<c16")

INITIAL_FIELDS = ("v1", "v2", "theta")
CHECKPOINT_FIELDS = ("v1", "v2", "w", "theta")
_PARITY = {"v1": Parity.EVEN, "v2": Parity.EVEN, "w": Parity.ODD, "theta": Parity.ODD}


def write_coefficients(path, fields: list[SpectralField]) -> None:
    grid = fields[0].grid
    with open(path, "wb") as fh:
        fh.write(np.array([grid.nx, grid.ny, grid.nz], dtype=_HEADER).tobytes())
        for f in fields:
            fh.write(grid.full_spectrum(f.coeffs).astype(_VALUE).tobytes())


def read_coefficients(path, depth: float = 1.0) -> tuple[Grid, list[np.ndarray]]:
    """Return the grid and the half-spectrum coefficient arrays stored in ``path``."""
    raw = Path(path).read_bytes()
    if len(raw) < 24:
        raise ValueError(f"{path}: file too short for a coefficient header")
    nx, ny, nz = (int(n) for n in np.frombuffer(raw[:24], dtype=_HEADER))
    grid = Grid(nx, ny, nz, depth)
    block = nx * ny * nz * _VALUE.itemsize
    body = raw[24:]
    if len(body) % block:
        raise ValueError(f"{path}: payload of {len(body)} bytes is not a whole number of {nx}x{ny}x{nz} fields")
    fields = []
    for i in range(len(body) // block):
        full = np.frombuffer(body[i * block : (i + 1) * block], dtype=_VALUE).reshape(grid.shape)
        fields.append(grid.half_spectrum(full))
    return grid, fields


def read_initial_data(path) -> tuple[tuple[SpectralField, SpectralField], SpectralField]:
    grid, arrays = read_coefficients(path)
    if len(arrays) != len(INITIAL_FIELDS):
        raise ValueError(f"{path}: expected {len(INITIAL_FIELDS)} fields (v1, v2, theta), found {len(arrays)}")
    v1, v2, theta = (SpectralField(grid, a, _PARITY[n]) for n, a in zip(INITIAL_FIELDS, arrays))
    return (v1, v2), theta


def write_initial_data(path, v0: tuple[SpectralField, SpectralField], theta0: SpectralField) -> None:
    write_coefficients(path, [v0[0], v0[1], theta0])


def write_checkpoint(path, state: State, **meta) -> Path:
    """Write ``path`` (coefficients) and ``path + '.json'`` (manifest); return the manifest path."""
    path = Path(path)
    write_coefficients(path, [state.v[0], state.v[1], state.w, state.theta])
    manifest = {"t": state.time, "fields": list(CHECKPOINT_FIELDS), **meta}
    meta_path = path.with_name(path.name + ".json")
    meta_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return meta_path


def read_checkpoint(path) -> tuple[State, dict]:
    path = Path(path)
    grid, arrays = read_coefficients(path)
    meta = json.loads(path.with_name(path.name + ".json").read_text())
    if len(arrays) != len(CHECKPOINT_FIELDS):
        raise ValueError(f"{path}: expected 4 fields (v1, v2, w, theta), found {len(arrays)}")
    v1, v2, w, theta = (SpectralField(grid, a, _PARITY[n]) for n, a in zip(CHECKPOINT_FIELDS, arrays))
    return State((v1, v2), w, theta, float(meta["t"])), meta
