"""Built-in analytic initial data."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import ParameterError
from .spectral import Grid, Parity, SpectralField
from .state import random_initial_data

InitialData = tuple[tuple[SpectralField, SpectralField], SpectralField]


def _fields(grid: Grid, v1, v2, theta) -> InitialData:
    return (
        (SpectralField.from_physical(grid, v1, Parity.EVEN), SpectralField.from_physical(grid, v2, Parity.EVEN)),
        SpectralField.from_physical(grid, theta, Parity.ODD),
    )


def well_prepared(grid: Grid, amplitude: float = 0.1, theta_amplitude: float = 0.1) -> InitialData:
    """v0 = A (sin x cos(pi z), -sin y cos(pi z)), theta0 = B sin x sin(pi z)."""
    x, y, z = grid.mesh()
    cz = np.cos(np.pi * z / grid.depth)
    return _fields(
        grid,
        amplitude * np.sin(x) * cz,
        -amplitude * np.sin(y) * cz,
        theta_amplitude * np.sin(x) * np.sin(np.pi * z / grid.depth),
    )


def theta_column(grid: Grid, amplitude: float = 1.0, mode: int = 1) -> InitialData:
    """v0 = 0, theta0 = A sin(mode pi z): no horizontal structure."""
    _, _, z = grid.mesh()
    zero = np.zeros(grid.shape)
    return _fields(grid, zero, zero, amplitude * np.sin(mode * np.pi * z / grid.depth))


def zero(grid: Grid) -> InitialData:
    z = np.zeros(grid.shape)
    return _fields(grid, z, z, z)


def barotropic_flow(grid: Grid, amplitude: float = 0.1) -> InitialData:
    """z-independent v0 = (A sin x, 0); violates the barotropic constraint."""
    x, _, _ = grid.mesh()
    z = np.zeros(grid.shape)
    return _fields(grid, amplitude * np.sin(x), z, z)


def random(grid: Grid, amplitude: float = 0.1, seed: int = 0, max_mode: int = 3) -> InitialData:
    return random_initial_data(grid, seed=int(seed), amplitude=amplitude, max_mode=int(max_mode))


PROFILES: dict[str, Callable[..., InitialData]] = {
    "well_prepared": well_prepared,
    "theta_column": theta_column,
    "zero": zero,
    "barotropic_flow": barotropic_flow,
    "random": random,
}


def build(name: str, grid: Grid, **params) -> InitialData:
    try:
        factory = PROFILES[name]
    except KeyError:
        raise ParameterError(f"unknown profile {name!r}; choose from {', '.join(sorted(PROFILES))}") from None
    try:
        return factory(grid, **params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for profile {name!r}: {exc}") from None
