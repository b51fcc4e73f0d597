"""Exception types raised across the package."""

from __future__ import annotations


class HydroLimitError(Exception):
    """Base class for all package errors."""


class ParameterError(HydroLimitError, ValueError):
    """A physical or numerical parameter is outside its admissible range."""


class GaugeError(HydroLimitError, ValueError):
    """An elliptic right-hand side has a nonzero mean, so no zero-mean solution exists."""


class PeriodicityError(HydroLimitError, ValueError):
    """A vertical antiderivative would not be periodic.

    ``modes`` lists the offending horizontal wavenumbers ``(kx, ky)``.
    """

    def __init__(self, message: str, modes: list[tuple[int, int]] | None = None):
        super().__init__(message)
        self.modes = list(modes or [])


class BarotropicError(PeriodicityError):
    """The z-integral of the horizontal divergence does not vanish."""


class ParityError(HydroLimitError, ValueError):
    """A field does not have the z-symmetry it is required to have."""


class GridMismatchError(HydroLimitError, ValueError):
    """Two fields that must share a grid do not."""


class SolverError(HydroLimitError, RuntimeError):
    """A time integration could not proceed."""


class CFLError(SolverError):
    def __init__(self, message: str, cfl: float, suggested_dt: float):
        super().__init__(message)
        self.cfl = cfl
        self.suggested_dt = suggested_dt


class BlowUpError(SolverError):
    """Non-finite values or a runaway velocity were detected.

    ``history`` holds ``(t, max|u|)`` pairs leading up to the failure.
    """

    def __init__(self, message: str, time: float, history: list[tuple[float, float]] | None = None):
        super().__init__(message)
        self.time = time
        self.history = list(history or [])
