"""Unknowns, parameters, initial-data checks and the thin/fixed domain rescaling."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import BarotropicError, ParameterError, PeriodicityError
from .spectral import (
    Grid,
    Parity,
    SpectralField,
    ZERO_TOL,
    check_same_grid,
    derivative,
    divergence_h,
    enforce_parity,
    parity_residual,
    vertical_antiderivative,
    z_mean,
)

HYPOTHESIS_TOL = 1e-10


@dataclass(frozen=True)
class PhysicalParams:
    """Aspect ratio and the thin-domain viscosity/diffusivity coefficients."""

    eps: float
    mu_h: float = 1.0
    mu_z: float | None = None
    kappa_h: float = 1.0
    kappa_z: float | None = None

    def __post_init__(self):
        if not 0 < self.eps <= 1:
            raise ParameterError(f"eps must lie in (0, 1], got {self.eps}")
        if self.mu_z is None:
            object.__setattr__(self, "mu_z", self.eps**2)
        if self.kappa_z is None:
            object.__setattr__(self, "kappa_z", self.eps**2)
        for name in ("mu_h", "mu_z", "kappa_h", "kappa_z"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be nonnegative")

    @classmethod
    def scaled(cls, eps: float) -> PhysicalParams:
        """The regime mu_h = kappa_h = 1, mu_z = kappa_z = eps**2."""
        return cls(eps, 1.0, eps**2, 1.0, eps**2)

    def viscous_symbol(self, grid: Grid) -> np.ndarray:
        # vertical coefficients are stretched by eps**-2 on the fixed domain
        return self.mu_h * grid.kh2 + self.mu_z / self.eps**2 * grid.kz**2

    def diffusive_symbol(self, grid: Grid) -> np.ndarray:
        return self.kappa_h * grid.kh2 + self.kappa_z / self.eps**2 * grid.kz**2


@dataclass(frozen=True, eq=False)
class State:
    """(v, w, theta) at one instant. v is a pair of even fields, w and theta are odd."""

    v: tuple[SpectralField, SpectralField]
    w: SpectralField
    theta: SpectralField
    time: float = 0.0

    @property
    def grid(self) -> Grid:
        return self.theta.grid

    @classmethod
    def zeros(cls, grid: Grid, time: float = 0.0) -> State:
        return cls(
            (SpectralField.zeros(grid, Parity.EVEN), SpectralField.zeros(grid, Parity.EVEN)),
            SpectralField.zeros(grid, Parity.ODD),
            SpectralField.zeros(grid, Parity.ODD),
            time,
        )

    def divergence_residual(self) -> float:
        """||div_h v + d_z w||_2 relative to ||grad v||_2 (absolute when v = 0)."""
        div = divergence_h(*self.v) + derivative(self.w, "z")
        scale = _grad_norm(self.v)
        return div.norm() / scale if scale > 0 else div.norm()

    def parity_residual(self) -> float:
        return max(
            parity_residual(self.v[0], Parity.EVEN),
            parity_residual(self.v[1], Parity.EVEN),
            parity_residual(self.w, Parity.ODD),
            parity_residual(self.theta, Parity.ODD),
        )

    def boundary_w(self) -> float:
        """max |w| on the planes z = -1 and z = 1 (the same plane on the periodic grid)."""
        c = self.w.coeffs
        plane = np.sum(c * np.exp(1j * self.grid.kz * self.grid.depth), axis=2)
        return _plane_max(self.grid, plane)

    def barotropic_residual(self) -> float:
        return barotropic_residual(self.v)


@dataclass(frozen=True, eq=False)
class DifferenceState:
    """(V, W, Phi) = (v_eps - v, w_eps - w, theta_eps - theta)."""

    V: tuple[SpectralField, SpectralField]
    W: SpectralField
    Phi: SpectralField

    @classmethod
    def between(cls, bq: State, pe: State) -> DifferenceState:
        check_same_grid(bq.grid, pe.grid)
        return cls(
            (bq.v[0] - pe.v[0], bq.v[1] - pe.v[1]),
            bq.w - pe.w,
            bq.theta - pe.theta,
        )


def _grad_norm(v: tuple[SpectralField, SpectralField]) -> float:
    g = v[0].grid
    total = sum(float(np.sum(g.parseval_weights * g.k2 * np.abs(c.coeffs) ** 2)) for c in v)
    return float(np.sqrt(g.volume * total))


def _plane_max(grid: Grid, plane_coeffs: np.ndarray) -> float:
    """Max modulus over (x, y) of a horizontal field given by half-spectrum coefficients."""
    values = np.fft.irfft2(plane_coeffs.T, s=(grid.ny, grid.nx), norm="forward")
    return float(np.abs(values).max())


def barotropic_residual(v: tuple[SpectralField, SpectralField]) -> float:
    """max over (x, y) of |int_{-1}^{1} div_h v dz|."""
    div = divergence_h(*v)
    g = div.grid
    return _plane_max(g, 2 * g.depth * div.coeffs[:, :, 0])


# -- initial data ---------------------------------------------------------------


@dataclass
class Check:
    name: str
    residual: float
    passed: bool
    modes: list[tuple[int, ...]] = field(default_factory=list)

    def describe(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        line = f"[{mark}] {self.name}: residual {self.residual:.3e}"
        if self.modes:
            line += f" (modes {self.modes[:8]}{' ...' if len(self.modes) > 8 else ''})"
        return line


@dataclass
class ValidationReport:
    checks: list[Check]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def violations(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __str__(self) -> str:
        return "\n".join(c.describe() for c in self.checks)


def _scale(*fields: SpectralField) -> float:
    return max([1.0] + [float(np.abs(f.coeffs).max()) for f in fields])


def validate_initial_data(
    v0: tuple[SpectralField, SpectralField],
    theta0: SpectralField,
    *,
    tol: float = HYPOTHESIS_TOL,
    require_mean_zero: bool = True,
) -> ValidationReport:
    """Check the hypotheses on (v0, theta0); every check is run and reported."""
    g = check_same_grid(v0[0].grid, v0[1].grid, theta0.grid)
    checks: list[Check] = []

    r = max(parity_residual(v0[0], Parity.EVEN), parity_residual(v0[1], Parity.EVEN))
    checks.append(Check("v0 even in z", r, r <= tol))
    r = parity_residual(theta0, Parity.ODD)
    checks.append(Check("theta0 odd in z", r, r <= tol))

    div = divergence_h(*v0)
    slab = np.abs(2 * g.depth * div.coeffs[:, :, 0]) / _scale(*v0)
    bad = np.argwhere(slab > tol)
    modes = [(int(g.mx.ravel()[i]), int(g.my.ravel()[j])) for i, j in bad]
    checks.append(Check("barotropic constraint int div_h v0 dz = 0", float(slab.max()), not modes, modes))

    if require_mean_zero:
        r = max(abs(v0[0].mean()), abs(v0[1].mean())) / _scale(*v0)
        checks.append(Check("mean-zero v0", r, r <= tol))
        r = abs(theta0.mean()) / _scale(theta0)
        checks.append(Check("mean-zero theta0", r, r <= tol))
    return ValidationReport(checks)


def diagnose_w(v: tuple[SpectralField, SpectralField]) -> SpectralField:
    """w(z) = -int_{-1}^{z} div_h v dxi; odd in z and zero at z = +-1."""
    div = divergence_h(*v)
    try:
        w = -vertical_antiderivative(div, -1)
    except PeriodicityError as exc:
        raise BarotropicError(
            "barotropic constraint violated: int div_h v dz != 0, w is not periodic", exc.modes
        ) from exc
    return enforce_parity(w, Parity.ODD)


def remove_barotropic_divergence(
    v: tuple[SpectralField, SpectralField],
) -> tuple[SpectralField, SpectralField]:
    """Project the depth-mean of v onto horizontally divergence-free fields."""
    g = v[0].grid
    c1 = v[0].coeffs.copy()
    c2 = v[1].coeffs.copy()
    ikx, iky = g.ikx[:, :, 0], g.iky[:, :, 0]
    # symbol of -div_h grad_h with the Nyquist-free derivatives
    kh2 = -(ikx**2 + iky**2).real
    kh2[kh2 == 0] = 1.0
    div = ikx * c1[:, :, 0] + iky * c2[:, :, 0]
    # grad_h Lap_h^{-1} div, with Lap_h = -kh2
    c1[:, :, 0] += ikx * div / kh2
    c2[:, :, 0] += iky * div / kh2
    return v[0].replace(c1), v[1].replace(c2)


def make_state(
    v0: tuple[SpectralField, SpectralField], theta0: SpectralField, time: float = 0.0
) -> State:
    """Build a full State from (v0, theta0), diagnosing w."""
    v = (enforce_parity(v0[0], Parity.EVEN), enforce_parity(v0[1], Parity.EVEN))
    theta = enforce_parity(theta0, Parity.ODD)
    return State(v, diagnose_w(v), theta, time)


def random_initial_data(
    grid: Grid, seed: int, amplitude: float = 0.1, max_mode: int = 3
) -> tuple[tuple[SpectralField, SpectralField], SpectralField]:
    """Random smooth (v0, theta0) satisfying every hypothesis.

    Random low-mode noise is symmetrised in z, stripped of its barotropic
    divergence and of its mean.
    """
    rng = np.random.default_rng(seed)
    low = (
        (grid.mx <= max_mode)
        & (np.abs(grid.my) <= max_mode)
        & (np.abs(grid.mz) <= max_mode)
    )

    def noise(parity: Parity) -> SpectralField:
        values = grid.inverse(
            np.where(low, rng.standard_normal(grid.spectral_shape) + 1j * rng.standard_normal(grid.spectral_shape), 0)
        )
        f = enforce_parity(SpectralField.from_physical(grid, values), parity)
        c = f.coeffs.copy()
        c[0, 0, 0] = 0.0
        scale = amplitude / max(float(np.abs(f.grid.inverse(c)).max()), 1e-300)
        return f.replace(c * scale)

    v = remove_barotropic_divergence((noise(Parity.EVEN), noise(Parity.EVEN)))
    v = tuple(f.replace(_zero_mean(f.coeffs)) for f in v)
    return v, noise(Parity.ODD)


def _zero_mean(c: np.ndarray) -> np.ndarray:
    c = c.copy()
    c[0, 0, 0] = 0.0
    return c


# -- thin domain <-> fixed domain -------------------------------------------------


def _check_eps(eps: float) -> None:
    if not eps > 0:
        raise ParameterError(f"aspect ratio must be positive, got {eps}")


def rescale_to_fixed(v, w, p, theta, eps: float):
    """Map fields on the thin domain (grid depth eps) to the fixed domain (depth 1).

    v_eps(z) = v(eps z), w_eps = w(eps z) / eps, p_eps = p(eps z), theta_eps = eps theta(eps z).
    ``p`` may be None.
    """
    _check_eps(eps)
    thin = theta.grid
    if not np.isclose(thin.depth, eps, rtol=1e-14, atol=0):
        raise ParameterError(f"thin-domain grid has depth {thin.depth}, expected eps = {eps}")
    fixed = Grid(thin.nx, thin.ny, thin.nz, 1.0)

    def move(f: SpectralField, factor: float) -> SpectralField:
        return SpectralField(fixed, f.coeffs * factor, f.parity)

    return (
        (move(v[0], 1.0), move(v[1], 1.0)),
        move(w, 1.0 / eps),
        None if p is None else move(p, 1.0),
        move(theta, eps),
    )


def rescale_to_thin(v, w, p, theta, eps: float):
    """Inverse of :func:`rescale_to_fixed`."""
    _check_eps(eps)
    fixed = theta.grid
    thin = Grid(fixed.nx, fixed.ny, fixed.nz, eps)

    def move(f: SpectralField, factor: float) -> SpectralField:
        return SpectralField(thin, f.coeffs * factor, f.parity)

    return (
        (move(v[0], 1.0), move(v[1], 1.0)),
        move(w, eps),
        None if p is None else move(p, 1.0),
        move(theta, 1.0 / eps),
    )
