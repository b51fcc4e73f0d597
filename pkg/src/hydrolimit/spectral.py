"""Fourier grid and spectral fields on the periodic box [0, 2pi)^2 x [-depth, depth).

Coefficients are stored in the half-spectrum layout of a real transform taken
over x, i.e. arrays of shape ``(nx // 2 + 1, ny, nz)`` indexed by
``(kx >= 0, ky, m)`` in FFT order. They are normalised so that

    f(x, y, z) = sum_k c[k] exp(i (kx x + ky y + kz z)),   kz = pi m / depth.

The physical grid uses the same FFT ordering in z: ``z_j = 2 depth j / nz``
wrapped into ``[-depth, depth)``, which makes the reflection ``z -> -z`` a pure
index permutation ``m -> -m`` on coefficients.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import GaugeError, GridMismatchError, ParameterError, PeriodicityError

#: relative size below which a mode counts as zero in gauge/periodicity checks
ZERO_TOL = 1e-10


class Parity(enum.Enum):
    EVEN = "even"
    ODD = "odd"
    NONE = "none"

    def flipped(self) -> Parity:
        if self is Parity.EVEN:
            return Parity.ODD
        if self is Parity.ODD:
            return Parity.EVEN
        return Parity.NONE


@dataclass(frozen=True)
class Grid:
    """Mode counts of the periodic box.

    ``depth`` is the vertical half-height; it is 1 for the fixed domain and
    only differs when representing fields on the thin domain.
    """

    nx: int
    ny: int
    nz: int
    depth: float = 1.0

    def __post_init__(self):
        for name in ("nx", "ny", "nz"):
            n = getattr(self, name)
            if int(n) != n or n < 4 or n % 2:
                raise ParameterError(f"{name} must be an even integer >= 4, got {n}")
        if not self.depth > 0:
            raise ParameterError(f"depth must be positive, got {self.depth}")

    @property
    def shape(self) -> tuple[int, int, int]:
        return (self.nx, self.ny, self.nz)

    @property
    def spectral_shape(self) -> tuple[int, int, int]:
        return (self.nx // 2 + 1, self.ny, self.nz)

    @property
    def volume(self) -> float:
        return (2 * np.pi) ** 2 * 2 * self.depth

    @property
    def horizontal_area(self) -> float:
        return (2 * np.pi) ** 2

    # -- wavenumbers -------------------------------------------------------

    @cached_property
    def mx(self) -> np.ndarray:
        """Integer x-wavenumbers, broadcastable against coefficient arrays."""
        return np.arange(self.nx // 2 + 1)[:, None, None]

    @cached_property
    def my(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.ny, 1.0 / self.ny)).astype(int)[None, :, None]

    @cached_property
    def mz(self) -> np.ndarray:
        return np.rint(np.fft.fftfreq(self.nz, 1.0 / self.nz)).astype(int)[None, None, :]

    @cached_property
    def kx(self) -> np.ndarray:
        return self.mx.astype(float)

    @cached_property
    def ky(self) -> np.ndarray:
        return self.my.astype(float)

    @cached_property
    def kz(self) -> np.ndarray:
        return np.pi / self.depth * self.mz

    @cached_property
    def kh2(self) -> np.ndarray:
        return self.kx**2 + self.ky**2

    @cached_property
    def k2(self) -> np.ndarray:
        return self.kh2 + self.kz**2

    @cached_property
    def ikx(self) -> np.ndarray:
        # Nyquist modes are not differentiable in a real-valued sense; drop them.
        return 1j * np.where(self.mx == self.nx // 2, 0.0, self.kx)

    @cached_property
    def iky(self) -> np.ndarray:
        return 1j * np.where(np.abs(self.my) == self.ny // 2, 0.0, self.ky)

    @cached_property
    def ikz(self) -> np.ndarray:
        return 1j * np.where(np.abs(self.mz) == self.nz // 2, 0.0, self.kz)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        return (
            (self.mx <= self.nx / 3)
            & (np.abs(self.my) <= self.ny / 3)
            & (np.abs(self.mz) <= self.nz / 3)
        )

    @cached_property
    def max_retained_wavenumber(self) -> float:
        return max(
            self.nx // 3,
            self.ny // 3,
            np.pi / self.depth * (self.nz // 3),
        )

    @cached_property
    def parseval_weights(self) -> np.ndarray:
        w = np.full((self.nx // 2 + 1, 1, 1), 2.0)
        w[0] = 1.0
        w[-1] = 1.0
        return w

    @cached_property
    def reflect_index(self) -> np.ndarray:
        """Index permutation taking mode m to mode -m along z."""
        return (-np.arange(self.nz)) % self.nz

    # -- physical space ----------------------------------------------------

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = 2 * np.pi * np.arange(self.nx) / self.nx
        y = 2 * np.pi * np.arange(self.ny) / self.ny
        z = 2 * self.depth * np.fft.fftfreq(self.nz)
        return x, y, z

    def mesh(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return np.meshgrid(*self.coordinates(), indexing="ij")

    def forward(self, values: np.ndarray) -> np.ndarray:
        return sfft.rfftn(np.asarray(values, dtype=float), axes=(1, 2, 0), norm="forward")

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return sfft.irfftn(coeffs, s=(self.ny, self.nz, self.nx), axes=(1, 2, 0), norm="forward")

    # -- layout conversions -------------------------------------------------

    def full_spectrum(self, coeffs: np.ndarray) -> np.ndarray:
        """Expand half-spectrum coefficients to the full ``(nx, ny, nz)`` array."""
        full = np.empty(self.shape, dtype=complex)
        h = self.nx // 2 + 1
        full[:h] = coeffs
        neg_y = (-np.arange(self.ny)) % self.ny
        for kx in range(h, self.nx):
            full[kx] = np.conj(coeffs[self.nx - kx][neg_y][:, self.reflect_index])
        return full

    def half_spectrum(self, full: np.ndarray) -> np.ndarray:
        return np.array(full[: self.nx // 2 + 1], dtype=complex)

    def padded(self, factor: int = 2) -> Grid:
        return Grid(self.nx * factor, self.ny * factor, self.nz * factor, self.depth)

    def pad(self, coeffs: np.ndarray, factor: int = 2) -> np.ndarray:
        """Zero-pad coefficients onto ``self.padded(factor)`` (band-limited interpolation)."""
        big = self.padded(factor)
        out = np.zeros(big.spectral_shape, dtype=complex)
        # Nyquist planes are dropped; every other mode keeps its signed index.
        ix = np.arange(self.nx // 2)
        iy = np.where(np.abs(self.my.ravel()) < self.ny // 2)[0]
        iz = np.where(np.abs(self.mz.ravel()) < self.nz // 2)[0]
        by = self.my.ravel()[iy] % big.ny
        bz = self.mz.ravel()[iz] % big.nz
        out[np.ix_(ix, by, bz)] = coeffs[np.ix_(ix, iy, iz)]
        return out


def check_same_grid(*grids: Grid) -> Grid:
    first = grids[0]
    for g in grids[1:]:
        if g != first:
            raise GridMismatchError(f"grid mismatch: {first} vs {g}")
    return first


@dataclass(frozen=True, eq=False)
class SpectralField:
    """One real scalar field stored by its Fourier coefficients."""

    grid: Grid
    coeffs: np.ndarray
    parity: Parity = Parity.NONE

    def __post_init__(self):
        if self.coeffs.shape != self.grid.spectral_shape:
            raise ValueError(
                f"coefficient shape {self.coeffs.shape} does not match grid {self.grid.spectral_shape}"
            )

    @classmethod
    def from_physical(cls, grid: Grid, values, parity: Parity = Parity.NONE) -> SpectralField:
        values = np.broadcast_to(np.asarray(values, dtype=float), grid.shape)
        return cls(grid, grid.forward(values), parity)

    @classmethod
    def zeros(cls, grid: Grid, parity: Parity = Parity.NONE) -> SpectralField:
        return cls(grid, np.zeros(grid.spectral_shape, dtype=complex), parity)

    def physical(self) -> np.ndarray:
        return self.grid.inverse(self.coeffs)

    def replace(self, coeffs: np.ndarray, parity: Parity | None = None) -> SpectralField:
        return SpectralField(self.grid, coeffs, self.parity if parity is None else parity)

    def norm(self) -> float:
        """L2 norm over the box, by Parseval."""
        return l2_norm(self.grid, self.coeffs)

    def mean(self) -> float:
        return float(self.coeffs[0, 0, 0].real)

    def _combine(self, other: SpectralField, coeffs: np.ndarray) -> SpectralField:
        parity = self.parity if self.parity is other.parity else Parity.NONE
        return SpectralField(self.grid, coeffs, parity)

    def __add__(self, other: SpectralField) -> SpectralField:
        check_same_grid(self.grid, other.grid)
        return self._combine(other, self.coeffs + other.coeffs)

    def __sub__(self, other: SpectralField) -> SpectralField:
        check_same_grid(self.grid, other.grid)
        return self._combine(other, self.coeffs - other.coeffs)

    def __neg__(self) -> SpectralField:
        return self.replace(-self.coeffs)

    def __mul__(self, scalar: float) -> SpectralField:
        return self.replace(self.coeffs * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: float) -> SpectralField:
        return self.replace(self.coeffs / scalar)


def l2_norm_sq(grid: Grid, coeffs: np.ndarray) -> float:
    return float(grid.volume * np.sum(grid.parseval_weights * (coeffs.real**2 + coeffs.imag**2)))


def l2_norm(grid: Grid, coeffs: np.ndarray) -> float:
    return float(np.sqrt(l2_norm_sq(grid, coeffs)))


def inner(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """L2 inner product of two real fields given by coefficients."""
    return float(grid.volume * np.sum(grid.parseval_weights * (a * np.conj(b)).real))


# -- parity ------------------------------------------------------------------


def reflect_z(grid: Grid, coeffs: np.ndarray) -> np.ndarray:
    return coeffs[:, :, grid.reflect_index]


def parity_part(grid: Grid, coeffs: np.ndarray, parity: Parity) -> np.ndarray:
    if parity is Parity.NONE:
        return coeffs
    sign = 1.0 if parity is Parity.EVEN else -1.0
    return 0.5 * (coeffs + sign * reflect_z(grid, coeffs))


def enforce_parity(f: SpectralField, parity: Parity) -> SpectralField:
    """Project onto the even or odd part in z, ``(f(z) +/- f(-z)) / 2``."""
    return SpectralField(f.grid, parity_part(f.grid, f.coeffs, parity), parity)


def parity_residual(f: SpectralField, parity: Parity | None = None) -> float:
    """Relative L2 size of the part of ``f`` with the wrong z-symmetry."""
    parity = f.parity if parity is None else parity
    if parity is Parity.NONE:
        return 0.0
    wrong = f.coeffs - parity_part(f.grid, f.coeffs, parity)
    total = f.norm()
    return l2_norm(f.grid, wrong) / total if total > 0 else 0.0


# -- differentiation and dealiasing -------------------------------------------


def derivative(f: SpectralField, axis: str) -> SpectralField:
    g = f.grid
    if axis == "x":
        return f.replace(g.ikx * f.coeffs)
    if axis == "y":
        return f.replace(g.iky * f.coeffs)
    if axis == "z":
        return f.replace(g.ikz * f.coeffs, f.parity.flipped())
    raise ParameterError(f"axis must be 'x', 'y' or 'z', got {axis!r}")


def dealias(f: SpectralField) -> SpectralField:
    """Two-thirds rule: zero every mode with |kx| > nx/3, |ky| > ny/3 or |m| > nz/3."""
    return f.replace(np.where(f.grid.dealias_mask, f.coeffs, 0.0))


def laplacian(f: SpectralField) -> SpectralField:
    return f.replace(-f.grid.k2 * f.coeffs)


def divergence_h(v1: SpectralField, v2: SpectralField) -> SpectralField:
    g = check_same_grid(v1.grid, v2.grid)
    parity = v1.parity if v1.parity is v2.parity else Parity.NONE
    return SpectralField(g, g.ikx * v1.coeffs + g.iky * v2.coeffs, parity)


# -- elliptic solves ------------------------------------------------------------


def _gauge_scale(coeffs: np.ndarray) -> float:
    return max(1.0, float(np.abs(coeffs).max(initial=0.0)))


def poisson_aniso(rhs: SpectralField, eps: float) -> SpectralField:
    """Solve ``(Lap_h + eps**-2 d_zz) p = rhs`` with zero mean."""
    if not eps > 0:
        raise ParameterError(f"aspect ratio must be positive, got {eps}")
    c = rhs.coeffs
    if abs(c[0, 0, 0]) > ZERO_TOL * _gauge_scale(c):
        raise GaugeError(f"right-hand side has nonzero mean {c[0, 0, 0].real:.3e}")
    g = rhs.grid
    symbol = -(g.kh2 + g.kz**2 / eps**2)
    symbol[0, 0, 0] = 1.0
    p = c / symbol
    p[0, 0, 0] = 0.0
    return rhs.replace(p)


def is_z_independent(f: SpectralField) -> bool:
    rest = f.coeffs[:, :, 1:]
    return bool(np.abs(rest).max(initial=0.0) <= ZERO_TOL * _gauge_scale(f.coeffs))


def z_mean(f: SpectralField) -> SpectralField:
    """Vertical average as a z-independent field (the m = 0 slab)."""
    out = np.zeros_like(f.coeffs)
    out[:, :, 0] = f.coeffs[:, :, 0]
    return SpectralField(f.grid, out, Parity.EVEN)


def poisson_horizontal(rhs: SpectralField) -> SpectralField:
    """Solve ``-Lap_h p = rhs`` on the torus for a z-independent ``rhs``; zero mean."""
    if not is_z_independent(rhs):
        raise ParameterError("poisson_horizontal expects a z-independent (horizontal) field")
    c = rhs.coeffs
    if abs(c[0, 0, 0]) > ZERO_TOL * _gauge_scale(c):
        raise GaugeError(f"right-hand side has nonzero horizontal mean {c[0, 0, 0].real:.3e}")
    g = rhs.grid
    symbol = g.kh2[:, :, 0].copy()
    symbol[0, 0] = 1.0
    out = np.zeros_like(c)
    out[:, :, 0] = c[:, :, 0] / symbol
    out[0, 0, 0] = 0.0
    return SpectralField(g, out, Parity.EVEN)


def vertical_antiderivative(f: SpectralField, lower: float) -> SpectralField:
    """Return F with ``d_z F = f`` and ``F(lower) = 0``, for ``lower`` in {-1, 0}.

    ``lower`` is in units of the half-depth. Requires every horizontal mode of
    ``f`` to have zero vertical mean, otherwise F is not periodic.
    """
    if lower not in (-1, 0):
        raise ParameterError(f"lower limit must be -1 or 0, got {lower}")
    g = f.grid
    c = f.coeffs
    slab = np.abs(c[:, :, 0])
    bad = np.argwhere(slab > ZERO_TOL * _gauge_scale(c))
    if bad.size:
        modes = [(int(g.mx.ravel()[i]), int(g.my.ravel()[j])) for i, j in bad]
        raise PeriodicityError(
            f"vertical mean is nonzero for {len(modes)} horizontal mode(s), e.g. {modes[:5]}; "
            "the antiderivative would not be periodic",
            modes,
        )
    ikz = g.ikz.copy()
    nonzero = ikz != 0
    F = np.zeros_like(c)
    np.divide(c, ikz, out=F, where=np.broadcast_to(nonzero, c.shape))
    phase = np.exp(1j * g.kz * lower * g.depth)
    F[:, :, 0] = -np.sum(F * phase, axis=2)
    return SpectralField(g, F, f.parity.flipped())
