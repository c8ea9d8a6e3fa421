"""
Frequency grids, quadrature and unit conversions.

Everything downstream works in angular frequency (rad/s). Grids are uniform
and symmetric about their center, and integrals use the composite trapezoid
rule; the integrands met here (products of Lorentzians and Gaussians) are
smooth, so no adaptive scheme is needed.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidArgumentError

C_VACUUM = 299792458.0  # [m/s]

#: Default resolution for 1-D spectra: +-10 loaded half-linewidths, 2001 nodes.
DEFAULT_SPAN = 10.0
DEFAULT_POINTS = 2001


@dataclass(frozen=True)
class FrequencyGrid:
    """
    Uniform grid ``center + linspace(-halfspan, halfspan, points)``.

    Parameters
    ----------
    center : float
        Grid center [rad/s].
    halfspan : float
        Half-width of the sampled interval [rad/s].
    points : int
        Number of nodes, at least 3.
    """

    center: float
    halfspan: float
    points: int

    def __post_init__(self) -> None:
        if not np.isfinite(self.center):
            raise InvalidArgumentError(f"grid center must be finite, got {self.center}")
        if not self.halfspan > 0 or not np.isfinite(self.halfspan):
            raise InvalidArgumentError(f"grid halfspan must be positive, got {self.halfspan}")
        if int(self.points) != self.points or self.points < 3:
            raise InvalidArgumentError(f"grid needs at least 3 points, got {self.points}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.halfspan / (self.points - 1)

    @cached_property
    def offsets(self) -> NDArray[np.float64]:
        """Node positions relative to the center [rad/s]."""
        return np.linspace(-self.halfspan, self.halfspan, self.points)

    @cached_property
    def nodes(self) -> NDArray[np.float64]:
        """Absolute node positions [rad/s]."""
        return self.center + self.offsets

    @cached_property
    def weights(self) -> NDArray[np.float64]:
        """Composite trapezoid weights."""
        w = np.full(self.points, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w


def make_grid(center: float, halfspan: float, points: int) -> FrequencyGrid:
    """Build a uniform grid symmetric about ``center``."""
    return FrequencyGrid(float(center), float(halfspan), int(points))


@dataclass(frozen=True)
class ComplexSpectrum:
    """Complex (or real) samples of a function on a :class:`FrequencyGrid`."""

    grid: FrequencyGrid
    values: NDArray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (self.grid.points,):
            raise InvalidArgumentError(
                f"spectrum has shape {values.shape}, grid has {self.grid.points} points"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True)
class ComplexGrid2D:
    """Samples of a two-frequency function; rows follow ``grid1``, columns ``grid2``."""

    grid1: FrequencyGrid
    grid2: FrequencyGrid
    values: NDArray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.shape != (self.grid1.points, self.grid2.points):
            raise InvalidArgumentError(
                f"matrix shape {values.shape} does not match grids "
                f"({self.grid1.points}, {self.grid2.points})"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)


def trapezoid(values: ArrayLike, grid: FrequencyGrid):
    """Trapezoid integral of raw samples on ``grid``."""
    values = np.asarray(values)
    return np.sum(values * grid.weights)


def integrate_1d(f: ComplexSpectrum) -> complex:
    """Composite trapezoid value of the integral of ``f`` over its grid."""
    return complex(trapezoid(f.values, f.grid))


def integrate_2d(f: ComplexGrid2D) -> complex:
    """Iterated trapezoid integral over both axes of ``f``."""
    inner = np.sum(f.values * f.grid2.weights[np.newaxis, :], axis=1)
    return complex(np.sum(inner * f.grid1.weights))


def db_to_linear(x_db: ArrayLike):
    """Convert a power ratio from dB to linear scale, ``10**(x/10)``."""
    return np.power(10.0, np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x: ArrayLike):
    """Convert a positive power ratio to dB, ``10*log10(x)``."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0)):
        raise InvalidArgumentError("linear_to_db needs strictly positive input")
    return 10.0 * np.log10(x)


def wavelength_to_omega(wavelength_nm: ArrayLike):
    """Vacuum wavelength [nm] to angular frequency [rad/s]."""
    lam = np.asarray(wavelength_nm, dtype=float)
    if np.any(~(lam > 0)):
        raise InvalidArgumentError("wavelength must be positive")
    return 2.0 * np.pi * C_VACUUM / (lam * 1e-9)


def omega_to_wavelength(omega: ArrayLike):
    """Angular frequency [rad/s] to vacuum wavelength [nm]."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * np.pi * C_VACUUM / omega * 1e9


def bandwidth_omega_to_nm(d_omega: float, omega0: float) -> float:
    """Small angular-frequency interval around ``omega0`` expressed in nm."""
    return float(omega_to_wavelength(omega0)) ** 2 * d_omega / (2.0 * np.pi * C_VACUUM * 1e9)


def bandwidth_nm_to_omega(d_lambda_nm: float, wavelength_nm: float) -> float:
    """Small wavelength interval [nm] around ``wavelength_nm`` in rad/s."""
    return 2.0 * np.pi * C_VACUUM * 1e9 * d_lambda_nm / wavelength_nm**2
