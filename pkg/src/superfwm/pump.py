"""
Pump spectral amplitudes.

Three pump models are supported:

* :class:`CWPump` - a monochromatic line. It has no finite spectral density,
  so downstream code evaluates everything at the line frequency instead of
  integrating over the pump spectrum.
* :class:`GaussianPump` - transform-limited pulse with a given power-spectrum
  FWHM.
* :class:`TabulatedPump` - measured amplitude samples, linearly interpolated
  and zero outside the sampled range.

Pulsed amplitudes are real, non-negative and normalized so that
``integral |phi_p(omega)|**2 d omega = 1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .core import wavelength_to_omega
from .errors import DataFormatError, InvalidArgumentError, ModeMismatchError
from .tcmt import ResonanceBand

_FWHM_TO_SIGMA = 1.0 / (2.0 * math.sqrt(2.0 * math.log(2.0)))


@dataclass(frozen=True)
class CWPump:
    omega_p0: float

    def __post_init__(self) -> None:
        if not self.omega_p0 > 0:
            raise InvalidArgumentError(f"omega_p0 must be positive, got {self.omega_p0}")


@dataclass(frozen=True)
class GaussianPump:
    """
    Gaussian pulse spectrum.

    Parameters
    ----------
    omega_p0 : float
        Carrier angular frequency [rad/s].
    fwhm : float
        FWHM of the power spectrum ``|phi_p|**2`` [rad/s].
    """

    omega_p0: float
    fwhm: float

    def __post_init__(self) -> None:
        if not self.omega_p0 > 0:
            raise InvalidArgumentError(f"omega_p0 must be positive, got {self.omega_p0}")
        if not self.fwhm > 0:
            raise InvalidArgumentError(f"Gaussian fwhm must be positive, got {self.fwhm}")

    @property
    def sigma(self) -> float:
        """Standard deviation of the power spectrum [rad/s]."""
        return self.fwhm * _FWHM_TO_SIGMA


@dataclass(frozen=True)
class TabulatedPump:
    """
    Sampled pump amplitude, normalized on construction.

    ``omegas`` must be strictly increasing with at least 8 samples; the
    stored ``amplitudes`` are rescaled so the piecewise-linear interpolant
    has unit squared norm.
    """

    omegas: NDArray[np.float64]
    amplitudes: NDArray[np.float64]

    def __post_init__(self) -> None:
        w = np.array(self.omegas, dtype=float)
        a = np.array(self.amplitudes, dtype=float)
        if w.ndim != 1 or w.shape != a.shape:
            raise InvalidArgumentError("omegas and amplitudes must be 1-D arrays of equal length")
        if len(w) < 8:
            raise InvalidArgumentError(f"tabulated pump needs >= 8 samples, got {len(w)}")
        if np.any(np.diff(w) <= 0):
            raise InvalidArgumentError("tabulated frequencies must be strictly increasing")
        if np.any(a < 0) or not np.any(a > 0):
            raise InvalidArgumentError("amplitudes must be non-negative with at least one positive")
        a = a / math.sqrt(_piecewise_linear_sq_norm(w, a))
        w.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "amplitudes", a)

    @property
    def omega_p0(self) -> float:
        """Power-weighted mean frequency [rad/s]."""
        w, a = self.omegas, self.amplitudes
        return float(np.sum(w * a**2) / np.sum(a**2))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, TabulatedPump)
            and np.array_equal(self.omegas, other.omegas)
            and np.array_equal(self.amplitudes, other.amplitudes)
        )

    def __hash__(self) -> int:
        return hash((self.omegas.tobytes(), self.amplitudes.tobytes()))


PumpSpec = Union[CWPump, GaussianPump, TabulatedPump]


def _piecewise_linear_sq_norm(w: NDArray, a: NDArray) -> float:
    # exact integral of the squared linear interpolant
    h = np.diff(w)
    a0, a1 = a[:-1], a[1:]
    return float(np.sum(h * (a0 * a0 + a0 * a1 + a1 * a1) / 3.0))


def is_cw(p: PumpSpec) -> bool:
    return isinstance(p, CWPump)


def pump_center(p: PumpSpec) -> float:
    return p.omega_p0


def pump_amplitude(p: PumpSpec, omega: ArrayLike):
    """Normalized real pump amplitude ``phi_p(omega)``; CW pumps are rejected."""
    omega = np.asarray(omega, dtype=float)
    if isinstance(p, GaussianPump):
        s = p.sigma
        density = np.exp(-0.5 * ((omega - p.omega_p0) / s) ** 2) / (s * math.sqrt(2.0 * math.pi))
        return np.sqrt(density)
    if isinstance(p, TabulatedPump):
        return np.interp(omega, p.omegas, p.amplitudes, left=0.0, right=0.0)
    if isinstance(p, CWPump):
        raise ModeMismatchError("a CW pump has no finite spectral amplitude; use the CW path")
    raise InvalidArgumentError(f"unknown pump type {type(p).__name__}")


def pump_norm(p: PumpSpec) -> float:
    """Exact squared norm of a pulsed pump (1 for every constructed pump)."""
    if isinstance(p, GaussianPump):
        return 1.0
    if isinstance(p, TabulatedPump):
        return _piecewise_linear_sq_norm(p.omegas, p.amplitudes)
    raise ModeMismatchError("a CW pump has no finite spectral norm")


def default_pulsed_pump(b_pump: ResonanceBand) -> GaussianPump:
    """Gaussian pump twice as broad as the ring drop line (FWHM ``4*gamma_tot``)."""
    return GaussianPump(b_pump.omega0, 2.0 * (2.0 * b_pump.gamma_tot))


def load_tabulated_pump(path: str | Path, power: bool = False) -> TabulatedPump:
    """
    Read a ``wavelength_nm amplitude`` text file (``#`` starts a comment).

    With ``power=True`` the second column is a power spectrum and its square
    root is taken. The wavelength-to-frequency Jacobian is ignored: it is
    constant to better than 1e-3 across a resonance and the result is
    renormalized anyway.
    """
    path = Path(path)
    rows = []
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(path, None, f"cannot read pump file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) != 2:
            raise DataFormatError(path, lineno, f"expected 2 columns, got {len(parts)}")
        try:
            lam, amp = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise DataFormatError(path, lineno, str(exc)) from exc
        if lam <= 0 or amp < 0:
            raise DataFormatError(path, lineno, "wavelength must be > 0 and amplitude >= 0")
        rows.append((lam, amp))
    if not rows:
        raise DataFormatError(path, None, "no samples found")
    lam, amp = np.array(rows).T
    if power:
        amp = np.sqrt(amp)
    omegas = wavelength_to_omega(lam)
    order = np.argsort(omegas)
    try:
        return TabulatedPump(omegas[order], amp[order])
    except InvalidArgumentError as exc:
        raise DataFormatError(path, None, str(exc)) from exc
