"""
Single-ring temporal coupled-mode theory for a symmetric add-drop ring.

A resonance is described by its center frequency and two amplitude decay
rates: ``gamma_e`` per bus coupler and the intrinsic ``gamma_i``. Both
couplers are identical, so the loaded rate is ``gamma_tot = 2*gamma_e +
gamma_i`` and quality factors follow ``Q = omega0 / (2*gamma)``.

Transfer functions (phase convention of the field amplitudes)::

    h(w) = -i*sqrt(2*gamma_e) / (i*(w - w0) + gamma_tot)   # input -> intracavity
    t(w) = 2*gamma_e / (i*(w - w0) + gamma_tot)            # input -> drop
    T_H(w) = |1 - t(w)|**2                                 # through-port power

so that ``t = i*sqrt(2*gamma_e)*h`` pointwise and ``T_d = |t(w0)|**2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from numpy.typing import ArrayLike

from .core import ComplexSpectrum, FrequencyGrid
from .errors import (
    AmbiguousPeakError,
    InconsistentQError,
    InvalidArgumentError,
    LosslessDegenerateError,
    SpanTooNarrowError,
)


class BandLabel(str, Enum):
    PUMP = "pump"
    SIGNAL = "signal"
    IDLER = "idler"


@dataclass(frozen=True)
class ResonanceBand:
    """
    One ring resonance.

    Parameters
    ----------
    label : BandLabel
        Which wave the resonance hosts.
    omega0 : float
        Resonance angular frequency [rad/s].
    gamma_e : float
        Extrinsic amplitude decay rate of one coupler [rad/s], > 0.
    gamma_i : float
        Intrinsic amplitude decay rate [rad/s], >= 0 (0 is lossless).
    """

    label: BandLabel
    omega0: float
    gamma_e: float
    gamma_i: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "label", BandLabel(self.label))
        if not self.omega0 > 0:
            raise InvalidArgumentError(f"omega0 must be positive, got {self.omega0}")
        if not self.gamma_e > 0:
            raise InvalidArgumentError(f"gamma_e must be positive, got {self.gamma_e}")
        if not self.gamma_i >= 0:
            raise InvalidArgumentError(f"gamma_i must be non-negative, got {self.gamma_i}")

    @property
    def gamma_tot(self) -> float:
        return 2.0 * self.gamma_e + self.gamma_i

    @property
    def lossless(self) -> bool:
        return self.gamma_i == 0.0


@dataclass(frozen=True)
class QTriple:
    """Loaded, intrinsic and extrinsic quality factors (``q_i`` may be ``inf``)."""

    q_tot: float
    q_i: float
    q_e: float

    def __post_init__(self) -> None:
        if not (self.q_tot > 0 and self.q_e > 0 and self.q_i > 0):
            raise InvalidArgumentError(f"quality factors must be positive: {self}")
        inv_i = 0.0 if math.isinf(self.q_i) else 1.0 / self.q_i
        lhs, rhs = 1.0 / self.q_tot, 2.0 / self.q_e + inv_i
        if abs(lhs - rhs) > 1e-12 * lhs:
            raise InconsistentQError(
                f"1/q_tot = {lhs:.6e} but 2/q_e + 1/q_i = {rhs:.6e}"
            )
        if not (self.q_tot < self.q_e and self.q_tot < self.q_i):
            raise InconsistentQError("q_tot must be smaller than q_e and q_i")

    @classmethod
    def from_loaded(cls, q_tot: float, q_e: float) -> "QTriple":
        """Complete a triple from the measured ``q_tot`` and ``q_e``."""
        if not (q_tot > 0 and q_e > 0):
            raise InvalidArgumentError("q_tot and q_e must be positive")
        inv_i = 1.0 / q_tot - 2.0 / q_e
        if inv_i < -1e-12 / q_tot:
            raise InconsistentQError(
                f"q_tot={q_tot:g} and q_e={q_e:g} imply a negative intrinsic loss "
                "(need q_e >= 2*q_tot)"
            )
        q_i = math.inf if inv_i <= 0 else 1.0 / inv_i
        # rebuild q_tot so the triple is consistent to round-off
        q_tot = 1.0 / (2.0 / q_e + (0.0 if math.isinf(q_i) else 1.0 / q_i))
        return cls(q_tot=q_tot, q_i=q_i, q_e=q_e)

    @property
    def lossless(self) -> bool:
        return math.isinf(self.q_i)


def band_from_q(omega0: float, q: QTriple, label: BandLabel | str = BandLabel.SIGNAL) -> ResonanceBand:
    """Build a band from ``q.q_tot`` and ``q.q_e``; ``gamma_i`` is derived."""
    gamma_tot = omega0 / (2.0 * q.q_tot)
    gamma_e = omega0 / (2.0 * q.q_e)
    gamma_i = gamma_tot - 2.0 * gamma_e
    if gamma_i < 0:
        if gamma_i < -1e-12 * gamma_tot:
            raise InconsistentQError(f"derived gamma_i = {gamma_i:.3e} rad/s is negative")
        gamma_i = 0.0
    return ResonanceBand(label, omega0, gamma_e, gamma_i)


def q_from_band(b: ResonanceBand) -> QTriple:
    q_i = math.inf if b.lossless else b.omega0 / (2.0 * b.gamma_i)
    return QTriple(q_tot=b.omega0 / (2.0 * b.gamma_tot), q_i=q_i, q_e=b.omega0 / (2.0 * b.gamma_e))


def band_from_td(omega0: float, q_tot: float, t_d: float, label: BandLabel | str = BandLabel.SIGNAL) -> ResonanceBand:
    """
    Band with a fixed loaded Q and a chosen on-resonance drop transmittance.

    ``sqrt(T_d) = 2*gamma_e/gamma_tot``, hence ``Q_i = Q_tot/(1 - sqrt(T_d))``;
    ``t_d == 1`` gives a lossless band.
    """
    if not 0 < t_d <= 1:
        raise InvalidArgumentError(f"t_d must be in (0, 1], got {t_d}")
    if not q_tot > 0:
        raise InvalidArgumentError(f"q_tot must be positive, got {q_tot}")
    gamma_tot = omega0 / (2.0 * q_tot)
    root = math.sqrt(t_d)
    return ResonanceBand(label, omega0, 0.5 * root * gamma_tot, (1.0 - root) * gamma_tot)


def h_transfer(omega: ArrayLike, b: ResonanceBand):
    """Intracavity energy amplitude per unit input amplitude, ``h(omega)``."""
    omega = np.asarray(omega, dtype=float)
    return -1j * math.sqrt(2.0 * b.gamma_e) / (1j * (omega - b.omega0) + b.gamma_tot)


def drop_amplitude(omega: ArrayLike, b: ResonanceBand):
    """Input-to-drop field amplitude ``t(omega)``."""
    omega = np.asarray(omega, dtype=float)
    return 2.0 * b.gamma_e / (1j * (omega - b.omega0) + b.gamma_tot)


def through_transmittance(omega: ArrayLike, b: ResonanceBand):
    """Through-port power transmittance ``|1 - t(omega)|**2``."""
    return np.abs(1.0 - drop_amplitude(omega, b)) ** 2


def td_on_resonance(b: ResonanceBand) -> float:
    """On-resonance drop transmittance ``(2*gamma_e/gamma_tot)**2``."""
    return (2.0 * b.gamma_e / b.gamma_tot) ** 2


def q_intrinsic_from_td(q_tot: float, t_d: float) -> float:
    """``Q_i = Q_tot/(1 - sqrt(T_d))``; singular for a lossless ring."""
    if not t_d > 0:
        raise InvalidArgumentError(f"t_d must be positive, got {t_d}")
    if t_d >= 1:
        raise LosslessDegenerateError("t_d >= 1 means a lossless ring: Q_i is infinite")
    return q_tot / (1.0 - math.sqrt(t_d))


def drop_transmittance_from_xi(xi: float) -> float:
    """
    Drop transmittance from ``xi = Q_i/Q_e`` using the coupled-mode relation
    ``sqrt(T_d) = 2*xi/(2*xi + 1)``.

    :func:`superfwm.scaling.td_from_xi` is the alternative closed form
    ``(1 - 1/(2*(1 + xi)))**2``; the two differ by a few percent at
    realistic ``xi``.
    """
    if not xi > 0:
        raise InvalidArgumentError(f"xi must be positive, got {xi}")
    return (2.0 * xi / (2.0 * xi + 1.0)) ** 2


def extinction_ratio_db(b: ResonanceBand) -> float:
    """Through-port on-resonance extinction, ``20*log10(1 - 2*gamma_e/gamma_tot)``."""
    depth = 1.0 - 2.0 * b.gamma_e / b.gamma_tot
    return -math.inf if depth <= 0 else 20.0 * math.log10(depth)


def cascade_drop_spectrum(b: ResonanceBand, n: int, grid: FrequencyGrid) -> ComplexSpectrum:
    """Power transmitted through ``n`` identical cascaded drops, ``|t|**(2n)``."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"n must be a positive integer, got {n}")
    single = np.abs(drop_amplitude(grid.nodes, b)) ** 2
    return ComplexSpectrum(grid, single ** int(n))


def cascade_fwhm_closed_form(b: ResonanceBand, n: int) -> float:
    """Analytic FWHM of ``|t|**(2n)``: ``2*gamma_tot*sqrt(2**(1/n) - 1)``."""
    return 2.0 * b.gamma_tot * math.sqrt(2.0 ** (1.0 / n) - 1.0)


def fwhm(spec: ComplexSpectrum) -> float:
    """
    Full width at half maximum of a single-peaked intensity spectrum.

    Each half-maximum crossing is located by linear interpolation between the
    bracketing nodes. A flat-topped maximum is centered on its plateau.

    Raises
    ------
    SpanTooNarrowError
        If a crossing is not inside the grid (including flat spectra).
    AmbiguousPeakError
        If the samples above half maximum form more than one run.
    """
    y = np.real(np.asarray(spec.values, dtype=complex))
    x = spec.grid.nodes
    top = y.max()
    if not top > 0:
        raise SpanTooNarrowError("spectrum has no positive maximum")
    half = 0.5 * top
    above = y > half
    # runs of consecutive samples above half maximum
    edges = np.diff(above.astype(np.int8))
    starts = list(np.flatnonzero(edges == 1) + 1)
    stops = list(np.flatnonzero(edges == -1))
    if above[0]:
        starts.insert(0, 0)
    if above[-1]:
        stops.append(len(y) - 1)
    if len(starts) > 1:
        raise AmbiguousPeakError(f"{len(starts)} separate peaks above half maximum")
    lo, hi = starts[0], stops[0]
    if lo == 0 or hi == len(y) - 1:
        raise SpanTooNarrowError("half-maximum crossing lies outside the grid")

    def crossing(i_out: int, i_in: int) -> float:
        y0, y1 = y[i_out], y[i_in]
        return x[i_out] + (half - y0) * (x[i_in] - x[i_out]) / (y1 - y0)

    return float(crossing(hi + 1, hi) - crossing(lo - 1, lo))
