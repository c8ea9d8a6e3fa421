"""
Joint spectral amplitudes of photon pairs emitted by a chain of add-drop rings.

Ring ``q`` of an ``N``-ring chain sees the pump after ``q - 1`` drops and its
pairs reach the output after ``N - q`` further drops. With ``t`` the drop
amplitude and ``h`` the intracavity response of a band, the per-source kernel
is::

    j_q = [t_p^(q-1) h_p](w3) [t_p^(q-1) h_p](w4)
          * [t_s^(N-q) h_s](w1) [t_i^(N-q) h_i](w2)

Expanding ``t = i*sqrt(2*gamma_e)*h`` gives the prefactor form
``(-2*sqrt(ge_s*ge_i))**(N-q) * (-2*ge_p)**(q-1) * h_p^q h_p^q h_s^m h_i^m``
with ``m = N - q + 1``; the ``t``-chain form is used because every factor is
dimensionless and bounded.

The source amplitude integrates the kernel against the pump::

    phi_q(w1, w2) = e^{i q dk L} * int phi_p(w) phi_p(w1 + w2 - w)
                                    j_q(w1, w2, w, w1 + w2 - w) dw

The pump-dependent part only depends on ``w1 + w2``, so for a pulsed pump it is
computed once per source as a 1-D discrete convolution and broadcast on the
2-D grid. For a CW pump the integral collapses onto ``w = w_p0`` and the idler
is pinned to ``2*w_p0 - w1``; the amplitude then lives on a line and all
integrals become 1-D along the signal axis.

Only ratios of integrals are returned, so the overall constants (nonlinear
coupling, mode overlap, pump normalization of the CW line) never appear.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence, Union

import numpy as np
from numpy.typing import NDArray

from .core import ComplexGrid2D, ComplexSpectrum, FrequencyGrid, make_grid, trapezoid
from .errors import DegenerateSourceError, InvalidArgumentError
from .pump import CWPump, PumpSpec, is_cw, pump_amplitude, pump_norm
from .tcmt import BandLabel, ResonanceBand, drop_amplitude, h_transfer

#: 2-D grid used for pulsed pumps: +-10 loaded half-linewidths, 801 x 801.
PULSED_SPAN = 10.0
PULSED_POINTS = 801
#: CW line integrals are 1-D and cheap, so the span is wide enough that the
#: Lorentzian tails beyond it are below 1e-7 of the integral.
CW_SPAN = 400.0
CW_POINTS = 40001

_POW_LOG_THRESHOLD = 30


@dataclass(frozen=True)
class ArraySpec:
    """
    A chain of ``n`` identical, spectrally aligned add-drop rings.

    Parameters
    ----------
    n : int
        Number of rings.
    spacing_L : float
        Ring-to-ring separation [m].
    pump, signal, idler : ResonanceBand
        Resonances shared by every ring.
    delta_k_bar : float
        Mean phase mismatch ``2 k_p0 - k_s0 - k_i0`` [1/m].
    """

    n: int
    spacing_L: float
    pump: ResonanceBand
    signal: ResonanceBand
    idler: ResonanceBand
    delta_k_bar: float = 0.0

    def __post_init__(self) -> None:
        if int(self.n) != self.n or self.n < 1:
            raise InvalidArgumentError(f"ring count must be a positive integer, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        if not self.spacing_L > 0:
            raise InvalidArgumentError(f"ring spacing must be positive, got {self.spacing_L}")
        mismatch = abs(2.0 * self.pump.omega0 - self.signal.omega0 - self.idler.omega0)
        gamma_min = min(b.gamma_tot for b in (self.pump, self.signal, self.idler))
        if not mismatch < gamma_min:
            raise InvalidArgumentError(
                f"resonances are not energy matched: |2w_p - w_s - w_i| = {mismatch:.4g} rad/s "
                f">= gamma_tot = {gamma_min:.4g} rad/s"
            )
        if not self.n * self.spacing_L * abs(self.delta_k_bar) < math.pi / 10:
            raise InvalidArgumentError(
                "N*L*|delta_k_bar| must stay below pi/10 (chain much shorter than the "
                "four-wave-mixing coherence length)"
            )

    def with_n(self, n: int) -> "ArraySpec":
        return replace(self, n=n)

    @property
    def coherence_length(self) -> float:
        """``pi/|delta_k_bar|`` [m] (infinite when phase matched)."""
        return math.inf if self.delta_k_bar == 0 else math.pi / abs(self.delta_k_bar)


@dataclass(frozen=True)
class JsaGrid:
    """Signal (``omega_1``) and idler (``omega_2``) axes of a JSA."""

    signal: FrequencyGrid
    idler: FrequencyGrid


def default_jsa_grid(
    arr: ArraySpec,
    pump: PumpSpec,
    span: float | None = None,
    points: int | None = None,
) -> JsaGrid:
    """
    Grids centered on the signal and idler resonances.

    Both axes share one spacing (required by the pulsed path); the half-span
    is ``span`` times the broader of the two loaded linewidths.
    """
    cw = is_cw(pump)
    span = (CW_SPAN if cw else PULSED_SPAN) if span is None else span
    points = (CW_POINTS if cw else PULSED_POINTS) if points is None else points
    halfspan = span * max(arr.signal.gamma_tot, arr.idler.gamma_tot)
    return JsaGrid(
        make_grid(arr.signal.omega0, halfspan, points),
        make_grid(arr.idler.omega0, halfspan, points),
    )


def _cpow(z, k: int):
    """Integer power of a complex array; log-magnitude/phase form for large k."""
    if k == 0:
        return np.ones_like(z)
    if k <= _POW_LOG_THRESHOLD:
        return z**k
    return np.exp(k * np.log(z))


def _chain(b: ResonanceBand, passes: int, omega):
    """``t(omega)**passes * h(omega)``: intracavity amplitude after ``passes`` drops."""
    return _cpow(drop_amplitude(omega, b), passes) * h_transfer(omega, b)


def _check_index(q: int, n: int) -> None:
    if int(q) != q or not 1 <= q <= n:
        raise InvalidArgumentError(f"source index must be in 1..{n}, got {q}")


def source_kernel(q: int, arr: ArraySpec, omegas: Sequence) -> complex:
    """
    Per-source nonlinear kernel ``j_q(w1, w2, w3, w4)``.

    ``omegas`` holds the signal, idler and the two pump frequencies; array
    arguments broadcast.
    """
    _check_index(q, arr.n)
    w1, w2, w3, w4 = omegas
    out_passes = arr.n - q
    return (
        _chain(arr.pump, q - 1, w3)
        * _chain(arr.pump, q - 1, w4)
        * _chain(arr.signal, out_passes, w1)
        * _chain(arr.idler, out_passes, w2)
    )


def _phase(q: int, arr: ArraySpec) -> complex:
    return complex(np.exp(1j * q * arr.delta_k_bar * arr.spacing_L))


def _sum_frequency_amplitude(q: int, arr: ArraySpec, pump: PumpSpec, grid: JsaGrid) -> NDArray:
    """
    ``P_q(S) = int phi_p(w) phi_p(S - w) f(w) f(S - w) dw`` with
    ``f = phi_p * t_p^(q-1) h_p``, sampled at every ``S = w1 + w2`` of the grid.

    Pump nodes sit on the half-lattice of the sum frequencies, so the integral
    is a discrete convolution. The integrand vanishes at the lattice ends, where
    the trapezoid and rectangle rules coincide.
    """
    d = grid.signal.spacing
    ns, ni = grid.signal.points, grid.idler.points
    m = -(-(ns + ni) // 2)
    pad = m // 2
    size = m + 2 * pad
    base = grid.signal.nodes[0] + grid.idler.nodes[0]
    omega = 0.5 * base + (np.arange(size) - pad) * d
    f = pump_amplitude(pump, omega) * _chain(arr.pump, q - 1, omega)
    conv = np.convolve(f, f) * d
    return conv[2 * pad : 2 * pad + ns + ni - 1]


def _check_pulsed_inputs(pump: PumpSpec, grid: JsaGrid) -> None:
    if abs(pump_norm(pump) - 1.0) > 1e-6:
        raise InvalidArgumentError("pulsed pump amplitude is not normalized")
    ds, di = grid.signal.spacing, grid.idler.spacing
    if abs(ds - di) > 1e-9 * ds:
        raise InvalidArgumentError(
            "pulsed JSA needs equal signal and idler grid spacing "
            f"(got {ds:.6g} and {di:.6g} rad/s)"
        )


def _source_values(q: int, arr: ArraySpec, pump: PumpSpec, grid: JsaGrid) -> NDArray:
    out_passes = arr.n - q
    if is_cw(pump):
        wp = pump.omega_p0
        w1 = grid.signal.nodes
        pair = _chain(arr.signal, out_passes, w1) * _chain(arr.idler, out_passes, 2.0 * wp - w1)
        pump_part = _chain(arr.pump, q - 1, wp) ** 2
        return _phase(q, arr) * pump_part * pair
    s = _chain(arr.signal, out_passes, grid.signal.nodes)
    i = _chain(arr.idler, out_passes, grid.idler.nodes)
    p = _sum_frequency_amplitude(q, arr, pump, grid)
    idx = np.add.outer(np.arange(grid.signal.points), np.arange(grid.idler.points))
    return _phase(q, arr) * np.outer(s, i) * p[idx]


def phi_q(
    q: int, arr: ArraySpec, pump: PumpSpec, grid: JsaGrid | None = None
) -> Union[ComplexGrid2D, ComplexSpectrum]:
    """
    Unnormalized amplitude of source ``q``.

    Returns a :class:`ComplexGrid2D` for pulsed pumps and, for a CW pump, a
    :class:`ComplexSpectrum` over the signal axis with the idler pinned to
    ``2*w_p0 - w1``.
    """
    _check_index(q, arr.n)
    grid = default_jsa_grid(arr, pump) if grid is None else grid
    if is_cw(pump):
        return ComplexSpectrum(grid.signal, _source_values(q, arr, pump, grid))
    _check_pulsed_inputs(pump, grid)
    return ComplexGrid2D(grid.signal, grid.idler, _source_values(q, arr, pump, grid))


def _overlap(a: NDArray, b: NDArray, grid: JsaGrid, cw: bool) -> complex:
    prod = a * np.conj(b)
    if cw:
        return complex(trapezoid(prod, grid.signal))
    inner = np.sum(prod * grid.idler.weights[np.newaxis, :], axis=1)
    return complex(np.sum(inner * grid.signal.weights))


@dataclass(frozen=True)
class SourceDecomposition:
    """
    Per-source amplitudes of an ``N``-ring chain and their overlaps.

    Attributes
    ----------
    phi : list
        ``phi_q`` for q = 1..N (2-D grids, or 1-D lines for a CW pump).
    brightness_raw : ndarray
        ``B'_j = integral |phi_j|**2`` (coupling constant set to 1).
    indistinguishability : ndarray
        Hermitian ``I_jk = integral phi_j phi_k^* / sqrt(B'_j B'_k)``.
    """

    arr: ArraySpec
    pump: PumpSpec
    grid: JsaGrid
    phi: list = field(repr=False)
    brightness_raw: NDArray = field(repr=False)
    indistinguishability: NDArray = field(repr=False)

    @property
    def n(self) -> int:
        return self.arr.n

    @property
    def cw(self) -> bool:
        return is_cw(self.pump)


def decompose(arr: ArraySpec, pump: PumpSpec, grid: JsaGrid | None = None) -> SourceDecomposition:
    """Source amplitudes, raw brightness and the indistinguishability matrix."""
    grid = default_jsa_grid(arr, pump) if grid is None else grid
    cw = is_cw(pump)
    if not cw:
        _check_pulsed_inputs(pump, grid)
    phis = [_source_values(q, arr, pump, grid) for q in range(1, arr.n + 1)]
    n = arr.n
    gram = np.zeros((n, n), dtype=complex)
    for j in range(n):
        for k in range(j, n):
            gram[j, k] = _overlap(phis[j], phis[k], grid, cw)
            gram[k, j] = np.conj(gram[j, k])
    bright = gram.diagonal().real.copy()
    bad = [j + 1 for j in range(n) if not (np.isfinite(bright[j]) and bright[j] > 0)]
    if bad:
        raise DegenerateSourceError(f"sources {bad} have zero brightness on this grid")
    norm = np.sqrt(np.outer(bright, bright))
    indist = gram / norm
    np.fill_diagonal(indist, 1.0)
    if cw:
        wrapped = [ComplexSpectrum(grid.signal, v) for v in phis]
    else:
        wrapped = [ComplexGrid2D(grid.signal, grid.idler, v) for v in phis]
    return SourceDecomposition(arr, pump, grid, wrapped, bright, indist)


def _reference_value(dec: SourceDecomposition, reference) -> float:
    if isinstance(reference, SourceDecomposition):
        if reference.n != 1:
            raise InvalidArgumentError("reference decomposition must describe a single ring")
        if reference.grid != dec.grid or reference.pump != dec.pump:
            raise InvalidArgumentError("reference was computed on a different grid or pump")
        reference = reference.brightness_raw[0]
    reference = float(reference)
    if not reference > 0:
        raise InvalidArgumentError(f"single-ring brightness must be positive, got {reference}")
    return reference


def relative_brightness(dec: SourceDecomposition, reference) -> NDArray:
    """
    ``B_j = B'_j / B'^(1)`` for j = 1..N.

    ``reference`` is the single-ring decomposition (checked for a matching
    grid and pump) or its raw brightness.
    """
    return dec.brightness_raw / _reference_value(dec, reference)


def rate_from_decomposition(dec: SourceDecomposition, reference) -> float:
    """``sum_jk sqrt(B_j B_k) I_jk`` (the phase-mismatch factor lives in ``phi``)."""
    b = np.sqrt(relative_brightness(dec, reference))
    return float(np.real(b @ dec.indistinguishability @ b))


def coherent_sum_rate(dec: SourceDecomposition, reference: SourceDecomposition) -> float:
    """Direct ``integral |sum_j phi_j|**2 / integral |phi^(1)|**2``."""
    total = np.sum([p.values for p in dec.phi], axis=0)
    num = _overlap(total, total, dec.grid, dec.cw).real
    return float(num / _reference_value(dec, reference))


def incoherent_reference_rate(dec: SourceDecomposition, reference) -> float:
    """Rate with the interference terms removed, ``sum_j B_j``."""
    return float(np.sum(relative_brightness(dec, reference)))


def normalized_rate(arr: ArraySpec, pump: PumpSpec, grid: JsaGrid | None = None) -> float:
    """``R(N)/R(1)`` of the chain, with ``N = arr.n``."""
    grid = default_jsa_grid(arr, pump) if grid is None else grid
    ref = decompose(arr.with_n(1), pump, grid)
    if arr.n == 1:
        return rate_from_decomposition(ref, ref)
    return rate_from_decomposition(decompose(arr, pump, grid), ref)


@dataclass(frozen=True)
class RateCurveResult:
    """Coherent and incoherent normalized rates for N = 1..n_max."""

    ns: NDArray
    coherent: NDArray
    incoherent: NDArray
    brightness: list
    indistinguishability: list


def rate_curve(arr: ArraySpec, pump: PumpSpec, grid: JsaGrid | None = None, n_max: int | None = None) -> RateCurveResult:
    """Evaluate the chain for every N up to ``n_max`` (default ``arr.n``)."""
    n_max = arr.n if n_max is None else int(n_max)
    grid = default_jsa_grid(arr, pump) if grid is None else grid
    ref = decompose(arr.with_n(1), pump, grid)
    coh, inc, bright, indist = [], [], [], []
    for n in range(1, n_max + 1):
        dec = ref if n == 1 else decompose(arr.with_n(n), pump, grid)
        coh.append(rate_from_decomposition(dec, ref))
        inc.append(incoherent_reference_rate(dec, ref))
        bright.append(relative_brightness(dec, ref))
        indist.append(dec.indistinguishability)
    return RateCurveResult(np.arange(1, n_max + 1), np.array(coh), np.array(inc), bright, indist)


def pump_power_at_source(arr: ArraySpec, pump: PumpSpec, j: int, omega=None):
    """
    Pump power spectrum entering ring ``j`` after ``j - 1`` drops.

    For a pulsed pump returns ``|phi_p(w)|**2 |t_p(w)|**(2(j-1))`` at ``omega``;
    for a CW pump the transmitted line power ``|t_p(w_p0)|**(2(j-1))``.
    """
    _check_index(j, arr.n)
    if isinstance(pump, CWPump):
        return float(np.abs(drop_amplitude(pump.omega_p0, arr.pump)) ** (2 * (j - 1)))
    omega = np.asarray(omega, dtype=float)
    return pump_amplitude(pump, omega) ** 2 * np.abs(drop_amplitude(omega, arr.pump)) ** (2 * (j - 1))


def identical_array(n: int, band: ResonanceBand, spacing_L: float = 500e-6, delta_k_bar: float = 0.0) -> ArraySpec:
    """
    Chain whose signal, pump and idler resonances share ``band``'s decay rates.

    The signal and idler sit one linewidth-independent offset (0.5% of the
    pump frequency) either side of the pump so the model has three distinct,
    exactly energy-matched bands.
    """
    offset = 5e-3 * band.omega0
    mk = lambda label, w0: ResonanceBand(label, w0, band.gamma_e, band.gamma_i)  # noqa: E731
    return ArraySpec(
        n,
        spacing_L,
        mk(BandLabel.PUMP, band.omega0),
        mk(BandLabel.SIGNAL, band.omega0 - offset),
        mk(BandLabel.IDLER, band.omega0 + offset),
        delta_k_bar,
    )
