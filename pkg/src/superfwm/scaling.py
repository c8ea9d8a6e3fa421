"""
Closed-form scaling laws of the array rate with the number of rings.

Each drop event transmits a fraction ``t_d`` of the on-resonance power. Ring
``j`` of an ``N``-ring chain then contributes an output amplitude ``A_j`` and
the normalized efficiencies are ``|sum_j A_j|**2`` (coherent) or
``sum_j |A_j|**2`` (incoherent):

* stimulated FWM, ``A_j = t_d**((N - 3)/2 + j)``
* spontaneous FWM without spectral filtering, ``A_j = t_d**(N - 1)``

The module also holds the large-``N`` machinery for a lossless CW chain:
integrals of powers of a Lorentzian and the partial-sum rate whose log-log
slope tends to 3/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping

import numpy as np

from .errors import InvalidArgumentError


class Process(str, Enum):
    STIMULATED = "stimulated"
    SPONTANEOUS_UNFILTERED = "spontaneous_unfiltered"
    INCOHERENT = "incoherent"
    SPONTANEOUS_FULL_CW = "spontaneous_full_cw"
    SPONTANEOUS_FULL_PULSED = "spontaneous_full_pulsed"
    ASYMPTOTIC = "asymptotic"


_NORMALIZED = {
    Process.STIMULATED,
    Process.SPONTANEOUS_UNFILTERED,
    Process.INCOHERENT,
    Process.SPONTANEOUS_FULL_CW,
    Process.SPONTANEOUS_FULL_PULSED,
}


@dataclass(frozen=True)
class ScalingSeries:
    """Normalized rate versus ring count for one process."""

    process: Process
    t_d: float
    values: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "process", Process(self.process))
        _check_td(self.t_d)
        vals = {int(k): float(v) for k, v in sorted(self.values.items())}
        for n, v in vals.items():
            if n < 1:
                raise InvalidArgumentError(f"ring counts must be >= 1, got {n}")
            if not (math.isfinite(v) and v >= 0):
                raise InvalidArgumentError(f"value at N={n} must be finite and >= 0, got {v}")
        if self.process in _NORMALIZED and 1 in vals and abs(vals[1] - 1.0) > 1e-9:
            raise InvalidArgumentError(f"normalized series must equal 1 at N=1, got {vals[1]}")
        object.__setattr__(self, "values", vals)

    @property
    def ns(self) -> np.ndarray:
        return np.array(list(self.values.keys()), dtype=int)

    def as_array(self) -> np.ndarray:
        return np.array(list(self.values.values()), dtype=float)


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"ring count must be a positive integer, got {n}")
    return int(n)


def _check_td(t_d) -> float:
    if not 0 < t_d <= 1:
        raise InvalidArgumentError(f"t_d must be in (0, 1], got {t_d}")
    return float(t_d)


def _geometric(ratio: float, n: int) -> float:
    """``sum_{k<n} ratio**k``, exact at ``ratio == 1``."""
    if ratio == 1.0:
        return float(n)
    lr = math.log(ratio)
    return math.expm1(n * lr) / math.expm1(lr)


def xi_stim(n: int, t_d: float) -> float:
    """Stimulated efficiency ``t_d**(N-1) * ((1 - t_d**N)/(1 - t_d))**2``."""
    n, t_d = _check_n(n), _check_td(t_d)
    return t_d ** (n - 1) * _geometric(t_d, n) ** 2


def xi_spont_unfiltered(n: int, t_d: float) -> float:
    """
    Spontaneous efficiency ignoring spectral filtering, ``(N * t_d**(N-1))**2``.

    Every ring's pairs reach the output with the same amplitude
    ``t_d**(N-1)``: the pump loses ``t_d`` per drop before ring ``j`` and the
    rate is quadratic in pump power, while the pair loses ``t_d`` per drop
    after it.
    """
    n, t_d = _check_n(n), _check_td(t_d)
    return t_d ** (2 * (n - 1)) * n * n


def xi_incoherent(n: int, t_d: float) -> float:
    """Incoherent sum ``t_d**(N-1) * (1 - t_d**(2N))/(1 - t_d**2)``."""
    n, t_d = _check_n(n), _check_td(t_d)
    return t_d ** (n - 1) * _geometric(t_d * t_d, n)


def amplitude_sum_oracle(n: int, t_d: float, process: Process | str) -> float:
    """
    Brute-force sum of per-ring amplitudes, normalized to a single ring.

    ``process`` is ``"stimulated"``, ``"spontaneous_unfiltered"`` (also
    ``"spontaneous"``) or ``"incoherent"``.
    """
    n, t_d = _check_n(n), _check_td(t_d)
    if process == "spontaneous":
        process = Process.SPONTANEOUS_UNFILTERED
    try:
        process = Process(process)
    except ValueError:
        raise InvalidArgumentError(f"unknown process {process!r}") from None
    j = np.arange(1, n + 1)
    stim = t_d ** ((n - 3) / 2.0 + j)
    if process is Process.STIMULATED:
        # single ring: A_1 = t_d**((1 - 3)/2 + 1) = 1
        return float(np.sum(stim) ** 2)
    if process is Process.SPONTANEOUS_UNFILTERED:
        return float(np.sum(np.full(n, t_d ** (n - 1))) ** 2)
    if process is Process.INCOHERENT:
        return float(np.sum(stim**2))
    raise InvalidArgumentError(f"no amplitude oracle for process {process.value!r}")


def _log_gamma_ratio(i: int) -> float:
    # log(Gamma(i - 1/2) / Gamma(i))
    return math.lgamma(i - 0.5) - math.lgamma(i)


def lorentzian_power_integral(i: int, gamma_tot: float) -> float:
    """
    ``integral L(w)**i dw`` for ``L = gamma**2/(gamma**2 + w**2)``.

    Equals ``sqrt(pi) * gamma * Gamma(i - 1/2)/Gamma(i)``: ``pi*gamma`` for
    ``i = 1`` and ``pi*gamma/2`` for ``i = 2``.
    """
    if int(i) != i or i < 1:
        raise InvalidArgumentError(f"power must be a positive integer, got {i}")
    if not gamma_tot > 0:
        raise InvalidArgumentError(f"gamma_tot must be positive, got {gamma_tot}")
    return math.sqrt(math.pi) * gamma_tot * math.exp(_log_gamma_ratio(int(i)))


def lorentzian_power_integral_approx(i: int, gamma_tot: float) -> float:
    """Large-``i`` form ``gamma * sqrt(pi/i)``."""
    if int(i) != i or i < 1:
        raise InvalidArgumentError(f"power must be a positive integer, got {i}")
    return gamma_tot * math.sqrt(math.pi / i)


def lossless_cw_rate(n: int) -> float:
    """
    ``R(N)/R(1)`` of a lossless chain of identical rings under CW pumping.

    Source ``q`` has amplitude ``L**(N - q + 1)`` along the energy-conserving
    line, so ``R(N)/R(1) = sum_{m,k<=N} int L**(m+k) / int L**2``.
    """
    n = _check_n(n)
    ref = lorentzian_power_integral(2, 1.0)
    return sum(lorentzian_power_integral(m + k, 1.0) for m in range(1, n + 1) for k in range(1, n + 1)) / ref


def _asymptotic_sums(n: int) -> float:
    k = np.arange(1, n, dtype=float)
    second = np.sum(k / np.sqrt(2.0 * n - k + 1.0)) if n > 1 else 0.0
    return asymptotic_first_sum(n) + float(second)


def asymptotic_first_sum(n: int) -> float:
    """``sum_{i=1..N} i/sqrt(i + 1)``, growing like ``(2/3) * N**1.5``."""
    n = _check_n(n)
    i = np.arange(1, n + 1, dtype=float)
    return float(np.sum(i / np.sqrt(i + 1.0)))


def asymptotic_first_sum_integral(n: int) -> float:
    """Integral estimate of the first sum, ``(2/3)*sqrt(N+1)*(N-2) + 4/3``."""
    n = _check_n(n)
    return 2.0 / 3.0 * math.sqrt(n + 1.0) * (n - 2.0) + 4.0 / 3.0


def log_asymptotic_beta2(n: int, t_d: float) -> float:
    """Natural log of :func:`asymptotic_beta2`; finite for any N."""
    n, t_d = _check_n(n), _check_td(t_d)
    return 2.0 * n * math.log(t_d) + math.log(_asymptotic_sums(n))


def asymptotic_beta2(n: int, t_d: float) -> float:
    """
    Unnormalized large-``N`` rate of a CW chain::

        t_d**(2N) * (sum_{i<=N} i/sqrt(i+1) + sum_{i<=N-1} i/sqrt(2N-i+1))

    May underflow to 0 for lossy chains at large N; use
    :func:`log_asymptotic_beta2` there.
    """
    return math.exp(log_asymptotic_beta2(n, t_d))


def loglog_slope(ns, log_values) -> float:
    """Least-squares slope of ``log_values`` against ``log(ns)``."""
    x = np.log(np.asarray(ns, dtype=float))
    y = np.asarray(log_values, dtype=float)
    if x.size < 3:
        raise InvalidArgumentError(f"exponent fit needs at least 3 points, got {x.size}")
    return float(np.polyfit(x, y, 1)[0])


def asymptotic_exponent(n_min: int, n_max: int, t_d: float = 1.0) -> float:
    """
    Exponent ``b`` of ``|beta_N|**2 ~ N**b`` over ``n_min <= N <= n_max``.

    The loss factor ``t_d**(2N)`` is divided out before fitting, so the
    result measures the filtering-limited growth only.
    """
    n_min, n_max = _check_n(n_min), _check_n(n_max)
    t_d = _check_td(t_d)
    if n_min < 10 or n_max <= n_min:
        raise InvalidArgumentError(f"need n_max > n_min >= 10, got [{n_min}, {n_max}]")
    ns = np.arange(n_min, n_max + 1)
    logs = [log_asymptotic_beta2(n, t_d) - 2.0 * n * math.log(t_d) for n in ns]
    return loglog_slope(ns, logs)


def td_from_xi(xi: float) -> float:
    """
    Drop transmittance ``(1 - 1/(2*(1 + xi)))**2`` from ``xi = Q_i/Q_e``.

    The coupled-mode form used to build bands is
    :func:`superfwm.tcmt.drop_transmittance_from_xi`; at ``xi = 3.64`` this
    expression gives 0.796 against 0.773 there.
    """
    if not xi > 0:
        raise InvalidArgumentError(f"xi must be positive, got {xi}")
    return (1.0 - 1.0 / (2.0 * (1.0 + xi))) ** 2


def closed_form_series(process: Process | str, t_d: float, n_max: int) -> ScalingSeries:
    """Series N = 1..n_max of one of the three closed forms."""
    process = Process(process)
    funcs = {
        Process.STIMULATED: xi_stim,
        Process.SPONTANEOUS_UNFILTERED: xi_spont_unfiltered,
        Process.INCOHERENT: xi_incoherent,
    }
    if process not in funcs:
        raise InvalidArgumentError(f"{process.value!r} has no closed form")
    f = funcs[process]
    return ScalingSeries(process, t_d, {n: f(n, t_d) for n in range(1, _check_n(n_max) + 1)})
