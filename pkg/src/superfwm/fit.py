"""
Parameter recovery from measured curves.

* :func:`fit_td` finds the drop transmittance that best reproduces a
  normalized rate-versus-N curve. Loaded Q factors stay at their measured
  values and ``Q_i = Q_tot/(1 - sqrt(T_d))`` follows each candidate.
* :func:`fit_through_spectrum` extracts ``(omega0, gamma_e, gamma_tot)`` of a
  resonance from a through-port transmission dip.
* :func:`power_law_slope` is the log-log slope of rate versus pump power.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .core import wavelength_to_omega
from .errors import DataFormatError, InvalidArgumentError, NoMinimumError, NoResonanceError
from .jsa import ArraySpec, default_jsa_grid, rate_curve
from .pump import CWPump, PumpSpec, default_pulsed_pump
from .scaling import xi_stim
from .tcmt import BandLabel, ResonanceBand, band_from_td, through_transmittance

TD_BRACKET = (0.3, 0.999)
TD_TOL = 1e-4
#: Points per axis of the pulsed JSA grid while searching and for the final residual.
SEARCH_POINTS = 401
FINAL_POINTS = 801

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


class FitProcess(str, Enum):
    STIMULATED = "stimulated"
    SPONTANEOUS_CW = "spontaneous_cw"
    SPONTANEOUS_PULSED = "spontaneous_pulsed"


@dataclass(frozen=True)
class RatePoint:
    n: int
    rate: float
    sigma: float | None = None


@dataclass(frozen=True)
class RateCurve:
    """Measured rate versus ring count, normalized to the first ring."""

    process: FitProcess
    points: tuple

    def __post_init__(self) -> None:
        object.__setattr__(self, "process", FitProcess(self.process))
        pts = tuple(p if isinstance(p, RatePoint) else RatePoint(*p) for p in self.points)
        if not pts:
            raise InvalidArgumentError("rate curve is empty")
        ns = [p.n for p in pts]
        if ns[0] != 1 or any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidArgumentError("ring counts must start at 1 and strictly increase")
        if abs(pts[0].rate - 1.0) > 1e-6:
            raise InvalidArgumentError(f"curve is not normalized: rate at N=1 is {pts[0].rate}")
        for p in pts:
            if not (math.isfinite(p.rate) and p.rate >= 0):
                raise InvalidArgumentError(f"rate at N={p.n} must be finite and >= 0")
            if p.sigma is not None and not p.sigma > 0:
                raise InvalidArgumentError(f"sigma at N={p.n} must be positive")
        if len({p.sigma is None for p in pts}) > 1:
            raise InvalidArgumentError("give sigma for every point or for none")
        object.__setattr__(self, "points", pts)

    @property
    def ns(self) -> np.ndarray:
        return np.array([p.n for p in self.points])

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate for p in self.points])

    @property
    def weights(self) -> np.ndarray:
        if self.points[0].sigma is None:
            return np.ones(len(self.points))
        return np.array([1.0 / p.sigma**2 for p in self.points])


@dataclass(frozen=True)
class FitModel:
    """
    Fixed part of the model: resonance frequencies and loaded linewidths.

    Only ``omega0`` and ``gamma_tot`` of the template bands are used; the
    split into ``gamma_e`` and ``gamma_i`` is set by each candidate ``T_d``.
    ``pump`` defaults to a CW line at the pump resonance or to the default
    Gaussian pulse, depending on the process.
    """

    template: ArraySpec
    pump: PumpSpec | None = None

    def array_at(self, t_d: float, n: int | None = None) -> ArraySpec:
        def rebuild(b: ResonanceBand) -> ResonanceBand:
            q_tot = b.omega0 / (2.0 * b.gamma_tot)
            return band_from_td(b.omega0, q_tot, t_d, b.label)

        t = self.template
        return ArraySpec(
            t.n if n is None else n,
            t.spacing_L,
            rebuild(t.pump),
            rebuild(t.signal),
            rebuild(t.idler),
            t.delta_k_bar,
        )

    def pump_for(self, process: FitProcess) -> PumpSpec:
        if self.pump is not None:
            return self.pump
        if process is FitProcess.SPONTANEOUS_CW:
            return CWPump(self.template.pump.omega0)
        return default_pulsed_pump(self.template.pump)


@dataclass(frozen=True)
class FitResult:
    t_d_fit: float
    residual: float
    evaluations: int
    model_curve: tuple = field(default=())

    def __post_init__(self) -> None:
        if not 0 < self.t_d_fit < 1:
            raise InvalidArgumentError(f"t_d_fit must be in (0, 1), got {self.t_d_fit}")
        if not self.residual >= 0:
            raise InvalidArgumentError(f"residual must be >= 0, got {self.residual}")


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float = TD_TOL
) -> tuple[float, float, int]:
    """
    Minimize a unimodal ``f`` on ``[a, b]``.

    Returns ``(x, f(x), evaluations)``. The bracket shrinks until it is
    narrower than ``tol``; the evaluation sequence depends only on ``a``,
    ``b`` and ``tol``.
    """
    if not b > a:
        raise InvalidArgumentError(f"empty bracket [{a}, {b}]")
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    evals = 2
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = f(d)
        evals += 1
    x, fx = (c, fc) if fc <= fd else (d, fd)
    return x, fx, evals


def model_rates(
    process: FitProcess | str,
    t_d: float,
    ns: Sequence[int],
    model: FitModel | None = None,
    points: int | None = None,
) -> np.ndarray:
    """Model normalized rate at each N of ``ns`` for one candidate ``T_d``."""
    process = FitProcess(process)
    ns = [int(n) for n in ns]
    if process is FitProcess.STIMULATED:
        return np.array([xi_stim(n, t_d) for n in ns])
    if model is None:
        raise InvalidArgumentError("spontaneous processes need a FitModel")
    arr = model.array_at(t_d, max(ns))
    pump = model.pump_for(process)
    grid = default_jsa_grid(arr, pump) if process is FitProcess.SPONTANEOUS_CW else default_jsa_grid(arr, pump, points=points)
    curve = rate_curve(arr, pump, grid).coherent
    return curve[np.asarray(ns) - 1]


def fit_td(
    curve: RateCurve,
    model: FitModel | None = None,
    bracket: tuple[float, float] = TD_BRACKET,
    tol: float = TD_TOL,
) -> FitResult:
    """
    Least-squares drop transmittance of a measured rate curve.

    The objective is ``sum w_N (model(N) - data(N))**2`` with ``w = 1/sigma**2``
    when uncertainties are present and 1 otherwise. Pulsed-pump models are
    searched on a 401-point grid and the final residual is recomputed at 801.

    Raises
    ------
    InvalidArgumentError
        Fewer than 3 points, or a spontaneous process without a model.
    NoMinimumError
        The minimum sits on the bracket edge.
    """
    if len(curve.points) < 3:
        raise InvalidArgumentError(f"fit needs at least 3 points, got {len(curve.points)}")
    process = curve.process
    ns, data, w = curve.ns, curve.rates, curve.weights
    coarse = SEARCH_POINTS if process is FitProcess.SPONTANEOUS_PULSED else None
    cache: dict = {}

    def objective(t: float) -> float:
        if t not in cache:
            m = model_rates(process, t, ns, model, coarse)
            cache[t] = float(np.sum(w * (m - data) ** 2))
        return cache[t]

    lo, hi = bracket
    x, fx, evals = golden_section(objective, lo, hi, tol)
    if x - lo < tol or hi - x < tol:
        raise NoMinimumError(f"objective keeps decreasing toward the bracket edge (T_d = {x:.4f})")
    final = model_rates(process, x, ns, model, FINAL_POINTS if coarse else None)
    residual = float(np.sum(w * (final - data) ** 2))
    return FitResult(x, residual, evals + 1, tuple(zip(ns.tolist(), final.tolist())))


def load_rate_curve_csv(path: str | Path, process: FitProcess | str) -> RateCurve:
    """Read ``N,rate[,sigma]`` (header row required)."""
    rows = _read_csv(path, [["N", "rate"], ["N", "rate", "sigma"]])
    points = []
    for lineno, vals in rows:
        n = vals[0]
        if n != int(n):
            raise DataFormatError(path, lineno, f"N must be an integer, got {n}")
        points.append(RatePoint(int(n), vals[1], vals[2] if len(vals) > 2 else None))
    try:
        return RateCurve(process, tuple(points))
    except InvalidArgumentError as exc:
        raise DataFormatError(path, None, str(exc)) from exc


def _read_csv(path, headers) -> list:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(path, None, f"cannot read file: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DataFormatError(path, None, "file is empty")
    header = [h.strip() for h in rows[0]]
    if header not in headers:
        raise DataFormatError(path, 1, "header must be " + " or ".join(",".join(h) for h in headers))
    out = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise DataFormatError(path, lineno, f"expected {len(header)} columns, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise DataFormatError(path, lineno, str(exc)) from exc
        if not all(math.isfinite(v) for v in vals):
            raise DataFormatError(path, lineno, "values must be finite")
        out.append((lineno, vals))
    if not out:
        raise DataFormatError(path, None, "no data rows")
    return out


@dataclass(frozen=True)
class ThroughFit:
    band: ResonanceBand
    residual: float


def _dip_width(omega: np.ndarray, t: np.ndarray, i0: int, level: float) -> float:
    lo = i0
    while lo > 0 and t[lo] < level:
        lo -= 1
    hi = i0
    while hi < len(t) - 1 and t[hi] < level:
        hi += 1
    if t[lo] < level or t[hi] < level:
        raise InvalidArgumentError("dip is not resolved inside the sampled range")

    def cross(i_out, i_in):
        return omega[i_out] + (level - t[i_out]) * (omega[i_in] - omega[i_out]) / (t[i_in] - t[i_out])

    return cross(hi, hi - 1) - cross(lo, lo + 1)


def fit_through_spectrum(
    omega, transmittance, label: BandLabel | str = BandLabel.SIGNAL
) -> ThroughFit:
    """
    Fit ``|1 - t(omega)|**2`` to a through-port dip.

    The starting point takes ``omega0`` from the deepest sample, ``gamma_tot``
    from the full width at half depth (equal to ``2*gamma_tot``) and
    ``2*gamma_e/gamma_tot = 1 - sqrt(T_min)``. A bounded least-squares
    refinement follows in coordinates scaled by the initial linewidth.

    A fitted ``gamma_i`` below zero (noise on a critically coupled dip) is
    clamped to 0 with a warning.
    """
    w = np.asarray(omega, dtype=float)
    t = np.asarray(transmittance, dtype=float)
    if w.ndim != 1 or w.shape != t.shape:
        raise InvalidArgumentError("omega and transmittance must be 1-D arrays of equal length")
    if w.size < 10:
        raise InvalidArgumentError(f"need at least 10 samples, got {w.size}")
    order = np.argsort(w)
    w, t = w[order], t[order]
    i0 = int(np.argmin(t))
    t_min = float(t[i0])
    if not t_min < 0.9 * float(np.median(t)):
        raise NoResonanceError("no transmission dip found")
    x0 = 1.0 - math.sqrt(max(t_min, 0.0))
    width = _dip_width(w, t, i0, 0.5 * (1.0 + t_min))
    g0 = 0.5 * width
    w0 = float(w[i0])
    if w[-1] - w[0] < 3.0 * width:
        raise InvalidArgumentError("samples must span at least 3 linewidths")

    u = (w - w0) / g0

    def resid(p):
        du, g, x = p
        tt = np.abs(1.0 - x * g / (1j * (u - du) + g)) ** 2
        return tt - t

    sol = least_squares(
        resid,
        x0=[0.0, 1.0, min(x0, 1.999)],
        bounds=([-10.0, 1e-3, 0.0], [10.0, 1e3, 2.0]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
        max_nfev=2000,
    )
    du, g, x = sol.x
    omega0 = w0 + du * g0
    gamma_tot = g * g0
    gamma_e = 0.5 * x * gamma_tot
    gamma_i = gamma_tot - 2.0 * gamma_e
    if gamma_i < 0:
        warnings.warn(f"fitted gamma_i = {gamma_i:.3e} rad/s is negative; clamped to 0", RuntimeWarning, stacklevel=2)
        gamma_e, gamma_i = 0.5 * gamma_tot, 0.0
    band = ResonanceBand(label, omega0, gamma_e, gamma_i)
    residual = float(np.sum((through_transmittance(w, band) - t) ** 2))
    return ThroughFit(band, residual)


def load_spectrum_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    """Read ``wavelength_nm,transmittance``; returns ``(omega, T)`` sorted by omega."""
    rows = _read_csv(path, [["wavelength_nm", "transmittance"]])
    lam = np.array([v[0] for _, v in rows])
    if np.any(lam <= 0):
        raise DataFormatError(path, None, "wavelengths must be positive")
    omega = wavelength_to_omega(lam)
    t = np.array([v[1] for _, v in rows])
    order = np.argsort(omega)
    return omega[order], t[order]


def power_law_slope(powers, rates) -> float:
    """Least-squares slope of ``log(rate)`` against ``log(power)``."""
    p = np.asarray(powers, dtype=float)
    r = np.asarray(rates, dtype=float)
    if p.shape != r.shape or p.ndim != 1:
        raise InvalidArgumentError("powers and rates must be 1-D arrays of equal length")
    if p.size < 3:
        raise InvalidArgumentError(f"need at least 3 points, got {p.size}")
    if np.any(~(p > 0)) or np.any(~(r > 0)):
        raise InvalidArgumentError("powers and rates must be positive")
    return float(np.polyfit(np.log(p), np.log(r), 1)[0])
