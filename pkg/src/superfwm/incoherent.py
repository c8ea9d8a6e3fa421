"""
Incoherent array rate rebuilt from single-ring coincidence measurements.

Ring ``j`` is measured alone, pumped with the power it would receive inside
the chain, ``P_j = P_1 * t_d**(j - 1)``. Its pairs would then cross
``N - j`` further drops, which transmit the fraction ``T_jN`` of them (CW
pump, idler pinned to ``2*w_p0 - w1``)::

    T_jN = int |t_s^(m-1) h_s(w1) t_i^(m-1) h_i(2 w_p0 - w1)|**2 dw1
           / int |h_s(w1) h_i(2 w_p0 - w1)|**2 dw1,      m = N - j + 1

The incoherent rate is ``R(N) = sum_j T_jN C_j`` reported relative to
``R(1) = C_1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import FrequencyGrid, linear_to_db, make_grid, trapezoid
from .errors import DataFormatError, InvalidArgumentError
from .jsa import CW_POINTS, CW_SPAN, ArraySpec
from .scaling import Process, ScalingSeries
from .tcmt import ResonanceBand, drop_amplitude, h_transfer


@dataclass(frozen=True)
class MeasuredRings:
    """
    Per-ring coincidence rates.

    Parameters
    ----------
    counts : sequence of float
        ``C_j`` [1/s] for j = 1..N.
    p1 : float
        Pump power at the first ring [mW].
    t_d : float
        Drop transmittance used for the pump power schedule.
    sigmas : sequence of float, optional
        One-sigma uncertainties of ``counts``.
    """

    counts: tuple
    p1: float = 1.0
    t_d: float = 1.0
    sigmas: tuple | None = None

    def __post_init__(self) -> None:
        counts = tuple(float(c) for c in self.counts)
        if not counts:
            raise InvalidArgumentError("no ring counts given")
        if any(not (math.isfinite(c) and c >= 0) for c in counts):
            raise InvalidArgumentError("counts must be finite and >= 0")
        if not self.p1 > 0:
            raise InvalidArgumentError(f"p1 must be positive, got {self.p1}")
        if not 0 < self.t_d <= 1:
            raise InvalidArgumentError(f"t_d must be in (0, 1], got {self.t_d}")
        object.__setattr__(self, "counts", counts)
        if self.sigmas is not None:
            sig = tuple(float(s) for s in self.sigmas)
            if len(sig) != len(counts) or any(not (s >= 0) for s in sig):
                raise InvalidArgumentError("sigmas must be non-negative, one per ring")
            object.__setattr__(self, "sigmas", sig)

    @property
    def n(self) -> int:
        return len(self.counts)


def default_pair_grid(signal: ResonanceBand, idler: ResonanceBand) -> FrequencyGrid:
    halfspan = CW_SPAN * max(signal.gamma_tot, idler.gamma_tot)
    return make_grid(signal.omega0, halfspan, CW_POINTS)


def _pair_profiles(signal, idler, pump_omega0, grid):
    w1 = grid.nodes
    w2 = 2.0 * pump_omega0 - w1
    ts = np.abs(drop_amplitude(w1, signal)) ** 2
    ti = np.abs(drop_amplitude(w2, idler)) ** 2
    base = np.abs(h_transfer(w1, signal)) ** 2 * np.abs(h_transfer(w2, idler)) ** 2
    return ts * ti, base


def pair_transmittances(
    n: int,
    signal: ResonanceBand,
    idler: ResonanceBand,
    pump_omega0: float,
    grid: FrequencyGrid | None = None,
) -> np.ndarray:
    """``[T_1N, ..., T_NN]`` for one chain length."""
    if int(n) != n or n < 1:
        raise InvalidArgumentError(f"ring count must be a positive integer, got {n}")
    grid = default_pair_grid(signal, idler) if grid is None else grid
    pair, base = _pair_profiles(signal, idler, pump_omega0, grid)
    den = trapezoid(base, grid)
    out = np.empty(int(n))
    for j in range(1, int(n) + 1):
        out[j - 1] = trapezoid(base * pair ** (n - j), grid) / den
    out[-1] = 1.0
    return out


def pair_transmittance(
    j: int,
    n: int,
    signal: ResonanceBand,
    idler: ResonanceBand,
    pump_omega0: float,
    grid: FrequencyGrid | None = None,
) -> float:
    """Fraction ``T_jN`` of ring ``j``'s pairs that survive the rest of the chain."""
    if int(j) != j or not 1 <= j <= n:
        raise InvalidArgumentError(f"ring index must be in 1..{n}, got {j}")
    return float(pair_transmittances(n, signal, idler, pump_omega0, grid)[int(j) - 1])


def pump_power_schedule(p1: float, j: int, t_d: float) -> float:
    """Pump power [mW] reaching ring ``j``: ``p1 * t_d**(j - 1)``."""
    if not p1 > 0:
        raise InvalidArgumentError(f"p1 must be positive, got {p1}")
    if int(j) != j or j < 1:
        raise InvalidArgumentError(f"ring index must be >= 1, got {j}")
    if not 0 < t_d <= 1:
        raise InvalidArgumentError(f"t_d must be in (0, 1], got {t_d}")
    return p1 * t_d ** (int(j) - 1)


def pump_power_schedule_db(p1_dbm: float, j: int, t_d: float) -> float:
    """Same schedule in log units: ``P_1[dB] + (j - 1) * t_d[dB]``."""
    return p1_dbm + (int(j) - 1) * float(linear_to_db(t_d))


def _transmittance_table(meas: MeasuredRings, arr: ArraySpec, grid) -> list:
    if meas.n < arr.n:
        raise InvalidArgumentError(f"need counts for {arr.n} rings, got {meas.n}")
    if meas.counts[0] <= 0:
        raise InvalidArgumentError("first-ring counts must be positive to normalize")
    grid = default_pair_grid(arr.signal, arr.idler) if grid is None else grid
    return [
        pair_transmittances(m, arr.signal, arr.idler, arr.pump.omega0, grid)
        for m in range(1, arr.n + 1)
    ]


def incoherent_rate(meas: MeasuredRings, arr: ArraySpec, grid: FrequencyGrid | None = None) -> ScalingSeries:
    """``R(N')/R(1)`` for ``N' = 1..arr.n`` from the measured ``C_j``."""
    table = _transmittance_table(meas, arr, grid)
    c = np.asarray(meas.counts)
    values = {m: float(np.dot(t, c[:m]) / c[0]) for m, t in enumerate(table, start=1)}
    return ScalingSeries(Process.INCOHERENT, meas.t_d, values)


def incoherent_rate_sigma(meas: MeasuredRings, arr: ArraySpec, grid: FrequencyGrid | None = None) -> dict:
    """
    One-sigma uncertainty of each normalized rate.

    Errors of the ``C_j`` are combined in quadrature through the weighted sum;
    the normalizing ``C_1`` is treated as exact.
    """
    if meas.sigmas is None:
        raise InvalidArgumentError("measurement carries no uncertainties")
    table = _transmittance_table(meas, arr, grid)
    s = np.asarray(meas.sigmas)
    return {m: float(np.sqrt(np.sum((t * s[:m]) ** 2)) / meas.counts[0]) for m, t in enumerate(table, start=1)}


def load_counts_csv(path: str | Path, p1: float = 1.0, t_d: float = 1.0) -> MeasuredRings:
    """
    Read ``ring_index,counts_per_s[,sigma]`` with a header row.

    Ring indices must run 1, 2, ... without gaps.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise DataFormatError(path, None, f"cannot read counts file: {exc}") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise DataFormatError(path, None, "file is empty")
    header = [h.strip() for h in rows[0]]
    if header[:2] != ["ring_index", "counts_per_s"] or header[2:] not in ([], ["sigma"]):
        raise DataFormatError(path, 1, "header must be ring_index,counts_per_s[,sigma]")
    width = len(header)
    counts: list = []
    sigmas: list = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise DataFormatError(path, lineno, f"expected {width} columns, got {len(row)}")
        try:
            idx = int(row[0])
            vals = [float(x) for x in row[1:]]
        except ValueError as exc:
            raise DataFormatError(path, lineno, str(exc)) from exc
        if idx != len(counts) + 1:
            raise DataFormatError(path, lineno, f"expected ring index {len(counts) + 1}, got {idx}")
        if any(not (math.isfinite(v) and v >= 0) for v in vals):
            raise DataFormatError(path, lineno, "counts and sigma must be finite and >= 0")
        counts.append(vals[0])
        if width == 3:
            sigmas.append(vals[1])
    if not counts:
        raise DataFormatError(path, None, "no data rows")
    return MeasuredRings(tuple(counts), p1=p1, t_d=t_d, sigmas=tuple(sigmas) if sigmas else None)

