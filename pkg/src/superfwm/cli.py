"""
Command-line front end.

Every command reads one JSON scenario (the bundled device description when
``--config`` is omitted) and writes CSV or JSON files into ``--out``::

    superfwm spectra    cascaded drop spectra and their FWHM
    superfwm scaling    normalized rate versus N for each process
    superfwm jsa        per-source JSAs, brightness, indistinguishability
    superfwm fit        drop transmittance from a measured rate curve
    superfwm asymptotic large-N rate of a CW chain and its exponent

Exit codes: 0 success, 2 invalid configuration or arguments, 3 unreadable
input data, 4 output I/O failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from . import __version__
from .core import bandwidth_nm_to_omega, bandwidth_omega_to_nm, make_grid, omega_to_wavelength, wavelength_to_omega
from .errors import ConfigError, DataFormatError, InvalidArgumentError, SuperFWMError
from .fit import FitModel, FitProcess, fit_td, load_rate_curve_csv
from .jsa import ArraySpec, JsaGrid, decompose, default_jsa_grid, pump_power_at_source, rate_curve, relative_brightness
from .pump import CWPump, GaussianPump, PumpSpec, load_tabulated_pump
from .scaling import log_asymptotic_beta2, loglog_slope, xi_incoherent, xi_spont_unfiltered, xi_stim
from .tcmt import (
    BandLabel,
    QTriple,
    ResonanceBand,
    band_from_q,
    band_from_td,
    cascade_drop_spectrum,
    cascade_fwhm_closed_form,
    fwhm,
    td_on_resonance,
)

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_IO = 0, 2, 3, 4
MAX_JSA_AXIS = 201
TD_KEYS = ("default", "stimulated", "spontaneous_cw", "spontaneous_pulsed")
SCALING_COLUMNS = (
    "stimulated",
    "spontaneous_unfiltered",
    "incoherent",
    "spontaneous_full_cw",
    "spontaneous_full_pulsed",
    "incoherent_reference",
)


# --------------------------------------------------------------------------
# configuration


def default_config_path() -> Path:
    return Path(str(resources.files("superfwm") / "data" / "device.json"))


def _get(obj: dict, key: str, path: str, kind=float, default: Any = ...):
    if key not in obj:
        if default is ...:
            raise ConfigError(f"{path}.{key}" if path else key, "missing")
        return default
    val = obj[key]
    try:
        if kind is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise TypeError
            val = float(val)
            if not math.isfinite(val):
                raise TypeError
        elif kind is int:
            if isinstance(val, bool) or not isinstance(val, int):
                raise TypeError
        elif kind is str:
            if not isinstance(val, str):
                raise TypeError
        elif kind is dict:
            if not isinstance(val, dict):
                raise TypeError
    except TypeError:
        raise ConfigError(f"{path}.{key}" if path else key, f"expected {kind.__name__}, got {val!r}") from None
    return val


@dataclass(frozen=True)
class GridSettings:
    spectrum_span: float = 10.0
    spectrum_points: int = 2001
    pulsed_span: float = 10.0
    pulsed_points: int = 801
    cw_span: float = 400.0
    cw_points: int = 40001


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated scenario: band Q factors, array geometry, pump and grids."""

    array: ArraySpec
    t_d: dict
    pump_mode: str
    pulse: PumpSpec
    grid: GridSettings
    spectra_band: BandLabel
    asymptotic_td: float
    source: str

    def array_for(self, key: str, n: int | None = None) -> ArraySpec:
        """Array with bands rebuilt at the drop transmittance assigned to ``key``."""
        arr = self.array if n is None else self.array.with_n(n)
        t_d = self.t_d.get(key, self.t_d.get("default"))
        if t_d is None:
            return arr

        def rebuild(b: ResonanceBand) -> ResonanceBand:
            return band_from_td(b.omega0, b.omega0 / (2.0 * b.gamma_tot), t_d, b.label)

        return ArraySpec(arr.n, arr.spacing_L, rebuild(arr.pump), rebuild(arr.signal), rebuild(arr.idler), arr.delta_k_bar)

    def td_value(self, key: str) -> float:
        t_d = self.t_d.get(key, self.t_d.get("default"))
        return td_on_resonance(self.array.pump) if t_d is None else t_d

    def jsa_grid(self, arr: ArraySpec, pump: PumpSpec) -> JsaGrid:
        g = self.grid
        if isinstance(pump, CWPump):
            return default_jsa_grid(arr, pump, g.cw_span, g.cw_points)
        return default_jsa_grid(arr, pump, g.pulsed_span, g.pulsed_points)


def _parse_band(obj: dict, label: BandLabel) -> ResonanceBand:
    path = f"bands.{label.value}"
    lam = _get(obj, "wavelength_nm", path)
    if not lam > 0:
        raise ConfigError(f"{path}.wavelength_nm", "must be positive")
    omega0 = float(wavelength_to_omega(lam))
    if "gamma_e" in obj or "gamma_i" in obj:
        ge = _get(obj, "gamma_e", path)
        gi = _get(obj, "gamma_i", path)
        try:
            return ResonanceBand(label, omega0, ge, gi)
        except InvalidArgumentError as exc:
            raise ConfigError(path, str(exc)) from None
    q_tot = _get(obj, "q_tot", path)
    q_e = _get(obj, "q_e", path)
    if not q_tot > 0:
        raise ConfigError(f"{path}.q_tot", "must be positive")
    if not q_e > 0:
        raise ConfigError(f"{path}.q_e", "must be positive")
    try:
        return band_from_q(omega0, QTriple.from_loaded(q_tot, q_e), label)
    except InvalidArgumentError as exc:
        raise ConfigError(f"{path}.q_e", str(exc)) from None


def _parse_pulse(obj: dict, pump_band: ResonanceBand, base: Path) -> PumpSpec:
    shape = _get(obj, "shape", "pump.pulse", str, "gaussian")
    if shape == "gaussian":
        if "fwhm_pm" in obj:
            fwhm_pm = _get(obj, "fwhm_pm", "pump.pulse")
            if not fwhm_pm > 0:
                raise ConfigError("pump.pulse.fwhm_pm", "must be positive")
            lam = float(omega_to_wavelength(pump_band.omega0))
            width = bandwidth_nm_to_omega(1e-3 * fwhm_pm, lam)
        else:
            mult = _get(obj, "fwhm_linewidths", "pump.pulse", float, 4.0)
            if not mult > 0:
                raise ConfigError("pump.pulse.fwhm_linewidths", "must be positive")
            width = mult * pump_band.gamma_tot
        return GaussianPump(pump_band.omega0, width)
    if shape == "tabulated":
        fname = _get(obj, "file", "pump.pulse", str)
        power = obj.get("power", False)
        if not isinstance(power, bool):
            raise ConfigError("pump.pulse.power", "expected true or false")
        return load_tabulated_pump((base / fname) if not Path(fname).is_absolute() else fname, power)
    raise ConfigError("pump.pulse.shape", f"expected 'gaussian' or 'tabulated', got {shape!r}")


def parse_config(doc: dict, source: str = "<memory>", base: Path | None = None) -> ScenarioConfig:
    """Validate a decoded JSON scenario."""
    if not isinstance(doc, dict):
        raise ConfigError("(root)", "expected a JSON object")
    base = Path(".") if base is None else base
    arr_obj = _get(doc, "array", "", dict)
    n = _get(arr_obj, "n", "array", int)
    spacing = _get(arr_obj, "spacing_m", "array", float, 500e-6)
    dk = _get(arr_obj, "delta_k_bar", "array", float, 0.0)
    if n < 1:
        raise ConfigError("array.n", "must be >= 1")
    if not spacing > 0:
        raise ConfigError("array.spacing_m", "must be positive")
    bands_obj = _get(doc, "bands", "", dict)
    bands = {}
    for label in BandLabel:
        bands[label] = _parse_band(_get(bands_obj, label.value, "bands", dict), label)
    try:
        arr = ArraySpec(n, spacing, bands[BandLabel.PUMP], bands[BandLabel.SIGNAL], bands[BandLabel.IDLER], dk)
    except InvalidArgumentError as exc:
        field = "array.delta_k_bar" if "pi/10" in str(exc) else "bands"
        raise ConfigError(field, str(exc)) from None

    t_d: dict = {}
    raw_td = doc.get("t_d")
    if isinstance(raw_td, (int, float)) and not isinstance(raw_td, bool):
        raw_td = {"default": raw_td}
    if raw_td is not None:
        if not isinstance(raw_td, dict):
            raise ConfigError("t_d", "expected a number or an object keyed by process")
        for key, val in raw_td.items():
            if key not in TD_KEYS:
                raise ConfigError(f"t_d.{key}", f"unknown key; expected one of {', '.join(TD_KEYS)}")
            if isinstance(val, bool) or not isinstance(val, (int, float)) or not 0 < val <= 1:
                raise ConfigError(f"t_d.{key}", f"must be in (0, 1], got {val!r}")
            t_d[key] = float(val)

    pump_obj = _get(doc, "pump", "", dict, {})
    mode = _get(pump_obj, "mode", "pump", str, "cw")
    if mode not in ("cw", "pulsed"):
        raise ConfigError("pump.mode", f"expected 'cw' or 'pulsed', got {mode!r}")
    try:
        pulse = _parse_pulse(_get(pump_obj, "pulse", "pump", dict, {}), arr.pump, base)
    except InvalidArgumentError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError("pump.pulse", str(exc)) from None

    grid_obj = _get(doc, "grid", "", dict, {})
    defaults = GridSettings()
    kw = {}
    for name in GridSettings.__dataclass_fields__:
        dflt = getattr(defaults, name)
        kind = int if isinstance(dflt, int) else float
        val = _get(grid_obj, name, "grid", kind, dflt)
        if (kind is int and val < 3) or not val > 0:
            raise ConfigError(f"grid.{name}", "must be positive (at least 3 points)")
        kw[name] = val
    grid = GridSettings(**kw)

    spectra_obj = _get(doc, "spectra", "", dict, {})
    band_name = _get(spectra_obj, "band", "spectra", str, "pump")
    try:
        spectra_band = BandLabel(band_name)
    except ValueError:
        raise ConfigError("spectra.band", f"expected pump, signal or idler, got {band_name!r}") from None
    asym_obj = _get(doc, "asymptotic", "", dict, {})
    asym_td = _get(asym_obj, "t_d", "asymptotic", float, 1.0)
    if not 0 < asym_td <= 1:
        raise ConfigError("asymptotic.t_d", "must be in (0, 1]")
    return ScenarioConfig(arr, t_d, mode, pulse, grid, spectra_band, asym_td, source)


def load_config(path: str | Path | None) -> ScenarioConfig:
    path = default_config_path() if path is None else Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    return parse_config(doc, str(path), path.parent)


# --------------------------------------------------------------------------
# output


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return "%.9g" % float(v)


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    _atomic_write(path, "\n".join(lines) + "\n")
    return path


def write_json(path: Path, obj) -> Path:
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")
    return path


# --------------------------------------------------------------------------
# commands


def cmd_spectra(cfg: ScenarioConfig, out: Path) -> list:
    """``spectra_drop{N}.csv`` for N = 1..n and ``fwhm_vs_N.csv``."""
    arr = cfg.array_for("default")
    band = {BandLabel.PUMP: arr.pump, BandLabel.SIGNAL: arr.signal, BandLabel.IDLER: arr.idler}[cfg.spectra_band]
    grid = make_grid(band.omega0, cfg.grid.spectrum_span * band.gamma_tot, cfg.grid.spectrum_points)
    lam = omega_to_wavelength(grid.nodes)
    written, fw_rows = [], []
    for n in range(1, arr.n + 1):
        spec = cascade_drop_spectrum(band, n, grid)
        rows = zip(grid.nodes, lam, np.real(spec.values))
        written.append(write_csv(out / f"spectra_drop{n}.csv", ("omega_rad_s", "wavelength_nm", "drop_transmittance"), rows))
        width = fwhm(spec)
        fw_rows.append((n, width, 1e3 * bandwidth_omega_to_nm(width, band.omega0), cascade_fwhm_closed_form(band, n)))
    written.append(write_csv(out / "fwhm_vs_N.csv", ("N", "fwhm_rad_s", "fwhm_pm", "closed_form_rad_s"), fw_rows))
    return written


def _selected(processes: Sequence[str] | None) -> list:
    if not processes:
        return list(SCALING_COLUMNS)
    bad = [p for p in processes if p not in SCALING_COLUMNS]
    if bad:
        raise InvalidArgumentError(f"unknown process {bad[0]!r}; expected one of {', '.join(SCALING_COLUMNS)}")
    return [p for p in SCALING_COLUMNS if p in processes]


def cmd_scaling(cfg: ScenarioConfig, out: Path, processes: Sequence[str] | None = None) -> list:
    """``scaling.csv``: normalized rate versus N, one column per process."""
    cols = _selected(processes)
    n_max = cfg.array.n
    ns = range(1, n_max + 1)
    data = {}
    t_stim = cfg.td_value("stimulated")
    t_cw = cfg.td_value("spontaneous_cw")
    if "stimulated" in cols:
        data["stimulated"] = [xi_stim(n, t_stim) for n in ns]
    if "spontaneous_unfiltered" in cols:
        data["spontaneous_unfiltered"] = [xi_spont_unfiltered(n, t_cw) for n in ns]
    if "incoherent" in cols:
        data["incoherent"] = [xi_incoherent(n, t_cw) for n in ns]
    if "spontaneous_full_cw" in cols or "incoherent_reference" in cols:
        arr = cfg.array_for("spontaneous_cw")
        pump = CWPump(arr.pump.omega0)
        rc = rate_curve(arr, pump, cfg.jsa_grid(arr, pump))
        data["spontaneous_full_cw"] = rc.coherent
        data["incoherent_reference"] = rc.incoherent
    if "spontaneous_full_pulsed" in cols:
        arr = cfg.array_for("spontaneous_pulsed")
        data["spontaneous_full_pulsed"] = rate_curve(arr, cfg.pulse, cfg.jsa_grid(arr, cfg.pulse)).coherent
    rows = [[n] + [data[c][n - 1] for c in cols] for n in ns]
    return [write_csv(out / "scaling.csv", ["N"] + cols, rows)]


def cmd_jsa(cfg: ScenarioConfig, out: Path, mode: str | None = None) -> list:
    """Per-source JSIs, brightness, ``I_jN`` and the pump after each drop."""
    mode = cfg.pump_mode if mode is None else mode
    if mode not in ("cw", "pulsed"):
        raise InvalidArgumentError(f"jsa mode must be 'cw' or 'pulsed', got {mode!r}")
    key = "spontaneous_cw" if mode == "cw" else "spontaneous_pulsed"
    arr = cfg.array_for(key)
    pump: PumpSpec = CWPump(arr.pump.omega0) if mode == "cw" else cfg.pulse
    grid = cfg.jsa_grid(arr, pump)
    dec = decompose(arr, pump, grid)
    ref = dec if arr.n == 1 else decompose(arr.with_n(1), pump, grid)
    written = []
    peak = max(float(np.max(np.abs(p.values) ** 2)) for p in dec.phi)
    if mode == "cw":
        # the line extends far into the tails; keep the same window as a pulsed map
        window = np.abs(grid.signal.offsets) <= cfg.grid.pulsed_span * max(arr.signal.gamma_tot, arr.idler.gamma_tot)
        idx = np.flatnonzero(window)
        idx = idx[:: max(1, math.ceil(idx.size / MAX_JSA_AXIS))]
        w1 = grid.signal.nodes[idx]
        w2 = 2.0 * pump.omega_p0 - w1
        for q, p in enumerate(dec.phi, start=1):
            jsi = np.abs(p.values[idx]) ** 2 / peak
            written.append(write_csv(out / f"jsa_source_{q}.csv", ("omega_signal", "omega_idler", "jsi"), zip(w1, w2, jsi)))
    else:
        s1 = max(1, math.ceil(grid.signal.points / MAX_JSA_AXIS))
        s2 = max(1, math.ceil(grid.idler.points / MAX_JSA_AXIS))
        w1 = grid.signal.nodes[::s1]
        w2 = grid.idler.nodes[::s2]
        for q, p in enumerate(dec.phi, start=1):
            jsi = np.abs(p.values[::s1, ::s2]) ** 2 / peak
            rows = ((a, b, jsi[i, k]) for i, a in enumerate(w1) for k, b in enumerate(w2))
            written.append(write_csv(out / f"jsa_source_{q}.csv", ("omega_signal", "omega_idler", "jsi"), rows))
    bright = relative_brightness(dec, ref)
    written.append(write_csv(out / "brightness.csv", ("j", "brightness"), zip(range(1, arr.n + 1), bright)))
    col = dec.indistinguishability[:, -1]
    rows = [(j, c.real, c.imag, abs(c)) for j, c in enumerate(col, start=1)]
    written.append(write_csv(out / "indistinguishability.csv", ("j", "re", "im", "abs"), rows))
    if mode == "cw":
        rows = [(j, pump_power_at_source(arr, pump, j)) for j in range(1, arr.n + 1)]
        written.append(write_csv(out / "pump_evolution.csv", ("j", "relative_power"), rows))
    else:
        pg = make_grid(arr.pump.omega0, cfg.grid.pulsed_span * arr.pump.gamma_tot, MAX_JSA_AXIS)
        cols = [pump_power_at_source(arr, pump, j, pg.nodes) for j in range(1, arr.n + 1)]
        header = ["omega_rad_s", "wavelength_nm"] + [f"ring_{j}" for j in range(1, arr.n + 1)]
        rows = [[w, lam] + [c[i] for c in cols] for i, (w, lam) in enumerate(zip(pg.nodes, omega_to_wavelength(pg.nodes)))]
        written.append(write_csv(out / "pump_evolution.csv", header, rows))
    return written


def cmd_fit(cfg: ScenarioConfig, out: Path, data: Path, process: str) -> dict:
    """Fit ``T_d`` to a rate curve; the report goes to ``fit_report.json`` and stdout."""
    try:
        proc = FitProcess(process)
    except ValueError:
        raise InvalidArgumentError(
            f"--process must be one of {', '.join(p.value for p in FitProcess)}, got {process!r}"
        ) from None
    curve = load_rate_curve_csv(data, proc)
    pump = cfg.pulse if proc is FitProcess.SPONTANEOUS_PULSED else None
    result = fit_td(curve, FitModel(cfg.array, pump))
    report = {
        "process": proc.value,
        "t_d_fit": round(result.t_d_fit, 12),
        "residual": float("%.9g" % result.residual),
        "evaluations": result.evaluations,
        "model_curve": [[int(n), float("%.9g" % v)] for n, v in result.model_curve],
    }
    write_json(out / "fit_report.json", report)
    return report


def cmd_asymptotic(cfg: ScenarioConfig, out: Path, n_max: int) -> list:
    """``asymptotic.csv``: log rate, its loss-free part and the trailing-decade exponent."""
    if n_max < 20:
        raise InvalidArgumentError(f"--nmax must be >= 20, got {n_max}")
    t_d = cfg.asymptotic_td
    log_td = math.log(t_d)
    ns = np.arange(1, n_max + 1)
    logs = np.array([log_asymptotic_beta2(int(n), t_d) for n in ns])
    shape = logs - 2.0 * ns * log_td
    rows = []
    for n, lv, sv in zip(ns, logs, shape):
        lo = max(10, int(n) // 10)
        exponent = loglog_slope(ns[lo - 1 : n], shape[lo - 1 : n]) if n >= 20 else float("nan")
        rows.append((int(n), lv, sv, exponent))
    written = [write_csv(out / "asymptotic.csv", ("N", "log_beta2", "log_beta2_lossless_part", "exponent"), rows)]
    return written


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="superfwm", description="Pair-rate modelling of add-drop ring arrays.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=Path, default=None, help="scenario JSON (default: bundled device)")
        p.add_argument("--out", type=Path, default=Path("out"), help="output directory (default: ./out)")

    common(sub.add_parser("spectra", help="cascaded drop spectra and FWHM versus N"))
    p = sub.add_parser("scaling", help="normalized rate versus N for each process")
    common(p)
    p.add_argument("--process", default=None, help="comma-separated subset of: " + ", ".join(SCALING_COLUMNS))
    p = sub.add_parser("jsa", help="per-source JSAs, brightness and indistinguishability")
    common(p)
    p.add_argument("--process", choices=("cw", "pulsed"), default=None, help="pump mode (default: from config)")
    p = sub.add_parser("fit", help="fit the drop transmittance to a rate curve")
    common(p)
    p.add_argument("--data", type=Path, required=True, help="CSV with columns N,rate[,sigma]")
    p.add_argument("--process", required=True, choices=[x.value for x in FitProcess])
    p = sub.add_parser("asymptotic", help="large-N CW rate and its scaling exponent")
    common(p)
    p.add_argument("--nmax", type=int, default=2000)
    return parser


def run(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    out = args.out
    if args.command == "spectra":
        files = cmd_spectra(cfg, out)
    elif args.command == "scaling":
        procs = [p.strip() for p in args.process.split(",")] if args.process else None
        files = cmd_scaling(cfg, out, procs)
    elif args.command == "jsa":
        files = cmd_jsa(cfg, out, args.process)
    elif args.command == "fit":
        report = cmd_fit(cfg, out, args.data, args.process)
        print(json.dumps(report, indent=2, sort_keys=True))
        return EXIT_OK
    else:
        files = cmd_asymptotic(cfg, out, args.nmax)
    for f in files:
        print(f)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except DataFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvalidArgumentError, SuperFWMError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
