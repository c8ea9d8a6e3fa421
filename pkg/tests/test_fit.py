from __future__ import annotations

import math
import warnings

import numpy as np
import pytest
from conftest import device_array

from superfwm.errors import DataFormatError, InvalidArgumentError, NoMinimumError, NoResonanceError
from superfwm.fit import (
    FINAL_POINTS,
    FitModel,
    RateCurve,
    fit_td,
    fit_through_spectrum,
    golden_section,
    load_rate_curve_csv,
    load_spectrum_csv,
    model_rates,
    power_law_slope,
)
from superfwm.core import omega_to_wavelength
from superfwm.scaling import xi_stim
from superfwm.tcmt import ResonanceBand, through_transmittance

W0 = 1.2e15


def curve(process, values):
    return RateCurve(process, tuple(zip(range(1, len(values) + 1), values)))


def test_golden_section_quadratic():
    x, fx, n = golden_section(lambda t: (t - 0.61) ** 2, 0.3, 0.999, 1e-8)
    assert x == pytest.approx(0.61, abs=1e-8)
    assert fx < 1e-15 and n > 10


def test_golden_section_is_deterministic():
    calls = []

    def f(t):
        calls.append(t)
        return abs(t - 0.5)

    golden_section(f, 0.3, 0.999)
    first = list(calls)
    calls.clear()
    golden_section(f, 0.3, 0.999)
    assert calls == first


@pytest.mark.parametrize("t_d", [0.7, 0.75, 0.8])
def test_stimulated_recovery(t_d):
    r = fit_td(curve("stimulated", [xi_stim(n, t_d) for n in range(1, 6)]))
    assert r.t_d_fit == pytest.approx(t_d, abs=1e-3)
    assert r.residual < 1e-6


def test_stimulated_objective_unimodal():
    data = np.array([xi_stim(n, 0.75) for n in range(1, 6)])
    grid = np.linspace(0.3, 0.999, 51)
    obj = [np.sum((np.array([xi_stim(n, t) for n in range(1, 6)]) - data) ** 2) for t in grid]
    d = np.sign(np.diff(obj))
    assert np.count_nonzero(np.diff(d) != 0) == 1


def test_spontaneous_cw_recovery():
    model = FitModel(device_array(5))
    data = model_rates("spontaneous_cw", 0.8, range(1, 6), model)
    r = fit_td(curve("spontaneous_cw", data), model)
    assert r.t_d_fit == pytest.approx(0.8, abs=1e-2)


def test_spontaneous_cw_objective_unimodal():
    model = FitModel(device_array(5))
    data = model_rates("spontaneous_cw", 0.8, range(1, 6), model)
    grid = np.linspace(0.3, 0.999, 51)
    obj = [np.sum((model_rates("spontaneous_cw", t, range(1, 6), model) - data) ** 2) for t in grid]
    d = np.sign(np.diff(obj))
    assert np.count_nonzero(np.diff(d) != 0) == 1


def test_spontaneous_pulsed_recovery():
    model = FitModel(device_array(5))
    data = model_rates("spontaneous_pulsed", 0.79, range(1, 6), model, FINAL_POINTS)
    r = fit_td(curve("spontaneous_pulsed", data), model)
    assert r.t_d_fit == pytest.approx(0.79, abs=1e-2)


def test_weighted_fit_with_sigmas():
    vals = [xi_stim(n, 0.75) for n in range(1, 6)]
    pts = tuple((n, v, 0.01 * v) for n, v in zip(range(1, 6), vals))
    assert fit_td(RateCurve("stimulated", pts)).t_d_fit == pytest.approx(0.75, abs=1e-3)


def test_bracket_edge_is_no_minimum():
    with pytest.raises(NoMinimumError):
        fit_td(curve("stimulated", [1.0, 4.0, 9.0, 16.0]))


def test_preconditions():
    with pytest.raises(InvalidArgumentError):
        fit_td(curve("stimulated", [1.0, 2.0]))
    with pytest.raises(InvalidArgumentError):
        curve("stimulated", [2.0, 3.0, 4.0])
    with pytest.raises(InvalidArgumentError):
        RateCurve("stimulated", ((1, 1.0), (3, 2.0), (2, 3.0)))
    with pytest.raises(InvalidArgumentError):
        fit_td(curve("spontaneous_cw", [1.0, 2.0, 2.4]))


def test_rate_curve_csv(tmp_path):
    p = tmp_path / "rates.csv"
    p.write_text("N,rate,sigma\n1,1,0.01\n2,2.3,0.02\n3,3.0,0.03\n")
    c = load_rate_curve_csv(p, "stimulated")
    assert list(c.ns) == [1, 2, 3]
    p.write_text("N,rate\n1,1\n2,x\n")
    with pytest.raises(DataFormatError, match=":3:"):
        load_rate_curve_csv(p, "stimulated")
    p.write_text("N,rate\n1,1\n2.5,2\n")
    with pytest.raises(DataFormatError, match=":3:"):
        load_rate_curve_csv(p, "stimulated")


def synthetic_dip(band, span=15.0, points=601):
    w = np.linspace(band.omega0 - span * band.gamma_tot, band.omega0 + span * band.gamma_tot, points)
    return w, through_transmittance(w, band)


@pytest.mark.parametrize("ge,gi", [(5e9, 3e9), (2e9, 8e9), (7e9, 1e8)])
def test_through_fit_round_trip(ge, gi):
    b = ResonanceBand("signal", W0, ge, gi)
    fit = fit_through_spectrum(*synthetic_dip(b))
    assert fit.band.omega0 == pytest.approx(W0, rel=1e-12)
    assert fit.band.gamma_e == pytest.approx(ge, rel=1e-6)
    assert fit.band.gamma_tot == pytest.approx(b.gamma_tot, rel=1e-6)
    assert fit.residual < 1e-20


def test_through_fit_with_noise_recovers_q():
    b = ResonanceBand("signal", W0, 5e9, 3e9)
    w, t = synthetic_dip(b)
    rng = np.random.default_rng(20240601)
    errs = []
    for _ in range(100):
        fit = fit_through_spectrum(w, t + rng.normal(0.0, 0.01, t.size))
        errs.append(abs(fit.band.gamma_tot / b.gamma_tot - 1.0))
    assert max(errs) < 0.02


def test_critical_coupling_noise_floor():
    b = ResonanceBand("signal", W0, 5e9, 0.0)
    w, t = synthetic_dip(b)
    assert through_transmittance(W0, b) == pytest.approx(0.0, abs=1e-30)
    rng = np.random.default_rng(7)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        fit = fit_through_spectrum(w, t + rng.normal(0.0, 1e-3, t.size))
    assert fit.band.gamma_i >= 0
    assert fit.band.gamma_i < 0.02 * fit.band.gamma_tot


def test_negative_intrinsic_loss_is_clamped_with_warning():
    b = ResonanceBand("signal", W0, 5e9, 0.0)
    w, t = synthetic_dip(b)
    rng = np.random.default_rng(1)
    with pytest.warns(RuntimeWarning, match="clamped"):
        fit = fit_through_spectrum(w, t + rng.normal(0.0, 1e-3, t.size))
    assert fit.band.gamma_i == 0.0
    assert fit.band.gamma_tot == pytest.approx(b.gamma_tot, rel=0.01)


def test_through_fit_errors():
    w = np.linspace(W0 - 1e11, W0 + 1e11, 100)
    with pytest.raises(NoResonanceError):
        fit_through_spectrum(w, np.ones_like(w))
    with pytest.raises(InvalidArgumentError):
        fit_through_spectrum(w[:5], np.ones(5))
    b = ResonanceBand("signal", W0, 5e9, 3e9)
    narrow = np.linspace(W0 - 2.6e10, W0 + 2.6e10, 50)
    with pytest.raises(InvalidArgumentError):
        fit_through_spectrum(narrow, through_transmittance(narrow, b))


def test_spectrum_csv_round_trip(tmp_path):
    b = ResonanceBand("signal", W0, 5e9, 3e9)
    w, t = synthetic_dip(b)
    p = tmp_path / "spec.csv"
    p.write_text("wavelength_nm,transmittance\n" + "\n".join(f"{l:.9f},{v:.12f}" for l, v in zip(omega_to_wavelength(w), t)) + "\n")
    om, tt = load_spectrum_csv(p)
    fit = fit_through_spectrum(om, tt)
    assert fit.band.gamma_tot == pytest.approx(b.gamma_tot, rel=1e-4)


def test_power_law_slope():
    p = np.array([0.5, 1.0, 2.0, 4.0])
    assert power_law_slope(p, 3.0 * p**2) == pytest.approx(2.0, abs=1e-9)
    assert power_law_slope(p, 7.0 * p) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(InvalidArgumentError):
        power_law_slope([1.0, 2.0], [1.0, 4.0])
    with pytest.raises(InvalidArgumentError):
        power_law_slope([1.0, 2.0, -1.0], [1.0, 4.0, 1.0])


def test_power_law_slope_noise():
    rng = np.random.default_rng(11)
    p = np.linspace(0.2, 2.0, 10)
    slopes = [power_law_slope(p, p**2 * rng.lognormal(0.0, 0.05, p.size)) for _ in range(200)]
    assert max(abs(s - 2.0) for s in slopes) < 0.1
