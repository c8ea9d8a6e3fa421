from __future__ import annotations

import math

import numpy as np
import pytest
from conftest import device_array

from superfwm.core import db_to_linear
from superfwm.errors import DataFormatError, InvalidArgumentError
from superfwm.incoherent import (
    MeasuredRings,
    incoherent_rate,
    incoherent_rate_sigma,
    load_counts_csv,
    pair_transmittance,
    pair_transmittances,
    pump_power_schedule,
    pump_power_schedule_db,
)
from superfwm.jsa import decompose, identical_array, incoherent_reference_rate, relative_brightness
from superfwm.pump import CWPump
from superfwm.tcmt import band_from_td

W0 = 1.2e15


def lor_int(i):
    return math.sqrt(math.pi) * math.gamma(i - 0.5) / math.gamma(i)


def lossless(n):
    return identical_array(n, band_from_td(W0, 4e5, 1.0, "pump"))


def test_last_ring_transmits_everything():
    arr = device_array(5, 0.8)
    assert pair_transmittance(5, 5, arr.signal, arr.idler, arr.pump.omega0) == 1.0


def test_lossless_second_to_last():
    arr = lossless(3)
    t = pair_transmittance(2, 3, arr.signal, arr.idler, arr.pump.omega0)
    assert t == pytest.approx(lor_int(4) / lor_int(2), abs=1e-6)
    assert t == pytest.approx(0.625, abs=1e-6)


def test_transmittance_increases_with_j():
    arr = device_array(5, 0.8)
    t = pair_transmittances(5, arr.signal, arr.idler, arr.pump.omega0)
    assert np.all(np.diff(t) > 0)
    assert np.all((t > 0) & (t <= 1))


def test_index_range():
    arr = lossless(3)
    with pytest.raises(InvalidArgumentError):
        pair_transmittance(4, 3, arr.signal, arr.idler, arr.pump.omega0)


def test_matches_cw_brightness_for_lossless_rings():
    arr = lossless(4)
    p = CWPump(arr.pump.omega0)
    b = relative_brightness(decompose(arr, p), decompose(arr.with_n(1), p))
    t = pair_transmittances(4, arr.signal, arr.idler, arr.pump.omega0)
    np.testing.assert_allclose(t, b, atol=1e-6)


def test_pump_schedule():
    assert pump_power_schedule(2.0, 1, 0.5) == 2.0
    t = float(db_to_linear(-0.88))
    assert pump_power_schedule(1.0, 5, t) == pytest.approx(10 ** (-4 * 0.088), rel=1e-12)
    assert pump_power_schedule(1.0, 5, t) == pytest.approx(0.4446, abs=1e-4)
    assert pump_power_schedule(3.0, 4, 1.0) == 3.0
    assert pump_power_schedule_db(0.0, 5, t) == pytest.approx(-4 * 0.88, rel=1e-12)
    with pytest.raises(InvalidArgumentError):
        pump_power_schedule(0.0, 1, 0.5)


def test_equal_counts_lossless():
    s = incoherent_rate(MeasuredRings((5.0, 5.0)), lossless(2))
    assert s.values[1] == 1.0
    assert s.values[2] == pytest.approx(1.625, abs=1e-6)


def test_synthetic_counts_reproduce_jsa_incoherent_reference():
    arr = device_array(5, 0.8)
    p = CWPump(arr.pump.omega0)
    ref = decompose(arr.with_n(1), p)
    counts = [relative_brightness(decompose(arr.with_n(j), p), ref)[-1] for j in range(1, 6)]
    series = incoherent_rate(MeasuredRings(counts), arr)
    for n in range(1, 6):
        expected = incoherent_reference_rate(decompose(arr.with_n(n), p), ref)
        assert series.values[n] == pytest.approx(expected, abs=1e-4)


def test_device_series_flat_then_falling():
    # counts follow the pump power squared; the series stays near 1 to N=3 then drops
    arr = device_array(5, 0.8)
    counts = [0.8 ** (2 * (j - 1)) for j in range(1, 6)]
    v = incoherent_rate(MeasuredRings(counts), arr).values
    assert all(abs(v[n] - 1.0) < 0.15 for n in (1, 2, 3))
    assert v[5] < v[4] < v[3]


def test_uncertainty_propagation():
    arr = lossless(2)
    meas = MeasuredRings((10.0, 10.0), sigmas=(1.0, 2.0))
    sig = incoherent_rate_sigma(meas, arr)
    assert sig[1] == pytest.approx(0.1)
    assert sig[2] == pytest.approx(math.sqrt((0.625 * 1.0) ** 2 + 2.0**2) / 10.0, rel=1e-5)
    with pytest.raises(InvalidArgumentError):
        incoherent_rate_sigma(MeasuredRings((1.0,)), arr)


def test_measured_rings_validation():
    with pytest.raises(InvalidArgumentError):
        MeasuredRings(())
    with pytest.raises(InvalidArgumentError):
        MeasuredRings((1.0, -1.0))
    with pytest.raises(InvalidArgumentError):
        MeasuredRings((1.0,), sigmas=(1.0, 2.0))
    with pytest.raises(InvalidArgumentError):
        incoherent_rate(MeasuredRings((1.0,)), lossless(2))


def test_counts_csv(tmp_path):
    path = tmp_path / "counts.csv"
    path.write_text("ring_index,counts_per_s,sigma\n1,100,5\n2,80,4\n")
    meas = load_counts_csv(path)
    assert meas.counts == (100.0, 80.0) and meas.sigmas == (5.0, 4.0)
    path.write_text("ring_index,counts_per_s\n1,100\n3,80\n")
    with pytest.raises(DataFormatError, match=":3:"):
        load_counts_csv(path)
    path.write_text("1,100\n2,80\n")
    with pytest.raises(DataFormatError, match=":1:"):
        load_counts_csv(path)
    path.write_text("ring_index,counts_per_s\n1,abc\n")
    with pytest.raises(DataFormatError, match=":2:"):
        load_counts_csv(path)
