from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superfwm.core import ComplexSpectrum, linear_to_db, make_grid
from superfwm.errors import (
    AmbiguousPeakError,
    InconsistentQError,
    InvalidArgumentError,
    LosslessDegenerateError,
    SpanTooNarrowError,
)
from superfwm.scaling import td_from_xi
from superfwm.tcmt import (
    QTriple,
    ResonanceBand,
    band_from_q,
    band_from_td,
    cascade_drop_spectrum,
    cascade_fwhm_closed_form,
    drop_amplitude,
    drop_transmittance_from_xi,
    extinction_ratio_db,
    fwhm,
    h_transfer,
    q_from_band,
    q_intrinsic_from_td,
    td_on_resonance,
    through_transmittance,
)

W0 = 1.2e15

bands = st.builds(
    lambda ge, gi: ResonanceBand("signal", W0, ge, gi),
    st.floats(1e8, 1e11),
    st.floats(0.0, 1e11),
)


def test_qtriple_consistency_enforced():
    QTriple(q_tot=1.0 / (2 / 8.8e4 + 1 / 3.432e5), q_i=3.432e5, q_e=8.8e4)
    with pytest.raises(InconsistentQError):
        QTriple(q_tot=3.9e4, q_i=3.86e5, q_e=8.8e4)


def test_from_loaded_table_values():
    # pump band: 1/Q_i = 1/3.9e4 - 2/8.8e4
    q = QTriple.from_loaded(3.9e4, 8.8e4)
    assert q.q_i == pytest.approx(1.0 / (1 / 3.9e4 - 2 / 8.8e4), rel=1e-12)
    assert q.q_i == pytest.approx(3.432e5, rel=1e-4)


def test_from_loaded_rejects_negative_loss():
    with pytest.raises(InconsistentQError):
        QTriple.from_loaded(5e4, 8e4)


def test_lossless_triple():
    q = QTriple.from_loaded(4e4, 8e4)
    assert q.lossless and math.isinf(q.q_i)
    b = band_from_q(W0, q)
    assert b.lossless and td_on_resonance(b) == 1.0


@given(bands)
def test_q_round_trip(b):
    b2 = band_from_q(b.omega0, q_from_band(b))
    assert b2.gamma_e == pytest.approx(b.gamma_e, rel=1e-12)
    assert b2.gamma_i == pytest.approx(b.gamma_i, rel=1e-9, abs=1e-9 * b.gamma_tot)


@given(bands, st.floats(-50.0, 50.0))
def test_drop_and_intracavity_are_linked(b, x):
    w = b.omega0 + x * b.gamma_tot
    t = drop_amplitude(w, b)
    h = h_transfer(w, b)
    assert t == pytest.approx(1j * math.sqrt(2 * b.gamma_e) * h, rel=1e-12)
    # energy conservation: drop + through <= 1, equality when lossless
    total = abs(t) ** 2 + through_transmittance(w, b)
    assert total <= 1 + 1e-12
    if b.lossless:
        assert total == pytest.approx(1.0, abs=1e-12)


def test_on_resonance_values():
    b = ResonanceBand("pump", W0, 3e9, 4e9)
    assert abs(drop_amplitude(W0, b)) ** 2 == pytest.approx((6 / 10) ** 2)
    assert through_transmittance(W0, b) == pytest.approx((4 / 10) ** 2)
    assert extinction_ratio_db(b) == pytest.approx(20 * math.log10(0.4))


@given(st.floats(0.05, 1.0), st.floats(1e4, 1e6))
def test_band_from_td_round_trip(t_d, q_tot):
    b = band_from_td(W0, q_tot, t_d)
    assert td_on_resonance(b) == pytest.approx(t_d, rel=1e-12)
    assert W0 / (2 * b.gamma_tot) == pytest.approx(q_tot, rel=1e-12)
    if t_d < 1:
        assert W0 / (2 * b.gamma_i) == pytest.approx(q_intrinsic_from_td(q_tot, t_d), rel=1e-9)


def test_q_intrinsic_lossless_is_degenerate():
    with pytest.raises(LosslessDegenerateError):
        q_intrinsic_from_td(4e4, 1.0)


def test_xi_formulas_differ_as_documented():
    xi = 3.432e5 / 8.8e4
    tcmt = drop_transmittance_from_xi(xi)
    alt = td_from_xi(xi)
    assert tcmt == pytest.approx((2 * xi / (2 * xi + 1)) ** 2)
    assert alt > tcmt
    assert float(linear_to_db(td_from_xi(3.64))) == pytest.approx(-0.99, abs=0.01)
    assert float(linear_to_db(drop_transmittance_from_xi(3.64))) == pytest.approx(-1.12, abs=0.01)


def test_invalid_band_parameters():
    with pytest.raises(InvalidArgumentError):
        ResonanceBand("pump", W0, 0.0, 1e9)
    with pytest.raises(InvalidArgumentError):
        ResonanceBand("pump", W0, 1e9, -1.0)
    with pytest.raises(ValueError):
        ResonanceBand("laser", W0, 1e9, 1e9)


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_cascade_fwhm_closed_form(n):
    b = ResonanceBand("pump", W0, 4e9, 2e9)
    g = make_grid(W0, 10 * b.gamma_tot, 20001)
    assert fwhm(cascade_drop_spectrum(b, n, g)) == pytest.approx(cascade_fwhm_closed_form(b, n), rel=1e-6)


def test_single_ring_fwhm_is_twice_gamma():
    b = ResonanceBand("pump", W0, 4e9, 0.0)
    assert cascade_fwhm_closed_form(b, 1) == pytest.approx(2 * b.gamma_tot)


def test_fwhm_errors():
    g = make_grid(0.0, 1.0, 101)
    with pytest.raises(SpanTooNarrowError):
        fwhm(ComplexSpectrum(g, np.ones(101)))
    with pytest.raises(SpanTooNarrowError):
        fwhm(ComplexSpectrum(g, np.zeros(101)))
    x = g.nodes
    two = np.exp(-((x - 0.5) ** 2) / 0.005) + np.exp(-((x + 0.5) ** 2) / 0.005)
    with pytest.raises(AmbiguousPeakError):
        fwhm(ComplexSpectrum(g, two))
