from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from superfwm.core import (
    ComplexGrid2D,
    ComplexSpectrum,
    FrequencyGrid,
    bandwidth_nm_to_omega,
    bandwidth_omega_to_nm,
    db_to_linear,
    integrate_1d,
    integrate_2d,
    linear_to_db,
    make_grid,
    omega_to_wavelength,
    wavelength_to_omega,
)
from superfwm.errors import InvalidArgumentError


def lorentzian(x, g=1.0):
    return g * g / (g * g + x * x)


def test_grid_nodes_symmetric_and_spacing():
    g = make_grid(5.0, 2.0, 5)
    np.testing.assert_allclose(g.nodes, [3.0, 4.0, 5.0, 6.0, 7.0])
    assert g.spacing == 1.0
    np.testing.assert_allclose(g.weights, [0.5, 1, 1, 1, 0.5])


@pytest.mark.parametrize("kw", [dict(points=2), dict(halfspan=0.0), dict(halfspan=-1.0), dict(center=math.nan)])
def test_grid_rejects_bad_parameters(kw):
    args = dict(center=1.0, halfspan=1.0, points=11) | kw
    with pytest.raises(InvalidArgumentError):
        FrequencyGrid(**args)


def test_spectrum_shape_is_checked_and_read_only():
    g = make_grid(0.0, 1.0, 5)
    with pytest.raises(InvalidArgumentError):
        ComplexSpectrum(g, np.zeros(4))
    s = ComplexSpectrum(g, np.zeros(5))
    with pytest.raises(ValueError):
        s.values[0] = 1.0
    with pytest.raises(InvalidArgumentError):
        ComplexGrid2D(g, g, np.zeros((5, 4)))


def test_lorentzian_integral_converges_to_pi():
    g = make_grid(0.0, 1000.0, 400001)
    val = integrate_1d(ComplexSpectrum(g, lorentzian(g.nodes)))
    # truncation of the tails beyond +-1000 costs 2/1000
    assert abs(val.real - (math.pi - 2e-3)) < 1e-5


def test_trapezoid_second_order_convergence():
    # on a finite window the error is dominated by the end-derivative term, O(h^2)
    errs = []
    exact = 2.0 * math.atan(5.0)
    for pts in (51, 101, 201):
        g = make_grid(0.0, 5.0, pts)
        errs.append(abs(integrate_1d(ComplexSpectrum(g, lorentzian(g.nodes))).real - exact))
    assert 3.8 < errs[0] / errs[1] < 4.2
    assert 3.8 < errs[1] / errs[2] < 4.2


def test_integrate_2d_separable_gaussian():
    g = make_grid(0.0, 8.0, 401)
    x = g.nodes
    vals = np.outer(np.exp(-(x**2)), np.exp(-2 * x**2))
    got = integrate_2d(ComplexGrid2D(g, g, vals)).real
    assert abs(got - math.sqrt(math.pi) * math.sqrt(math.pi / 2)) < 1e-12


@given(st.floats(-60.0, 60.0))
def test_db_round_trip(x):
    assert linear_to_db(db_to_linear(x)) == pytest.approx(x, abs=1e-10)


def test_db_rejects_non_positive():
    with pytest.raises(InvalidArgumentError):
        linear_to_db(0.0)


@given(st.floats(400.0, 3000.0))
def test_wavelength_round_trip(lam):
    assert omega_to_wavelength(wavelength_to_omega(lam)) == pytest.approx(lam, rel=1e-14)


def test_bandwidth_conversion_matches_finite_difference():
    lam = 1561.25
    dw = bandwidth_nm_to_omega(0.04, lam)
    w0 = wavelength_to_omega(lam)
    assert dw == pytest.approx(wavelength_to_omega(lam - 0.02) - wavelength_to_omega(lam + 0.02), rel=1e-6)
    assert bandwidth_omega_to_nm(dw, w0) == pytest.approx(0.04, rel=1e-12)
