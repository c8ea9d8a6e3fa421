from __future__ import annotations

import pytest
from hypothesis import HealthCheck, settings

from superfwm.core import wavelength_to_omega
from superfwm.jsa import ArraySpec
from superfwm.tcmt import QTriple, band_from_q, band_from_td

settings.register_profile(
    "repro",
    derandomize=True,
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("repro")

# measured loaded and extrinsic Q of each band, plus its wavelength [nm]
DEVICE = {
    "pump": (1561.25, 3.9e4, 8.8e4),
    "signal": (1571.2, 3.7e4, 8.1e4),
    "idler": (1551.425, 4.2e4, 9.7e4),
}

ACCEPTANCE_RESULTS: dict = {}


def device_array(n: int = 5, t_d: float | None = None, delta_k_bar: float = 0.0) -> ArraySpec:
    bands = {}
    for label, (lam, q_tot, q_e) in DEVICE.items():
        w0 = float(wavelength_to_omega(lam))
        if t_d is None:
            bands[label] = band_from_q(w0, QTriple.from_loaded(q_tot, q_e), label)
        else:
            bands[label] = band_from_td(w0, q_tot, t_d, label)
    return ArraySpec(n, 500e-6, bands["pump"], bands["signal"], bands["idler"], delta_k_bar)


@pytest.fixture
def device():
    return device_array


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_RESULTS):
        status, title, detail = ACCEPTANCE_RESULTS[key]
        terminalreporter.write_line(f"criterion {key:>2}: {status}  {title}  [{detail}]")
