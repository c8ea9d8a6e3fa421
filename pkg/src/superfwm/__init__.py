"""Coherent pair generation in chains of add-drop microring resonators."""

from .core import ComplexGrid2D, ComplexSpectrum, FrequencyGrid, make_grid
from .errors import SuperFWMError
from .jsa import ArraySpec, JsaGrid, decompose, normalized_rate, rate_curve
from .pump import CWPump, GaussianPump, TabulatedPump
from .tcmt import BandLabel, QTriple, ResonanceBand, band_from_q, band_from_td

__version__ = "0.1.0"

__all__ = [
    "ArraySpec",
    "BandLabel",
    "CWPump",
    "ComplexGrid2D",
    "ComplexSpectrum",
    "FrequencyGrid",
    "GaussianPump",
    "JsaGrid",
    "QTriple",
    "ResonanceBand",
    "SuperFWMError",
    "TabulatedPump",
    "band_from_q",
    "band_from_td",
    "decompose",
    "make_grid",
    "normalized_rate",
    "rate_curve",
]
