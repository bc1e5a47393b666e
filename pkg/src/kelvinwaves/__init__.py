"""Gravito-inertial surface waves in ellipsoids.

Polynomial Galerkin spectra of the Poincare operator, the Kelvin boundary
symbol, boundary ray tracing and a Monte Carlo harness for the eigenvalue
counting conjecture.
"""
__version__ = "0.1.0"

from .errors import KelvinWavesError  # noqa: E402
from .geometry import Ellipsoid  # noqa: E402
from .kernels import BACKEND  # noqa: E402
from .model import Band, PhysicalConfig, classify_frequency, frequency_bounds  # noqa: E402

__all__ = [
    "BACKEND",
    "Band",
    "Ellipsoid",
    "KelvinWavesError",
    "PhysicalConfig",
    "classify_frequency",
    "frequency_bounds",
]
