"""Physical configuration of the rotating, stratified fluid and its frequency bands.

Gravity is fixed to ``-e3``.  Frequencies are angular frequencies in rad/s.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NotElliptic

RADICAND_CLAMP = 1e-12
EDGE_TOL = 1e-12


class Band(enum.Enum):
    ZERO = "Zero"
    ELLIPTIC_LOW = "EllipticLow"
    WAVE_BAND = "WaveBand"
    ELLIPTIC_HIGH = "EllipticHigh"
    BAND_EDGE = "BandEdge"


@dataclass(frozen=True)
class PhysicalConfig:
    """Rotation vector ``rotation`` (rad/s) and buoyancy frequency ``buoyancy`` (rad/s).

    ``aligned=True`` asserts that the rotation is parallel to gravity; it is
    checked exactly, not up to a tolerance.
    """

    rotation: tuple[float, float, float]
    buoyancy: float
    aligned: bool = False
    # Maps user coordinates to the working frame (identity unless canonicalized).
    frame: np.ndarray = field(default_factory=lambda: np.eye(3), compare=False, repr=False)

    def __post_init__(self):
        rot = tuple(float(c) for c in np.asarray(self.rotation, dtype=float).ravel())
        if len(rot) != 3 or not all(math.isfinite(c) for c in rot):
            raise ConfigError(f"rotation must be a finite 3-vector, got {self.rotation!r}")
        object.__setattr__(self, "rotation", rot)
        n = float(self.buoyancy)
        if not math.isfinite(n) or n < 0:
            raise ConfigError(f"buoyancy frequency must be >= 0, got {self.buoyancy!r}")
        object.__setattr__(self, "buoyancy", n)
        if self.aligned and (rot[0] != 0.0 or rot[1] != 0.0):
            raise ConfigError("aligned configuration requires Omega_1 = Omega_2 = 0")
        object.__setattr__(self, "frame", np.array(self.frame, dtype=float))

    @classmethod
    def aligned_case(cls, buoyancy, coriolis):
        """Rotation parallel to gravity with Coriolis parameter ``f = coriolis``."""
        return cls((0.0, 0.0, 0.5 * coriolis), buoyancy, aligned=True)

    @classmethod
    def from_dict(cls, data):
        """Parse the JSON block ``{"omega": [x, y, z], "N": float}``."""
        if not isinstance(data, dict):
            raise ConfigError("physical configuration must be a JSON object")
        if "omega" not in data or "N" not in data:
            raise ConfigError("physical configuration needs keys 'omega' and 'N'")
        gravity = data.get("gravity")
        if gravity is not None and list(map(float, gravity)) != [0.0, 0.0, -1.0]:
            raise ConfigError("gravity direction is fixed to -e3; other directions are not supported")
        try:
            return cls(tuple(data["omega"]), data["N"], aligned=bool(data.get("aligned", False)))
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc

    def to_dict(self):
        return {"omega": list(self.rotation), "N": self.buoyancy}

    @property
    def omega_vec(self):
        return np.array(self.rotation)

    @property
    def coriolis(self):
        """Coriolis parameter f = 2 |Omega|."""
        return 2.0 * math.sqrt(sum(c * c for c in self.rotation))

    def canonical(self):
        """Rotate about e3 so that Omega_2 = 0 and Omega_1 >= 0.

        Returns the rotated configuration; its ``frame`` attribute maps user
        coordinates to the new frame.  Gravity is unchanged by such rotations.
        """
        ox, oy, oz = self.rotation
        angle = math.atan2(oy, ox) if (ox or oy) else 0.0
        c, s = math.cos(angle), math.sin(angle)
        rot = np.array([[c, s, 0.0], [-s, c, 0.0], [0.0, 0.0, 1.0]])
        new = rot @ np.array(self.rotation)
        new[1] = 0.0
        return PhysicalConfig(tuple(new), self.buoyancy, aligned=self.aligned, frame=rot @ self.frame)

    def to_user(self, vec):
        """Express a working-frame vector (or stack of row vectors) in user coordinates."""
        return np.asarray(vec) @ self.frame


@dataclass(frozen=True)
class FrequencyBands:
    omega_minus: float
    omega_plus: float


def frequency_bounds(cfg: PhysicalConfig) -> FrequencyBands:
    """Band edges omega_-, omega_+: the moduli of the eigenvalues of iA."""
    if cfg.rotation[0] == 0.0 and cfg.rotation[1] == 0.0:
        # Radicand is the perfect square (N^2 - f^2)^2: the edges are min/max(N, f).
        n, f = cfg.buoyancy, 2.0 * abs(cfg.rotation[2])
        return FrequencyBands(min(n, f), max(n, f))
    return _bounds_general(cfg)


def _bounds_general(cfg):
    """Direct evaluation of the band-edge formula, without the aligned shortcut."""
    n2 = cfg.buoyancy ** 2
    f2 = cfg.coriolis ** 2
    s = n2 + f2
    inner = s * s - 16.0 * n2 * cfg.rotation[2] ** 2
    if inner < 0:
        if inner < -RADICAND_CLAMP * max(1.0, s * s):
            raise ArithmeticError(f"negative radicand {inner}")
        inner = 0.0
    root = math.sqrt(inner)
    lo = 0.5 * (s - root)
    return FrequencyBands(math.sqrt(max(lo, 0.0)), math.sqrt(0.5 * (s + root)))


def classify_frequency(cfg: PhysicalConfig, omega: float) -> Band:
    bands = frequency_bounds(cfg)
    lo, hi = bands.omega_minus, bands.omega_plus
    eps = EDGE_TOL * hi
    w = abs(omega)
    if w <= eps:
        return Band.ZERO
    if abs(w - lo) <= eps or abs(w - hi) <= eps:
        return Band.BAND_EDGE
    if w < lo:
        return Band.ELLIPTIC_LOW
    if w < hi:
        return Band.WAVE_BAND
    return Band.ELLIPTIC_HIGH


def require_low_band(cfg, omega, positive=True):
    """Raise NotElliptic unless 0 < omega < omega_- (or 0 < |omega| with ``positive=False``)."""
    band = classify_frequency(cfg, omega)
    if band is not Band.ELLIPTIC_LOW or (positive and omega <= 0):
        lo = frequency_bounds(cfg).omega_minus
        raise NotElliptic(f"omega={omega!r} is not in the low elliptic band (0, {lo!r}); got {band.value}")
