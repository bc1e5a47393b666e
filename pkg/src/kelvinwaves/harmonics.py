"""Spherical-harmonic analysis of boundary pressures pulled back to the unit sphere.

Real orthonormal harmonics without the Condon-Shortley phase::

    Y_l0 = P_l0,   Y_lm = sqrt(2) Re Y_l^|m|  (m > 0),   sqrt(2) Im Y_l^|m|  (m < 0)

where ``Y_l^m`` are the complex orthonormal harmonics with the phase removed.
Expansions use Gauss-Legendre nodes in cos(theta) and uniform longitudes, exact
for polynomial integrands of degree <= 2 l_max.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre, sph_harm_y

from .polyalg import MultiPoly, linear_pullback


def real_sph_harm(l, m, theta, phi):
    """Real orthonormal harmonic of degree l, order m; theta is colatitude."""
    y = sph_harm_y(l, abs(m), theta, phi)
    sign = -1.0 if abs(m) % 2 else 1.0
    if m > 0:
        return np.sqrt(2.0) * sign * y.real
    if m < 0:
        return np.sqrt(2.0) * sign * y.imag
    return y.real


@dataclass(frozen=True)
class SphereGrid:
    theta: np.ndarray  # colatitude per node
    phi: np.ndarray
    weights: np.ndarray
    points: np.ndarray  # (n, 3) on S^2
    l_max: int


@lru_cache(maxsize=64)
def sphere_grid(l_max: int) -> SphereGrid:
    nlat = l_max + 1
    nlon = 2 * l_max + 2
    c, wc = roots_legendre(nlat)
    ph = 2 * np.pi * np.arange(nlon) / nlon
    cc, pp = np.meshgrid(c, ph, indexing="ij")
    w = np.outer(wc, np.full(nlon, 2 * np.pi / nlon))
    th = np.arccos(cc)
    s = np.sqrt(1 - cc ** 2)
    pts = np.stack([s * np.cos(pp), s * np.sin(pp), cc], -1).reshape(-1, 3)
    return SphereGrid(th.ravel(), pp.ravel(), w.ravel(), pts, l_max)


@lru_cache(maxsize=64)
def _harmonic_table(l_max):
    g = sphere_grid(l_max)
    lm = [(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]
    return lm, np.array([real_sph_harm(l, m, g.theta, g.phi) for l, m in lm])


def restrict_to_sphere(phi: MultiPoly, lmap=None):
    """Callable y -> phi(L y) for points y on the unit sphere."""
    pulled = phi if lmap is None else linear_pullback(phi, np.asarray(lmap, dtype=float))
    return pulled


@dataclass(frozen=True)
class SphericalExpansion:
    coefficients: dict  # (l, m) -> coefficient (real or complex)
    l_max: int
    norm_sq: float  # quadrature L2(S^2) norm squared of the input

    def degree_energy(self):
        e = np.zeros(self.l_max + 1)
        for (l, _), c in self.coefficients.items():
            e[l] += abs(c) ** 2
        return e


def sh_expand(samples, l_max: int) -> SphericalExpansion:
    """Expand a function on S^2 (callable on (n, 3) points, or values on ``sphere_grid(l_max)``).

    Exact for inputs band-limited to degree l_max.
    """
    g = sphere_grid(l_max)
    vals = samples(g.points) if callable(samples) else np.asarray(samples)
    lm, table = _harmonic_table(l_max)
    coef = table @ (g.weights * vals)
    norm_sq = float(np.sum(g.weights * np.abs(vals) ** 2))
    return SphericalExpansion(dict(zip(lm, coef)), l_max, norm_sq)


@dataclass(frozen=True)
class Purity:
    value: float
    degenerate: bool = False

    def __float__(self):
        return self.value


def harmonic_purity(exp: SphericalExpansion, l_target: int, drop_constant: bool = True) -> Purity:
    """Fraction of the squared norm carried by degree ``l_target``.

    An input with no energy left (e.g. a constant with ``drop_constant``) gives
    purity 0 flagged as degenerate.
    """
    e = exp.degree_energy()
    total = e.sum()
    if drop_constant:
        e = e.copy()
        e[0] = 0.0
    rest = e.sum()
    if rest <= 1e-24 * max(total, 1e-300) or rest == 0.0:
        return Purity(0.0, True)
    return Purity(float(e[l_target] / rest) if l_target <= exp.l_max else 0.0)


def pressure_purity(phi: MultiPoly, lmap, l_target: int) -> Purity:
    """Purity of the boundary pull-back of a polynomial pressure, constant removed."""
    deg = max(phi.degree, 1) if phi else 1
    return harmonic_purity(sh_expand(restrict_to_sphere(phi, lmap), deg), l_target, True)
