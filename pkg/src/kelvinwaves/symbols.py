"""Kelvin boundary symbol: determinant form, tangent drift field, ellipticity and k_omega.

Conventions
-----------
``a`` is the outward conormal ``grad S(x)``, left unnormalized.  The bordered
determinant ``B(xi, a)`` is bilinear; writing ``B(xi, a) = a . M xi`` the real
part of ``M`` equals ``Sigma_omega`` exactly (the calibration factor is 1) and
the drift field is ``W1 = Xi a`` with ``Xi = Im(M)`` antisymmetric.  The
overall orientation of ``Xi`` is a time-convention choice; this one makes the
aligned-case drift ``2 Omega_3 (N^2 - w^2) e3 x a`` point east.

The degree-one symbol is

    k(x, xi) = sqrt(g*_d(xi, xi)) - <xi | W>,     W = W1 / sqrt(sigma(a)),

with ``g_d = J^T g_omega J`` for a chart Jacobian ``J``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import DegenerateNormal
from .geometry import Ellipsoid, boundary_metric, boundary_point, omega_metric, sigma_matrix
from .model import PhysicalConfig, frequency_bounds, require_low_band

MARGINAL_GAP = 1e-9
ROOT_GRID = 200
ROOT_TOL = 1e-10


class Ellipticity(enum.Enum):
    ELLIPTIC = "Elliptic"
    NON_ELLIPTIC = "NonElliptic"
    MARGINAL = "Marginal"


def _a_matrix(cfg):
    o1, o2, o3 = cfg.rotation
    n = cfg.buoyancy
    return np.array(
        [
            [0.0, -2 * o3, 2 * o2, 0.0],
            [2 * o3, 0.0, -2 * o1, 0.0],
            [-2 * o2, 2 * o1, 0.0, n],
            [0.0, 0.0, -n, 0.0],
        ]
    )


def b_form_raw(cfg: PhysicalConfig, omega: float) -> np.ndarray:
    """Complex 3x3 matrix M with B(xi, a) = a . M xi, from the bordered 5x5 determinant.

    B is bilinear in (xi, a), so evaluating the determinant on unit vectors
    gives M exactly up to rounding.
    """
    big = np.zeros((5, 5), dtype=complex)
    big[:4, :4] = omega * np.eye(4) - 1j * _a_matrix(cfg)
    m = np.empty((3, 3), dtype=complex)
    for i in range(3):
        for k in range(3):
            big[:3, 4] = 0.0
            big[4, :3] = 0.0
            big[k, 4] = 1.0
            big[4, i] = 1.0
            m[i, k] = np.linalg.det(big)
    return m


def b_form_matrices(cfg: PhysicalConfig, omega: float):
    """Symmetric part Sigma and antisymmetric drift matrix Xi of the determinant form.

    Sigma is calibrated against ``sigma_matrix`` by a least-squares positive
    factor (which comes out as 1); Xi is scaled by the same factor so that
    ``W1 = Xi @ a``.
    """
    m = b_form_raw(cfg, omega)
    sym = 0.5 * (m.real + m.real.T)
    xi = 0.5 * (m.imag - m.imag.T)
    ref = sigma_matrix(cfg, omega)
    denom = float(np.sum(sym * sym))
    factor = float(np.sum(ref * sym)) / denom if denom > 0 else 1.0
    if factor <= 0:
        raise ArithmeticError(f"non-positive determinant calibration factor {factor}")
    return factor * sym, factor * xi


def w1_field(cfg: PhysicalConfig, omega: float, a) -> np.ndarray:
    """Tangent drift field W1 at a point with conormal ``a``.

    Evaluated in the frame where Omega_2 = 0:

        W1 = 2 Omega_3 (N^2 - w^2)(a1 d2 - a2 d1) - 2 Omega_1 w^2 (a2 d3 - a3 d2)

    The sign of the Omega_1 term is the one produced by the determinant.
    """
    a = np.asarray(a, dtype=float)
    can = cfg.canonical()
    rel = can.frame @ cfg.frame.T
    ac = rel @ a
    o1, _, o3 = can.rotation
    n2, w2 = cfg.buoyancy ** 2, omega * omega
    c3 = 2.0 * o3 * (n2 - w2)
    c1 = -2.0 * o1 * w2
    wc = np.array([-c3 * ac[1], c3 * ac[0] - c1 * ac[2], c1 * ac[1]])
    return rel.T @ wc


def w1_printed_form(cfg: PhysicalConfig, omega: float, a) -> np.ndarray:
    """The closed form with a plus sign on the Omega_1 term (requires Omega_2 = 0).

    Kept for comparison only: it disagrees with the determinant when Omega_1 != 0.
    """
    o1, o2, o3 = cfg.rotation
    if o2 != 0.0:
        raise ValueError("requires Omega_2 = 0")
    a = np.asarray(a, dtype=float)
    n2, w2 = cfg.buoyancy ** 2, omega * omega
    c3 = 2.0 * o3 * (n2 - w2)
    c1 = 2.0 * o1 * w2
    return np.array([-c3 * a[1], c3 * a[0] - c1 * a[2], c1 * a[1]])


@dataclass(frozen=True)
class KelvinPointData:
    x: np.ndarray
    a: np.ndarray
    W1: np.ndarray
    sigma_a: float
    W: np.ndarray
    w1_norm_sq: float


def kelvin_point_data(cfg, omega, x, a, metric=None) -> KelvinPointData:
    """Drift data at boundary point ``x`` with conormal ``a``; needs 0 < |omega| < omega_-."""
    w = abs(omega)
    if metric is None:
        metric = omega_metric(cfg, w)
    a = np.asarray(a, dtype=float)
    w1 = w1_field(cfg, w, a)
    sig = float(a @ metric.sigma @ a)
    if not sig > 0:
        raise DegenerateNormal(f"sigma_omega(a) = {sig} <= 0 for a = {a!r}")
    return KelvinPointData(
        np.asarray(x, dtype=float), a, w1, sig, w1 / math.sqrt(sig), float(w1 @ metric.metric @ w1)
    )


def is_kelvin_elliptic(cfg: PhysicalConfig, omega: float, a) -> Ellipticity:
    """Compare ||W1||^2_omega with sigma_omega(a); depends on omega through |omega| only."""
    require_low_band(cfg, omega, positive=False)
    d = kelvin_point_data(cfg, abs(omega), np.zeros(3), a)
    return _classify(d.w1_norm_sq, d.sigma_a)


def _classify(w1sq, sig):
    if abs(w1sq - sig) <= MARGINAL_GAP * max(abs(w1sq), abs(sig)):
        return Ellipticity.MARGINAL
    return Ellipticity.NON_ELLIPTIC if w1sq > sig else Ellipticity.ELLIPTIC


def ellipticity_margins(cfg: PhysicalConfig, omega: float, a):
    """Vectorized (||W1||^2_omega, sigma_omega(a)) for conormals stacked in rows of ``a``."""
    w = abs(omega)
    require_low_band(cfg, w)
    met = omega_metric(cfg, w)
    _, xi = b_form_matrices(cfg, w)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    w1 = a @ xi.T
    return np.einsum("ij,jk,ik->i", w1, met.metric, w1), np.einsum("ij,jk,ik->i", a, met.sigma, a)


def classify_many(cfg, omega, a):
    w1sq, sig = ellipticity_margins(cfg, omega, a)
    return [_classify(u, s) for u, s in zip(w1sq, sig)]


def kelvin_symbol_at(cfg, omega, x, a, jac, xi, metric=None, drift=True) -> float:
    """k_omega at a boundary point given its conormal ``a`` and chart Jacobian ``jac`` (3x2).

    ``drift=False`` drops the W term, leaving the elliptic part sqrt(g*_d).
    """
    if metric is None:
        metric = omega_metric(cfg, omega)
    xi = np.asarray(xi, dtype=float)
    _, gstar = boundary_metric(cfg, omega, None, x, jac, metric=metric.metric)
    k = math.sqrt(max(float(xi @ gstar @ xi), 0.0))
    if drift:
        d = kelvin_point_data(cfg, omega, x, a, metric=metric)
        w_chart = np.linalg.lstsq(jac, d.W, rcond=None)[0]
        k -= float(xi @ w_chart)
    return k


def kelvin_symbol(cfg: PhysicalConfig, omega: float, ellipsoid: Ellipsoid, chart_id, q, xi, drift=True) -> float:
    """Kelvin symbol at chart point ``q`` of ``chart_id`` for the chart covector ``xi``."""
    x, jac = boundary_point(ellipsoid, chart_id, q)
    return kelvin_symbol_at(cfg, omega, x, ellipsoid.normal_covector(x), jac, xi, drift=drift)


def aligned_reference_symbol(latitude, xi_s, xi_u, omega, buoyancy):
    """Degree-zero aligned-case symbol omega + N cos(lat) xi_s / |xi|."""
    return omega + buoyancy * np.cos(latitude) * xi_s / np.hypot(xi_s, xi_u)


def _tangent_frame(ellipsoid, x):
    """Chart-free Jacobian: L times an orthonormal tangent basis of the sphere at L^{-1}x."""
    axes = np.array(ellipsoid.semi_axes)
    y = x / axes
    y = y / np.linalg.norm(y)
    ref = np.array([0.0, 0.0, 1.0]) if abs(y[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    t1 = np.cross(ref, y)
    t1 /= np.linalg.norm(t1)
    t2 = np.cross(y, t1)
    return axes[:, None] * np.column_stack([t1, t2])


def frequency_roots(cfg, ellipsoid, chart_id, q, xi, interval, grid=ROOT_GRID, tol=ROOT_TOL, drift=True):
    """Frequencies omega in ``interval`` with k_omega(x, xi) = 0, sorted.

    Bracketing scan over ``grid`` equispaced frequencies, then root refinement
    to ``tol``.  The interval must lie inside (0, omega_-).
    """
    a_lo, b_hi = map(float, interval)
    lo = frequency_bounds(cfg).omega_minus
    if not 0 < a_lo < b_hi < lo:
        raise ValueError(f"interval {interval!r} must lie inside (0, {lo})")
    x, jac = boundary_point(ellipsoid, chart_id, q)
    a = ellipsoid.normal_covector(x)

    def k(w):
        return kelvin_symbol_at(cfg, w, x, a, jac, xi, drift=drift)

    ws = np.linspace(a_lo, b_hi, grid)
    vals = np.array([k(w) for w in ws])
    roots = []
    for i in range(grid - 1):
        if vals[i] == 0.0:
            roots.append(float(ws[i]))
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(k, ws[i], ws[i + 1], xtol=tol, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(float(ws[-1]))
    return sorted(roots)
