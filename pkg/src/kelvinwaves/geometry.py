"""Ellipsoid geometry, cube-sphere boundary charts and the frequency-dependent metrics.

Charts
------
The boundary is covered by six charts obtained by central projection of the
faces of the cube onto the unit sphere, followed by the linear map ``L``.
Chart ``f`` uses equiangular coordinates ``q = (q1, q2)``::

    p = n_f + tan(q1) u_f + tan(q2) v_f,    y = p / |p|,    x = L y

so the same ``q`` labels corresponding points of the sphere and of the
ellipsoid.  Faces are numbered +x, -x, +y, -y, +z, -z.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartDomain, DegenerateAxes, NotElliptic
from .model import PhysicalConfig, frequency_bounds, require_low_band

# Columns (normal, u, v) of each face frame; u x v = normal.
FACE_FRAMES = np.array(
    [
        [[1, 0, 0], [0, 1, 0], [0, 0, 1]],
        [[-1, 0, 0], [0, -1, 0], [0, 0, 1]],
        [[0, 1, 0], [0, 0, 1], [1, 0, 0]],
        [[0, -1, 0], [0, 0, -1], [1, 0, 0]],
        [[0, 0, 1], [1, 0, 0], [0, 1, 0]],
        [[0, 0, -1], [-1, 0, 0], [0, 1, 0]],
    ],
    dtype=float,
).transpose(0, 2, 1)

FACE_HALF_WIDTH = math.pi / 4
CHART_MARGIN = math.radians(15.0)
# Rays switch chart beyond this; evaluation is refused beyond CHART_LIMIT.
SWITCH_LIMIT = FACE_HALF_WIDTH + CHART_MARGIN
CHART_LIMIT = math.radians(80.0)


@dataclass(frozen=True)
class Ellipsoid:
    """E = L(B) with L = diag(semi_axes); S(x) = sum x_i^2 / a_i^2 - 1."""

    semi_axes: tuple[float, float, float] = (1.0, 1.0, 1.0)

    def __post_init__(self):
        axes = tuple(float(a) for a in self.semi_axes)
        if len(axes) != 3 or not all(math.isfinite(a) and a > 0 for a in axes):
            raise DegenerateAxes(f"semi-axes must be three positive numbers, got {self.semi_axes!r}")
        object.__setattr__(self, "semi_axes", axes)

    @classmethod
    def from_dict(cls, data):
        return cls(tuple(data["semi_axes"]))

    def to_dict(self):
        return {"semi_axes": list(self.semi_axes)}

    @property
    def lmap(self):
        return np.diag(self.semi_axes)

    @property
    def is_sphere(self):
        return self.semi_axes[0] == self.semi_axes[1] == self.semi_axes[2]

    def defining_function(self, x):
        x = np.asarray(x)
        return np.sum((x / np.array(self.semi_axes)) ** 2, axis=-1) - 1.0

    def normal_covector(self, x):
        """Outward conormal a = grad S(x), deliberately left unnormalized."""
        return 2.0 * np.asarray(x) / np.array(self.semi_axes) ** 2

    def defining_poly(self):
        from .polyalg import MultiPoly

        a1, a2, a3 = self.semi_axes
        return MultiPoly({(2, 0, 0): a1 ** -2, (0, 2, 0): a2 ** -2, (0, 0, 2): a3 ** -2, (0, 0, 0): -1.0})


# ---------------------------------------------------------------------------
# symbol matrix and metric

def sigma_matrix(cfg: PhysicalConfig, omega: float) -> np.ndarray:
    """Matrix of the quadratic symbol of the Poincare equation.

    sigma(xi) = omega ((N^2 - omega^2)|xi|^2 - N^2 xi_3^2 + 4 (xi . Omega)^2)
    """
    om = cfg.omega_vec
    n2 = cfg.buoyancy ** 2
    m = (n2 - omega ** 2) * np.eye(3) + 4.0 * np.outer(om, om)
    m[2, 2] -= n2
    return omega * m


@dataclass(frozen=True)
class OmegaMetric:
    omega: float
    sigma: np.ndarray
    metric: np.ndarray


def omega_metric(cfg: PhysicalConfig, omega: float) -> OmegaMetric:
    """g_omega = Sigma_omega^{-1}, positive definite in the low elliptic band."""
    require_low_band(cfg, omega)
    sig = sigma_matrix(cfg, omega)
    try:
        chol = np.linalg.cholesky(sig)
    except np.linalg.LinAlgError as exc:
        raise NotElliptic(f"Sigma_omega is not positive definite at omega={omega}") from exc
    inv_chol = np.linalg.inv(chol)
    g = inv_chol.T @ inv_chol
    return OmegaMetric(omega, sig, 0.5 * (g + g.T))


def omega_metric_closed_form(cfg: PhysicalConfig, omega: float) -> np.ndarray:
    """Closed-form g_omega in a frame with Omega_2 = 0 (used as a cross-check)."""
    o1, o2, o3 = cfg.rotation
    if o2 != 0.0:
        raise ValueError("closed form requires Omega_2 = 0; use cfg.canonical()")
    n2 = cfg.buoyancy ** 2
    b = frequency_bounds(cfg)
    w2 = omega ** 2
    delta = (w2 - b.omega_minus ** 2) * (w2 - b.omega_plus ** 2)
    g = np.zeros((3, 3))
    g[0, 0] = (4 * o3 ** 2 - w2) / (delta * omega)
    g[2, 2] = (n2 + 4 * o1 ** 2 - w2) / (delta * omega)
    g[0, 2] = g[2, 0] = -4 * o1 * o3 / (delta * omega)
    g[1, 1] = 1.0 / (omega * (n2 - w2))
    return g


# ---------------------------------------------------------------------------
# charts

def _check_chart(chart_id):
    if not 0 <= int(chart_id) < 6:
        raise ChartDomain(f"unknown chart id {chart_id!r}")


def sphere_point(chart_id, q):
    """Point of the unit sphere and its Jacobian (3x2) in chart ``chart_id``."""
    _check_chart(chart_id)
    q = np.asarray(q, dtype=float)
    if q.shape != (2,) or np.any(np.abs(q) >= CHART_LIMIT):
        raise ChartDomain(f"q={q!r} outside chart domain |q_i| < {CHART_LIMIT:.4f}")
    frame = FACE_FRAMES[chart_id]
    t1, t2 = math.tan(q[0]), math.tan(q[1])
    p = frame[:, 0] + t1 * frame[:, 1] + t2 * frame[:, 2]
    r = math.sqrt(p @ p)
    y = p / r
    dp = np.column_stack([frame[:, 1] * (1 + t1 * t1), frame[:, 2] * (1 + t2 * t2)])
    jac = (dp - np.outer(y, y @ dp)) / r
    return y, jac


def sphere_points(charts, q):
    """Vectorized ``sphere_point`` for rows of ``q`` in charts ``charts``; no domain checks."""
    charts = np.asarray(charts, dtype=int)
    q = np.asarray(q, dtype=float)
    frame = FACE_FRAMES[charts]
    t1, t2 = np.tan(q[:, 0]), np.tan(q[:, 1])
    p = frame[:, :, 0] + t1[:, None] * frame[:, :, 1] + t2[:, None] * frame[:, :, 2]
    r = np.linalg.norm(p, axis=1)
    y = p / r[:, None]
    dp = np.stack([frame[:, :, 1] * (1 + t1 * t1)[:, None], frame[:, :, 2] * (1 + t2 * t2)[:, None]], -1)
    jac = (dp - y[:, :, None] * np.einsum("ni,nij->nj", y, dp)[:, None, :]) / r[:, None, None]
    return y, jac


def boundary_point(ellipsoid: Ellipsoid, chart_id, q):
    """Boundary point x = L y(q) and its Jacobian dx/dq (3x2)."""
    y, jac = sphere_point(chart_id, q)
    axes = np.array(ellipsoid.semi_axes)
    return axes * y, axes[:, None] * jac


def chart_coordinates(ellipsoid: Ellipsoid, chart_id, x):
    """Inverse of ``boundary_point``; raises ChartDomain if x is not covered."""
    _check_chart(chart_id)
    y = np.asarray(x, dtype=float) / np.array(ellipsoid.semi_axes)
    y = y / math.sqrt(y @ y)
    z = FACE_FRAMES[chart_id].T @ y
    if z[0] <= 0:
        raise ChartDomain(f"point {x!r} is on the far side of chart {chart_id}")
    q = np.array([math.atan2(z[1], z[0]), math.atan2(z[2], z[0])])
    if np.any(np.abs(q) >= CHART_LIMIT):
        raise ChartDomain(f"point {x!r} outside chart {chart_id}")
    return q


def best_chart(ellipsoid: Ellipsoid, x):
    """Chart whose face centre is closest to the direction of L^{-1} x."""
    y = np.asarray(x, dtype=float) / np.array(ellipsoid.semi_axes)
    return int(np.argmax(FACE_FRAMES[:, :, 0] @ y))


def chart_transition(ellipsoid, chart_from, q, chart_to):
    """Map (q, d q_to / d q_from) between overlapping charts."""
    x, jac_from = boundary_point(ellipsoid, chart_from, q)
    q_to = chart_coordinates(ellipsoid, chart_to, x)
    _, jac_to = boundary_point(ellipsoid, chart_to, q_to)
    dq = np.linalg.lstsq(jac_to, jac_from, rcond=None)[0]
    return q_to, dq


def boundary_metric(cfg, omega, ellipsoid, x, jac, metric=None):
    """Restriction g_{omega,d} = J^T g_omega J of the metric and its inverse (dual)."""
    if metric is None:
        metric = omega_metric(cfg, omega).metric
    gb = jac.T @ metric @ jac
    gb = 0.5 * (gb + gb.T)
    gstar = np.linalg.inv(gb)
    return gb, 0.5 * (gstar + gstar.T)


def latitude_longitude(x):
    x = np.asarray(x, dtype=float)
    r = np.linalg.norm(x, axis=-1)
    return np.arcsin(np.clip(x[..., 2] / r, -1, 1)), np.arctan2(x[..., 1], x[..., 0])
