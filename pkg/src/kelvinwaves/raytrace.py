"""Hamiltonian rays of the Kelvin symbol on the boundary, and attractor diagnostics.

Rays are integrated in projectivized form: the chart covector is ``xi = e^s p``
with ``|p| = 1``, so that covector growth near attractors goes into the
``log_scale`` channel ``s`` instead of overflowing.  The symbol is homogeneous
of degree one, hence

    dq/dt = dk/dp,   ds/dt = -p . dk/dq,   dp/dt = -dk/dq - (ds/dt) p.

``dk/dq`` uses a fourth-order central difference with step ``FD_STEP``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernels
from .errors import DegenerateNormal, InsufficientData, NoCharacteristicDirection, StepCollapse
from .geometry import (
    CHART_LIMIT,
    FACE_FRAMES,
    SWITCH_LIMIT,
    Ellipsoid,
    best_chart,
    boundary_point,
    chart_transition,
    sphere_points,
)
from .model import require_low_band


@dataclass
class RayState:
    chart_id: int
    q: np.ndarray
    p: np.ndarray
    log_scale: float = 0.0
    t: float = 0.0

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        p = np.asarray(self.p, dtype=float)
        nrm = float(np.hypot(*p))
        if nrm == 0:
            raise ValueError("covector must be nonzero")
        self.p = p / nrm
        self.log_scale = float(self.log_scale) + math.log(nrm)

    @property
    def vector(self):
        return np.array([self.q[0], self.q[1], self.p[0], self.p[1], self.log_scale])


@dataclass
class Trajectory:
    t: np.ndarray
    chart: np.ndarray
    q: np.ndarray
    p: np.ndarray
    log_scale: np.ndarray
    x: np.ndarray
    k: np.ndarray  # e^{log_scale} k(q, p) along the ray
    switches: int = 0

    def __len__(self):
        return len(self.t)

    def state(self, i) -> RayState:
        return RayState(int(self.chart[i]), self.q[i], self.p[i], self.log_scale[i], self.t[i])

    def longitudinal_momenta(self, ellipsoid):
        """``longitudinal_momentum`` at every recorded step."""
        _, jac = sphere_points(self.chart, self.q)
        jac = jac * np.asarray(ellipsoid.semi_axes, dtype=float)[None, :, None]
        east = np.cross([0.0, 0.0, 1.0], self.x)
        gram = np.einsum("nia,nib->nab", jac, jac)
        v = np.linalg.solve(gram, np.einsum("nia,ni->na", jac, east)[..., None])[..., 0]
        return np.exp(self.log_scale) * np.sum(self.p * v, axis=1)

    def ambient_covectors(self, ellipsoid):
        """Covectors as 3-vectors tangent to the boundary (minimum-norm lift of the chart components)."""
        out = np.empty((len(self), 3))
        for i in range(len(self)):
            _, jac = boundary_point(ellipsoid, int(self.chart[i]), self.q[i])
            out[i] = np.linalg.pinv(jac).T @ (self.p[i] * math.exp(self.log_scale[i]))
        return out


class RaySystem:
    """Frequency-fixed Kelvin symbol on one ellipsoid, bound to the kernel backend."""

    def __init__(self, cfg, omega, ellipsoid: Ellipsoid, drift=True, fd_step=kernels.FD_STEP):
        require_low_band(cfg, omega)
        self.cfg = cfg
        self.omega = float(omega)
        self.ellipsoid = ellipsoid
        self.drift = bool(drift)
        self.consts = kernels.make_consts(cfg, omega, ellipsoid, drift=drift, fd_step=fd_step)
        self.backend = kernels.backend

    def symbol(self, chart, q, p):
        k = self.backend.symbol(self.consts, int(chart), float(q[0]), float(q[1]), float(p[0]), float(p[1]))
        if math.isnan(k):
            raise DegenerateNormal("sigma_omega(a) <= 0 at ray point")
        return k

    def conserved(self, state: RayState):
        return math.exp(state.log_scale) * self.symbol(state.chart_id, state.q, state.p)

    def field(self, state: RayState):
        dy = self.backend.rhs(self.consts, int(state.chart_id), state.vector)
        return dy[:2], dy[2:4], dy[4]


def hamiltonian_field(cfg, omega, ellipsoid, state: RayState, drift=True):
    """(dq/dt, dp/dt, d log_scale/dt) at ``state``."""
    return RaySystem(cfg, omega, ellipsoid, drift).field(state)


def seed_ray(cfg, omega, ellipsoid, chart_id, q, angle, drift=True, n_scan=360) -> RayState:
    """Characteristic covector direction at ``q`` nearest to the chart angle ``angle``."""
    sys_ = ray_system(cfg, omega, ellipsoid, drift)
    q = np.asarray(q, dtype=float)

    def k(th):
        return sys_.symbol(chart_id, q, (math.cos(th), math.sin(th)))

    ths = np.linspace(0.0, 2 * math.pi, n_scan + 1)
    vals = np.array([k(th) for th in ths])
    roots = []
    for i in range(n_scan):
        if vals[i] == 0.0:
            roots.append(ths[i])
        elif vals[i] * vals[i + 1] < 0:
            roots.append(brentq(k, ths[i], ths[i + 1], xtol=1e-15, rtol=1e-15))
    if not roots:
        raise NoCharacteristicDirection(f"k_omega has no zero over covector directions at chart {chart_id}, q={q}")
    dist = [abs((r - angle + math.pi) % (2 * math.pi) - math.pi) for r in roots]
    th = roots[int(np.argmin(dist))]
    return RayState(chart_id, q, (math.cos(th), math.sin(th)))


def ray_system(cfg, omega, ellipsoid, drift=True):
    return RaySystem(cfg, omega, ellipsoid, drift)


def _switch(ellipsoid, chart, y):
    """Move to the best chart if |q| is beyond the switch limit; returns (chart, y, switched)."""
    if max(abs(y[0]), abs(y[1])) <= SWITCH_LIMIT:
        return chart, y, False
    x, _ = boundary_point(ellipsoid, chart, y[:2])
    new = best_chart(ellipsoid, x)
    if new == chart:
        return chart, y, False
    q_new, dq = chart_transition(ellipsoid, chart, y[:2], new)
    p_new = np.linalg.solve(dq.T, y[2:4])
    nrm = math.hypot(*p_new)
    return new, np.array([q_new[0], q_new[1], p_new[0] / nrm, p_new[1] / nrm, y[4] + math.log(nrm)]), True


def integrate_ray(
    system: RaySystem,
    state0: RayState,
    T: float,
    rtol=1e-10,
    atol=1e-12,
    k_tol=1e-8,
    dt_init=1e-2,
    dt_max=0.05,
    dt_min=1e-12,
    characteristic=True,
) -> Trajectory:
    """Adaptive Dormand-Prince integration of a ray over time ``T``.

    Steps are rejected when the embedded error exceeds the tolerances or when
    the conserved value ``e^s k(q, p)`` moves by more than ``k_tol (1 + |k0|)``.
    With ``characteristic=True`` the seed must satisfy |k| <= 1e-8.
    """
    be = system.backend
    consts = system.consts
    ell = system.ellipsoid
    chart = int(state0.chart_id)
    y = state0.vector.copy()
    k0 = system.conserved(state0)
    if characteristic and abs(k0) > 1e-8:
        raise ValueError(f"seed is not on the characteristic set (k = {k0:.3e})")
    ktol = k_tol * (1.0 + abs(k0))
    t = float(state0.t)
    t_end = t + float(T)
    rec_t, rec_c, rec_y, rec_k = [t], [chart], [y.copy()], [k0]
    dt = min(dt_init, dt_max)
    switches = 0
    while t < t_end - 1e-14:
        h = min(dt, t_end - t)
        y5, err = be.dopri_step(consts, chart, y, h)
        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y5))
        en = float(np.max(np.abs(err) / scale)) if np.all(np.isfinite(y5)) else math.inf
        knew = math.nan
        if en <= 1.0:
            nrm = math.hypot(y5[2], y5[3])
            y5 = np.array([y5[0], y5[1], y5[2] / nrm, y5[3] / nrm, y5[4] + math.log(nrm)])
            knew = math.exp(y5[4]) * be.symbol(consts, chart, y5[0], y5[1], y5[2], y5[3])
        if en <= 1.0 and abs(knew - k0) <= ktol:
            t += h
            chart, y, sw = _switch(ell, chart, y5)
            switches += sw
            rec_t.append(t)
            rec_c.append(chart)
            rec_y.append(y.copy())
            rec_k.append(knew)
            fac = 0.9 * en ** -0.2 if en > 0 else 5.0
            dt = min(dt_max, h * min(5.0, max(0.2, fac)))
        else:
            fac = 0.9 * en ** -0.2 if math.isfinite(en) and en > 0 else 0.2
            dt = h * min(0.5, max(0.1, fac))
            if dt < dt_min:
                last = RayState(chart, y[:2], y[2:4], y[4], t)
                raise StepCollapse(f"step size underflow at t={t:.6g}", last)
    ys = np.array(rec_y)
    charts = np.array(rec_c, dtype=int)
    xs = np.asarray(ell.semi_axes, dtype=float) * sphere_points(charts, ys[:, :2])[0]
    return Trajectory(np.array(rec_t), charts, ys[:, :2], ys[:, 2:4], ys[:, 4], xs, np.array(rec_k), switches)


def longitudinal_momentum(ellipsoid, chart, q, p, log_scale=0.0):
    """p_lambda = xi(d/d lambda) with d/d lambda = e3 x x (axisymmetric boundaries)."""
    x, jac = boundary_point(ellipsoid, chart, q)
    v = np.linalg.lstsq(jac, np.cross([0.0, 0.0, 1.0], x), rcond=None)[0]
    return math.exp(log_scale) * float(np.dot(p, v))


def group_velocity(cfg, omega, ellipsoid, state: RayState, d_omega=1e-6, drift=True):
    """Ambient group velocity -(dk/dxi) / (dk/domega) at ``state`` (3-vector)."""
    sys_ = RaySystem(cfg, omega, ellipsoid, drift)
    k, dk1, dk2 = sys_.backend.symbol_dp(sys_.consts, int(state.chart_id), *state.q, *state.p)
    kp = RaySystem(cfg, omega + d_omega, ellipsoid, drift).symbol(state.chart_id, state.q, state.p)
    km = RaySystem(cfg, omega - d_omega, ellipsoid, drift).symbol(state.chart_id, state.q, state.p)
    dkdw = (kp - km) / (2 * d_omega)
    _, jac = boundary_point(ellipsoid, state.chart_id, state.q)
    return -(jac @ np.array([dk1, dk2])) / dkdw, dkdw


# ---------------------------------------------------------------------------
# attractor detection

class AttractorKind(enum.Enum):
    LIMIT_CYCLE = "LimitCycle"
    QUASI_PERIODIC = "QuasiPeriodic"
    UNDETERMINED = "Undetermined"


@dataclass(frozen=True)
class Section:
    """Chart coordinate line ``q[axis] = value`` crossed in direction ``sign``."""

    chart_id: int
    axis: int
    value: float
    sign: int = 1


@dataclass
class AttractorReport:
    classification: AttractorKind
    period: float
    contraction_rate: float
    crossings: int
    section: Section
    rate_from_returns: float | None = None
    rate_from_scale: float | None = None
    shrinking_run: int = 0
    returns: np.ndarray = field(default=None, repr=False)
    lag: int = 1

    def to_dict(self):
        return {
            "classification": self.classification.value,
            "period": self.period,
            "contraction_rate": self.contraction_rate,
            "rate_from_returns": self.rate_from_returns,
            "rate_from_scale": self.rate_from_scale,
            "crossings": self.crossings,
            "shrinking_run": self.shrinking_run,
            "lag": self.lag,
            "section": {"chart_id": self.section.chart_id, "axis": self.section.axis,
                        "value": self.section.value, "sign": self.section.sign},
        }


MIN_CROSSINGS = 20
RATE_TOL = 1e-3
NOISE_FLOOR = 1e-7


def _chart_jacobians(ellipsoid, chart_id, x):
    """Vectorized chart coordinates and Jacobians dx/dq for boundary points ``x`` (rows).

    Points outside the chart get NaN coordinates.
    """
    axes = np.array(ellipsoid.semi_axes)
    y = x / axes
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    frame = FACE_FRAMES[chart_id]
    z = y @ frame
    bad = z[:, 0] <= 0
    zc = np.where(bad, 1.0, z[:, 0])
    t1, t2 = z[:, 1] / zc, z[:, 2] / zc
    q = np.column_stack([np.arctan(t1), np.arctan(t2)])
    q[bad | np.any(np.abs(q) >= CHART_LIMIT, axis=1)] = np.nan
    pt = frame[:, 0] + t1[:, None] * frame[:, 1] + t2[:, None] * frame[:, 2]
    r = np.linalg.norm(pt, axis=1)
    dp = np.stack([frame[:, 1][None, :] * (1 + t1 * t1)[:, None], frame[:, 2][None, :] * (1 + t2 * t2)[:, None]], -1)
    jac = (dp - y[:, :, None] * np.einsum("ni,nij->nj", y, dp)[:, None, :]) / r[:, None, None]
    return q, axes[None, :, None] * jac


def _section_series(traj: Trajectory, ellipsoid, chart_id):
    """Chart coordinates and covector angle of every sample, seen in ``chart_id`` (NaN if uncovered)."""
    qs, jac_to = _chart_jacobians(ellipsoid, chart_id, traj.x)
    pv = np.array(traj.p, dtype=float)
    for c in np.unique(traj.chart):
        m = traj.chart == c
        if c == chart_id or not m.any():
            continue
        _, jac_from = _chart_jacobians(ellipsoid, int(c), traj.x[m])
        # tangent lift of p through the source chart, read back in the target chart
        gram = np.einsum("nki,nkj->nij", jac_from, jac_from)
        eta = np.einsum("nki,ni->nk", jac_from, np.linalg.solve(gram, traj.p[m][..., None])[..., 0])
        pv[m] = np.einsum("nki,nk->ni", jac_to[m], eta)
    ang = np.arctan2(pv[:, 1], pv[:, 0])
    ang[np.isnan(qs[:, 0])] = np.nan
    return qs, ang


def _interp(ts, vals, t):
    """Cubic Lagrange interpolation through four samples."""
    out = 0.0
    for i in range(len(ts)):
        li = 1.0
        for j in range(len(ts)):
            if j != i:
                li *= (t - ts[j]) / (ts[i] - ts[j])
        out += li * vals[i]
    return out


def section_crossings(traj: Trajectory, ellipsoid, section: Section):
    """Return arrays (t, z, angle, log_scale) at the crossings of ``section``."""
    qs, ang = _section_series(traj, ellipsoid, section.chart_id)
    ang = np.unwrap(np.where(np.isnan(ang), 0.0, ang))
    f = qs[:, section.axis] - section.value
    other = 1 - section.axis
    out = []
    n = len(traj)
    for i in range(n - 1):
        a, b = f[i], f[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if section.sign > 0 and not (a < 0 <= b):
            continue
        if section.sign < 0 and not (a > 0 >= b):
            continue
        lo, hi = max(0, i - 1), min(n, i + 3)
        idx = np.arange(lo, hi)
        if not np.all(np.isfinite(f[idx])) or len(idx) < 2:
            idx = np.array([i, i + 1])
        ts = traj.t[idx]
        # root of the interpolated crossing function by secant refinement
        tc = traj.t[i] + (traj.t[i + 1] - traj.t[i]) * a / (a - b)
        for _ in range(8):
            fv = _interp(ts, f[idx], tc)
            h = 1e-7 * max(1.0, abs(tc))
            d = (_interp(ts, f[idx], tc + h) - fv) / h
            if d == 0:
                break
            tc -= fv / d
        tc = min(max(tc, traj.t[i]), traj.t[i + 1])
        out.append(
            (tc, _interp(ts, qs[idx, other], tc), _interp(ts, ang[idx], tc), _interp(ts, traj.log_scale[idx], tc))
        )
    if not out:
        return np.zeros((0, 4))
    return np.array(out)


def choose_section(traj: Trajectory, ellipsoid, warmup=0.25):
    """Chart line with the most crossings over the first ``warmup`` fraction of the ray."""
    m = max(int(len(traj) * warmup), 8)
    head = Trajectory(traj.t[:m], traj.chart[:m], traj.q[:m], traj.p[:m], traj.log_scale[:m], traj.x[:m], traj.k[:m])
    best, best_n = None, -1
    for c in sorted(set(int(v) for v in traj.chart)):
        qs, _ = _section_series(head, ellipsoid, c)
        for axis in (0, 1):
            col = qs[:, axis]
            col = col[np.isfinite(col)]
            if len(col) < 4:
                continue
            value = float(np.median(col))
            for sign in (1, -1):
                sec = Section(c, axis, value, sign)
                ncr = len(section_crossings(head, ellipsoid, sec))
                if ncr > best_n:
                    best, best_n = sec, ncr
    if best is None:
        raise InsufficientData("trajectory never stays in one chart long enough to define a section")
    return best


def _slope(y):
    k = np.arange(len(y), dtype=float)
    return float(np.polyfit(k, y, 1)[0])


def _return_lag(z, ang, max_lag=12):
    """Smallest crossing lag whose typical return distance is close to the best one.

    A cycle may cross the section several times per period; comparing each
    crossing with the one ``lag`` steps later follows the same branch.
    """
    top = max(1, min(max_lag, len(z) // 3))
    med = []
    for m in range(1, top + 1):
        d = np.hypot(z[m:] - z[:-m], np.angle(np.exp(1j * (ang[m:] - ang[:-m]))))
        med.append(float(np.median(d)))
    best = min(med)
    for m, v in enumerate(med, start=1):
        if v <= max(10.0 * best, NOISE_FLOOR):
            return m
    return 1


def detect_attractor(traj: Trajectory, ellipsoid, section: Section | None = None) -> AttractorReport:
    """Poincare-return diagnostics on a chart section.

    Each crossing is compared with the one a full period later (``lag``
    crossings on).  The contraction rate per return is the least-squares slope
    of ``log |z_{k+lag} - z_k|``; when those returns coincide to within the
    noise floor it falls back to minus the slope of ``log_scale`` per return.
    """
    if section is None:
        section = choose_section(traj, ellipsoid)
    cr = section_crossings(traj, ellipsoid, section)
    if len(cr) < MIN_CROSSINGS:
        raise InsufficientData(f"{len(cr)} section crossings, need at least {MIN_CROSSINGS}")
    t, z, ang, s = cr.T
    lag = _return_lag(z, ang)
    period = float(np.mean(t[lag:] - t[:-lag]))
    d = np.hypot(z[lag:] - z[:-lag], np.angle(np.exp(1j * (ang[lag:] - ang[:-lag]))))
    rate_scale = -_slope(s)
    resolved = d > NOISE_FLOOR
    rate_ret = _slope(np.log(d[resolved])) if resolved.sum() >= 5 else None
    rate = rate_ret if rate_ret is not None and resolved.mean() > 0.5 else rate_scale
    run = best = 0
    for i in range(1, len(d)):
        run = run + 1 if d[i] < d[i - 1] else 0
        best = max(best, run)
    if rate < -RATE_TOL and best >= 5:
        kind = AttractorKind.LIMIT_CYCLE
    elif abs(rate) < RATE_TOL:
        kind = AttractorKind.QUASI_PERIODIC
    else:
        kind = AttractorKind.UNDETERMINED
    return AttractorReport(kind, period, rate, len(cr), section, rate_ret, rate_scale, best, cr, lag)
