import copy
import math

import numpy as np
import pytest

from kelvinwaves.errors import InsufficientData, NoCharacteristicDirection, StepCollapse
from kelvinwaves.geometry import SWITCH_LIMIT, Ellipsoid, boundary_point, latitude_longitude, omega_metric
from kelvinwaves.model import PhysicalConfig
from kelvinwaves.raytrace import (
    AttractorKind,
    RayState,
    RaySystem,
    Trajectory,
    _switch,
    detect_attractor,
    group_velocity,
    hamiltonian_field,
    integrate_ray,
    longitudinal_momentum,
    seed_ray,
)

from .oracles.geodesic import ambient_geodesic
from .oracles.limit_cycle import CONTRACTION, spiral_trajectory

W = 0.5


@pytest.fixture(scope="module")
def aligned_ray():
    cfg = PhysicalConfig.aligned_case(2.0, 1.0)
    e = Ellipsoid()
    s0 = seed_ray(cfg, W, e, 0, (0.3, 0.2), 0.0)
    return cfg, e, s0, integrate_ray(RaySystem(cfg, W, e), s0, 60.0)


def test_seed_on_characteristic_set(tilted, triaxial):
    s = seed_ray(tilted, W, triaxial, 2, (0.1, -0.2), 1.0)
    assert abs(RaySystem(tilted, W, triaxial).conserved(s)) < 1e-12
    assert math.hypot(*s.p) == pytest.approx(1.0)


def test_no_direction_at_pole(aligned, sphere):
    with pytest.raises(NoCharacteristicDirection):
        seed_ray(aligned, W, sphere, 4, (0.0, 0.0), 0.0)


def test_symbol_conserved(aligned_ray):
    *_, tr = aligned_ray
    assert np.max(np.abs(tr.k - tr.k[0])) <= 1e-6 * (1 + abs(tr.k[0]))
    assert tr.switches > 0


def test_longitudinal_momentum_conserved(aligned_ray):
    _, e, _, tr = aligned_ray
    pl = np.array([longitudinal_momentum(e, tr.chart[i], tr.q[i], tr.p[i], tr.log_scale[i])
                   for i in range(0, len(tr), 25)])
    assert np.max(np.abs(pl - pl[0])) <= 1e-8
    assert np.allclose(tr.longitudinal_momenta(e)[::25], pl, atol=1e-14)


def test_ray_stays_in_band(aligned_ray):
    *_, tr = aligned_ray
    lat, _ = latitude_longitude(tr.x)
    assert np.all(np.abs(np.cos(lat)) >= W / 2.0 - 1e-9)


def test_group_velocity_eastward(aligned_ray):
    cfg, e, _, tr = aligned_ray
    for i in range(0, len(tr), max(1, len(tr) // 12)):
        st = tr.state(i)
        v, dkdw = group_velocity(cfg, W, e, st)
        x = tr.x[i]
        east = np.cross([0.0, 0.0, 1.0], x)
        assert dkdw > 0
        assert v @ east > 0


def test_field_matches_finite_differences(tilted, triaxial):
    sysm = RaySystem(tilted, W, triaxial)
    st = seed_ray(tilted, W, triaxial, 0, (0.2, 0.1), 0.5)
    dq, dp, ds = hamiltonian_field(tilted, W, triaxial, st)
    h = 1e-6

    def k(q, p):
        return sysm.symbol(0, q, p)

    dkdp = [(k(st.q, st.p + h * e) - k(st.q, st.p - h * e)) / (2 * h) for e in np.eye(2)]
    dkdq = np.array([(k(st.q + h * e, st.p) - k(st.q - h * e, st.p)) / (2 * h) for e in np.eye(2)])
    assert np.allclose(dq, dkdp, atol=1e-7)
    # projectivized momentum: the radial part of -dk/dq goes into log_scale
    assert ds == pytest.approx(-st.p @ dkdq, abs=1e-6)
    assert np.allclose(dp, -dkdq - ds * st.p, atol=1e-6)


def test_drift_free_rays_are_geodesics(tilted, triaxial):
    sysm = RaySystem(tilted, W, triaxial, drift=False)
    st = RayState(0, (0.1, 0.2), (0.3, 1.0))
    tr = integrate_ray(sysm, st, 20.0, characteristic=False)
    x0, jac = boundary_point(triaxial, 0, st.q)
    dq, _, _ = sysm.field(st)
    ref = ambient_geodesic(omega_metric(tilted, W).sigma, triaxial.semi_axes, x0, jac @ dq, tr.t)
    assert np.max(np.abs(ref - tr.x)) <= 1e-6


def test_chart_switch_continuity(tilted, triaxial):
    q = np.array([SWITCH_LIMIT + 0.05, 0.3])
    p = np.array([0.6, -0.8])
    y = np.array([q[0], q[1], p[0], p[1], 0.7])
    new, y2, switched = _switch(triaxial, 0, y)
    assert switched and new != 0
    x1, j1 = boundary_point(triaxial, 0, q)
    x2, j2 = boundary_point(triaxial, new, y2[:2])
    assert np.allclose(x1, x2, atol=1e-10)
    xi1 = np.linalg.pinv(j1).T @ (p * math.exp(0.7))
    xi2 = np.linalg.pinv(j2).T @ (y2[2:4] * math.exp(y2[4]))
    assert np.allclose(xi1, xi2, atol=1e-10)


def test_time_reversal(tilted, triaxial):
    """Reversing p retraces the ray under the symbol with the drift reversed."""
    fwd = RaySystem(tilted, W, triaxial)
    s0 = seed_ray(tilted, W, triaxial, 0, (0.1, 0.2), 0.3)
    a = integrate_ray(fwd, s0, 5.0)
    back = copy.copy(fwd)
    back.consts = fwd.consts.copy()
    back.consts[9:18] *= -1.0
    end = a.state(len(a) - 1)
    b = integrate_ray(back, RayState(end.chart_id, end.q, -end.p, end.log_scale), 5.0)
    assert np.allclose(b.x[-1], a.x[0], atol=1e-8)


def test_step_collapse_reports_state(tilted, triaxial):
    sysm = RaySystem(tilted, W, triaxial)
    s0 = seed_ray(tilted, W, triaxial, 0, (0.1, 0.2), 0.3)
    with pytest.raises(StepCollapse) as exc:
        integrate_ray(sysm, s0, 1.0, rtol=1e-30, atol=1e-30, dt_min=1e-3)
    assert isinstance(exc.value.last_state, RayState)


def test_seed_must_be_characteristic(tilted, triaxial):
    with pytest.raises(ValueError):
        integrate_ray(RaySystem(tilted, W, triaxial), RayState(0, (0.1, 0.2), (1.0, 0.0)), 1.0)


def test_triaxial_log_scale_evolves(tilted, triaxial):
    s0 = seed_ray(tilted, W, triaxial, 0, (0.0, 0.1), 0.0)
    tr = integrate_ray(RaySystem(tilted, W, triaxial), s0, 100.0)
    assert np.max(np.abs(tr.k)) <= 1e-6
    assert np.ptp(tr.log_scale) > 1e-3


def test_limit_cycle_fixture():
    rep = detect_attractor(spiral_trajectory(Ellipsoid()), Ellipsoid())
    assert rep.classification is AttractorKind.LIMIT_CYCLE
    assert rep.contraction_rate == pytest.approx(math.log(CONTRACTION), rel=0.05)
    assert rep.period == pytest.approx(2 * math.pi, rel=1e-6)
    assert rep.shrinking_run >= 5
    assert set(rep.to_dict()) >= {"classification", "period", "contraction_rate", "crossings"}


def test_too_few_crossings():
    tr = spiral_trajectory(Ellipsoid(), turns=3)
    with pytest.raises(InsufficientData):
        detect_attractor(tr, Ellipsoid())


def test_aligned_sphere_quasi_periodic(aligned, sphere):
    s0 = seed_ray(aligned, W, sphere, 0, (0.3, 0.2), 0.0)
    tr = integrate_ray(RaySystem(aligned, W, sphere), s0, 300.0)
    rep = detect_attractor(tr, sphere)
    assert rep.classification is AttractorKind.QUASI_PERIODIC
    assert abs(rep.contraction_rate) < 1e-3


def test_trajectory_accessors(aligned_ray):
    _, e, _, tr = aligned_ray
    assert isinstance(tr, Trajectory) and len(tr) == len(tr.t)
    cov = tr.ambient_covectors(e)[:5]
    assert np.allclose(np.sum(cov * tr.x[:5], axis=1), 0, atol=1e-12)
