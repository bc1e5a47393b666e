import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from kelvinwaves.errors import ChartDomain, DegenerateAxes, NotElliptic
from kelvinwaves.geometry import (
    SWITCH_LIMIT,
    Ellipsoid,
    best_chart,
    boundary_metric,
    boundary_point,
    chart_coordinates,
    chart_transition,
    omega_metric,
    omega_metric_closed_form,
    sigma_matrix,
    sphere_point,
    sphere_points,
)
from kelvinwaves.model import PhysicalConfig, frequency_bounds


@st.composite
def low_band_configs(draw):
    rot = tuple(draw(st.floats(-1, 1)) for _ in range(3))
    n = draw(st.floats(0.1, 3))
    cfg = PhysicalConfig(rot, n)
    lo = frequency_bounds(cfg).omega_minus
    assume(lo > 1e-3)
    frac = draw(st.floats(0.02, 0.98))
    return cfg, frac * lo


def test_sigma_aligned_example(aligned):
    s = sigma_matrix(aligned, 0.5)
    assert np.allclose(s / 0.5, np.diag([3.75, 3.75, 0.75]), rtol=1e-15, atol=0)


def test_sigma_odd_in_omega(tilted):
    assert np.allclose(sigma_matrix(tilted, -0.3), -sigma_matrix(tilted, 0.3), rtol=1e-15, atol=0)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2), st.floats(-2, 2))
def test_sigma_e2(o1, o3, n, w):
    cfg = PhysicalConfig((o1, 0.0, o3), n)
    e2 = np.array([0.0, 1.0, 0.0])
    assert e2 @ sigma_matrix(cfg, w) @ e2 == pytest.approx(w * (n * n - w * w), rel=1e-12, abs=1e-12)


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2), st.floats(-2, 2))
def test_sigma_reproduces_symbol(o1, o2, o3, n, w):
    cfg = PhysicalConfig((o1, o2, o3), n)
    xi = np.array([0.3, -1.1, 0.7])
    om = np.array([o1, o2, o3])
    sym = w * ((n * n - w * w) * xi @ xi - n * n * xi[2] ** 2 + 4 * (xi @ om) ** 2)
    assert xi @ sigma_matrix(cfg, w) @ xi == pytest.approx(sym, rel=1e-12, abs=1e-12)


def test_metric_aligned_example(aligned):
    w = 0.5
    g = omega_metric(aligned, w).metric
    assert np.allclose(g, np.diag([1 / (w * 3.75), 1 / (w * 3.75), 1 / (w * 0.75)]), rtol=1e-14, atol=0)


def test_metric_closed_form_entry():
    cfg = PhysicalConfig((0.3, 0.0, 0.4), 1.0)
    w = 0.1
    b = frequency_bounds(cfg)
    delta = (w * w - b.omega_minus ** 2) * (w * w - b.omega_plus ** 2)
    g = omega_metric(cfg, w).metric
    assert delta * w * g[0, 0] == pytest.approx(4 * 0.4 ** 2 - w * w, rel=1e-10)
    assert np.allclose(omega_metric_closed_form(cfg, w), g, rtol=1e-10, atol=0)


def test_metric_requires_low_band(aligned):
    with pytest.raises(NotElliptic):
        omega_metric(aligned, 1.5)


@given(low_band_configs())
def test_metric_spd_and_inverse(case):
    cfg, w = case
    m = omega_metric(cfg, w)
    np.linalg.cholesky(m.sigma)
    np.linalg.cholesky(m.metric)
    assert np.allclose(m.sigma @ m.metric, np.eye(3), atol=1e-12 * np.linalg.cond(m.sigma))


def test_sigma_spd_many_configs():
    rng = np.random.default_rng(3)
    for _ in range(500):
        cfg = PhysicalConfig(tuple(rng.uniform(-1, 1, 3)), rng.uniform(0.1, 3))
        w = rng.uniform(0.01, 0.99) * frequency_bounds(cfg).omega_minus
        np.linalg.cholesky(sigma_matrix(cfg, w))


@given(st.floats(-1, 1), st.floats(-1, 1), st.floats(0.1, 1), st.floats(0.2, 3), st.floats(0.05, 0.95))
def test_wave_band_indefinite(o1, o2, o3, n, frac):
    cfg = PhysicalConfig((o1, o2, o3), n)
    b = frequency_bounds(cfg)
    w = b.omega_minus + frac * (b.omega_plus - b.omega_minus)
    if b.omega_plus - b.omega_minus > 1e-3:
        assert np.linalg.eigvalsh(sigma_matrix(cfg, w)).min() < 0


def test_boundary_point_examples():
    x, jac = boundary_point(Ellipsoid(), 0, (0.0, 0.0))
    assert np.allclose(x, [1, 0, 0])
    x, _ = boundary_point(Ellipsoid((2, 1, 1)), 0, (0.0, 0.0))
    assert np.allclose(x, [2, 0, 0])


@given(st.integers(0, 5), st.floats(-1.3, 1.3), st.floats(-1.3, 1.3))
def test_boundary_point_on_surface(chart, q1, q2):
    e = Ellipsoid((1.4, 0.9, 0.6))
    x, jac = boundary_point(e, chart, (q1, q2))
    assert abs(e.defining_function(x)) < 1e-14
    assert np.allclose(jac.T @ e.normal_covector(x), 0, atol=1e-12)
    assert np.linalg.matrix_rank(jac) == 2


def test_chart_domain():
    with pytest.raises(ChartDomain):
        boundary_point(Ellipsoid(), 0, (1.5, 0.0))
    with pytest.raises(ChartDomain):
        boundary_point(Ellipsoid(), 7, (0.0, 0.0))
    with pytest.raises(DegenerateAxes):
        Ellipsoid((1.0, 0.0, 1.0))


@given(st.integers(0, 5), st.floats(-SWITCH_LIMIT, SWITCH_LIMIT), st.floats(-SWITCH_LIMIT, SWITCH_LIMIT))
def test_chart_roundtrip(chart, q1, q2):
    e = Ellipsoid((1.4, 0.9, 0.6))
    x, _ = boundary_point(e, chart, (q1, q2))
    assert np.allclose(chart_coordinates(e, chart, x), (q1, q2), atol=1e-12)
    other = best_chart(e, x)
    q_to, dq = chart_transition(e, chart, (q1, q2), other)
    x2, jac_to = boundary_point(e, other, q_to)
    assert np.allclose(x2, x, atol=1e-12)
    _, jac_from = boundary_point(e, chart, (q1, q2))
    assert np.allclose(jac_to @ dq, jac_from, atol=1e-10)


def test_boundary_metric_examples(aligned):
    w = 0.5
    x = np.array([1.0, 0, 0])
    jac = np.array([[0, 0], [1.0, 0], [0, 1.0]])
    gb, gs = boundary_metric(aligned, w, Ellipsoid(), x, jac)
    assert np.allclose(gb, np.diag([1 / (w * 3.75), 1 / (w * 0.75)]), rtol=1e-14, atol=0)
    assert np.allclose(gb @ gs, np.eye(2), atol=1e-12)


def test_boundary_metric_identity():
    jac = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 2)))[0]
    gb, _ = boundary_metric(None, None, None, None, jac, metric=np.eye(3))
    assert np.allclose(gb, np.eye(2), atol=1e-14)


def test_canonical_frame_preserves_bands():
    cfg = PhysicalConfig((0.3, 0.4, 0.2), 1.0)
    assert frequency_bounds(cfg.canonical()).omega_minus == pytest.approx(frequency_bounds(cfg).omega_minus)
    assert math.isclose(cfg.canonical().coriolis, cfg.coriolis)


def test_vectorized_sphere_points():
    rng = np.random.default_rng(3)
    charts = rng.integers(0, 6, 50)
    q = rng.uniform(-1.2, 1.2, (50, 2))
    y, jac = sphere_points(charts, q)
    for i in range(50):
        yi, ji = sphere_point(charts[i], q[i])
        assert np.allclose(y[i], yi, atol=1e-15) and np.allclose(jac[i], ji, atol=1e-14)
