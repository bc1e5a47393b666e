import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from kelvinwaves.errors import NotElliptic
from kelvinwaves.geometry import Ellipsoid, boundary_point, latitude_longitude, sigma_matrix
from kelvinwaves.model import PhysicalConfig, frequency_bounds
from kelvinwaves.symbols import (
    Ellipticity,
    aligned_reference_symbol,
    b_form_matrices,
    classify_many,
    frequency_roots,
    is_kelvin_elliptic,
    kelvin_point_data,
    kelvin_symbol,
    w1_field,
    w1_printed_form,
)


@st.composite
def cases(draw, omega2=True):
    rot = (draw(st.floats(-1, 1)), draw(st.floats(-1, 1)) if omega2 else 0.0, draw(st.floats(-1, 1)))
    cfg = PhysicalConfig(rot, draw(st.floats(0.1, 3)))
    lo = frequency_bounds(cfg).omega_minus
    assume(lo > 1e-3)
    w = draw(st.floats(0.02, 0.98)) * lo
    a = np.array([draw(st.floats(-2, 2)) for _ in range(3)])
    assume(np.linalg.norm(a) > 0.1)
    return cfg, w, a


def test_symmetric_part_is_sigma():
    rng = np.random.default_rng(11)
    for _ in range(100):
        cfg = PhysicalConfig(tuple(rng.uniform(-1, 1, 3)), rng.uniform(0, 3))
        w = rng.uniform(-2, 2)
        s, xi = b_form_matrices(cfg, w)
        ref = sigma_matrix(cfg, w)
        assert np.linalg.norm(s - ref) <= 1e-10 * np.linalg.norm(ref)
        assert np.array_equal(xi, -xi.T)


def test_no_buoyancy_aligned_drift_is_horizontal_rotation():
    cfg = PhysicalConfig.aligned_case(0.0, 1.0)
    _, xi = b_form_matrices(cfg, 0.4)
    w = xi @ np.array([0.3, -0.7, 0.5])
    # only the (a1 d2 - a2 d1) direction survives: w is proportional to (-a2, a1, 0)
    assert abs(w[2]) < 1e-15
    assert np.cross(w, [0.7, 0.3, 0.0]) == pytest.approx(np.zeros(3), abs=1e-14)


def test_aligned_w1(aligned):
    w = 0.5
    for phi in (0.0, 0.4, 1.2):
        a = np.array([math.cos(phi), 0.0, math.sin(phi)])
        expected = np.array([0.0, 1.0 * (4 - w * w) * math.cos(phi), 0.0])
        assert np.allclose(w1_field(aligned, w, a), expected, atol=1e-14)


def test_vertical_conormal_has_no_drift(aligned):
    assert np.allclose(w1_field(aligned, 0.3, [0, 0, 1.0]), 0.0)


def test_hand_evaluated_w1_from_determinant():
    # The determinant gives -2 Omega_1 w^2 on the (a2 d3 - a3 d2) term.
    cfg = PhysicalConfig((0.3, 0.0, 0.4), 1.0)
    w = 0.2
    a = np.array([0.0, 1.0, 0.0])
    expected = np.array([-2 * 0.4 * (1 - 0.04), 0.0, -2 * 0.3 * 0.04])
    _, xi = b_form_matrices(cfg, w)
    assert np.allclose(xi @ a, expected, atol=1e-14)
    assert np.allclose(w1_field(cfg, w, a), expected, atol=1e-14)


def test_printed_form_differs_on_tilt_term():
    cfg = PhysicalConfig((0.3, 0.0, 0.4), 1.0)
    a = np.array([0.0, 1.0, 0.0])
    printed = w1_printed_form(cfg, 0.2, a)
    assert printed[2] == pytest.approx(+2 * 0.3 * 0.04)
    assert not np.allclose(printed, w1_field(cfg, 0.2, a))
    aligned = PhysicalConfig((0.0, 0.0, 0.4), 1.0)
    assert np.allclose(w1_printed_form(aligned, 0.2, a), w1_field(aligned, 0.2, a))


@given(cases())
def test_w1_matches_determinant(case):
    cfg, w, a = case
    _, xi = b_form_matrices(cfg, w)
    ref = xi @ a
    assert np.linalg.norm(w1_field(cfg, w, a) - ref) <= 1e-10 * max(np.linalg.norm(ref), 1e-12) + 1e-14


@given(cases())
def test_w1_tangent(case):
    cfg, w, a = case
    w1 = w1_field(cfg, w, a)
    assert abs(a @ w1) <= 1e-10 * np.linalg.norm(a) * max(np.linalg.norm(w1), 1e-300) + 1e-15


@given(cases())
def test_w1_even_in_omega(case):
    cfg, w, a = case
    assert np.allclose(w1_field(cfg, w, a), w1_field(cfg, -w, a), rtol=1e-14, atol=0)
    assert is_kelvin_elliptic(cfg, w, a) is is_kelvin_elliptic(cfg, -w, a)


@given(cases())
def test_scale_covariance(case):
    cfg, w, a = case
    assert is_kelvin_elliptic(cfg, w, a) is is_kelvin_elliptic(cfg, w, 2 * a)


def test_ellipticity_examples(aligned):
    assert is_kelvin_elliptic(aligned, 0.5, [1, 0, 0]) is Ellipticity.NON_ELLIPTIC
    phi = math.radians(80)
    assert is_kelvin_elliptic(aligned, 0.5, [math.cos(phi), 0, math.sin(phi)]) is Ellipticity.ELLIPTIC
    with pytest.raises(NotElliptic):
        is_kelvin_elliptic(aligned, 1.5, [1, 0, 0])


def _dense_cases(rng, n):
    out = []
    while len(out) < n:
        o3 = rng.uniform(-1, 1)
        if abs(o3) < 1e-3:
            continue
        cfg = PhysicalConfig((rng.uniform(-1, 1), rng.uniform(-1, 1), o3), rng.uniform(0.1, 3))
        lo = frequency_bounds(cfg).omega_minus
        if lo > 1e-6:
            out.append((cfg, rng.uniform(0.001, 0.999) * lo))
    return out


def test_horizontal_tangent_plane_elliptic():
    for cfg, w in _dense_cases(np.random.default_rng(1), 1000):
        assert is_kelvin_elliptic(cfg, w, [0, 0, 1.0]) is Ellipticity.ELLIPTIC


def test_vertical_tangent_plane_nonelliptic():
    for cfg, w in _dense_cases(np.random.default_rng(2), 1000):
        assert is_kelvin_elliptic(cfg, w, [1.0, 0, 0]) is Ellipticity.NON_ELLIPTIC


def test_classify_many_agrees(tilted):
    a = np.random.default_rng(0).standard_normal((50, 3))
    assert classify_many(tilted, 0.4, a) == [is_kelvin_elliptic(tilted, 0.4, ai) for ai in a]


def test_point_data_invariants(tilted, triaxial):
    x, _ = boundary_point(triaxial, 2, (0.3, -0.2))
    d = kelvin_point_data(tilted, 0.4, x, triaxial.normal_covector(x))
    assert d.sigma_a > 0
    assert np.allclose(d.W, d.W1 / math.sqrt(d.sigma_a))


@given(st.integers(0, 5), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2 * math.pi), st.floats(0.1, 10))
def test_symbol_homogeneous(chart, q1, q2, th, s):
    cfg = PhysicalConfig((0.1, 0.0, 0.5), 2.0)
    e = Ellipsoid((1.0, 0.86, 0.57))
    xi = np.array([math.cos(th), math.sin(th)])
    k1 = kelvin_symbol(cfg, 0.5, e, chart, (q1, q2), xi)
    assert kelvin_symbol(cfg, 0.5, e, chart, (q1, q2), s * xi) == pytest.approx(s * k1, rel=1e-12, abs=1e-12)


@given(st.integers(0, 5), st.floats(-1, 1), st.floats(-1, 1), st.floats(0, 2 * math.pi))
def test_drift_free_symbol_positive(chart, q1, q2, th):
    cfg = PhysicalConfig((0.1, 0.0, 0.5), 2.0)
    e = Ellipsoid((1.0, 0.86, 0.57))
    xi = (math.cos(th), math.sin(th))
    assert kelvin_symbol(cfg, 0.5, e, chart, (q1, q2), xi, drift=False) > 0


def _east_north(x):
    lat, lon = latitude_longitude(x)
    east = np.array([-math.sin(lon), math.cos(lon), 0.0])
    north = np.array([-math.sin(lat) * math.cos(lon), -math.sin(lat) * math.sin(lon), math.cos(lat)])
    return lat, east, north


def test_zero_set_matches_aligned_reference(aligned, sphere):
    """Sign of k and of the reference symbol agree away from their common zero set."""
    w, n = 0.5, 2.0
    checked = 0
    for chart, q in [(0, (0.0, 0.0)), (0, (0.2, 0.5)), (2, (-0.3, 0.1)), (3, (0.6, 0.6)), (1, (0.1, -0.7))]:
        x, jac = boundary_point(sphere, chart, q)
        lat, east, north = _east_north(x)
        for th in np.linspace(0, 2 * math.pi, 73)[:-1]:
            eta = math.cos(th) * east + math.sin(th) * north  # round-metric unit covector
            xi = jac.T @ eta
            ref = aligned_reference_symbol(lat, -math.cos(th), math.sin(th), w, n)
            if abs(ref) < 1e-6:
                continue
            k = kelvin_symbol(aligned, w, sphere, chart, q, xi)
            assert np.sign(k) == np.sign(ref)
            checked += 1
    assert checked > 300


def test_reference_symbol_examples():
    assert aligned_reference_symbol(math.pi / 2, -0.7, 0.2, 0.5, 2.0) == pytest.approx(0.5)
    assert aligned_reference_symbol(0.3, 0.0, 1.0, 0.5, 2.0) == 0.5
    assert aligned_reference_symbol(0.0, -1.0, 0.0, 0.5, 2.0) == pytest.approx(-1.5)


def test_roots_at_equator(aligned, sphere):
    x, jac = boundary_point(sphere, 0, (0.0, 0.0))
    _, east, north = _east_north(x)
    for c in (0.1, 0.3, 0.45):
        eta = c * east + math.sqrt(1 - c * c) * north
        roots = frequency_roots(aligned, sphere, 0, (0.0, 0.0), jac.T @ eta, (1e-6, 0.999999))
        assert roots == pytest.approx([2.0 * c], abs=1e-9)
        assert frequency_roots(aligned, sphere, 0, (0.0, 0.0), jac.T @ (-c * east + math.sqrt(1 - c * c) * north),
                               (1e-6, 0.999999)) == []


def test_no_roots_at_pole(aligned, sphere):
    for th in np.linspace(0, 2 * math.pi, 13):
        assert frequency_roots(aligned, sphere, 4, (0.0, 0.0), (math.cos(th), math.sin(th)), (1e-6, 0.999999)) == []


def test_roots_only_inside_cone(sphere):
    cfg = PhysicalConfig.aligned_case(2.0, 0.5)
    lo = frequency_bounds(cfg).omega_minus
    rng = np.random.default_rng(5)
    for _ in range(60):
        chart = int(rng.integers(0, 6))
        q = rng.uniform(-0.7, 0.7, 2)
        x, jac = boundary_point(sphere, chart, q)
        lat, east, north = _east_north(x)
        th = rng.uniform(0, 2 * math.pi)
        eta = math.cos(th) * east + math.sin(th) * north
        c = math.cos(lat) * math.cos(th)
        roots = frequency_roots(cfg, sphere, chart, q, jac.T @ eta, (1e-6 * lo, (1 - 1e-6) * lo))
        if len(roots):
            assert 0 < c <= 0.5 / 2.0 + 1e-9
        elif 1e-3 < c < 0.25 - 1e-3:
            pytest.fail(f"missed root at cos(lat) t = {c}")


def test_roots_interval_validation(aligned, sphere):
    with pytest.raises(ValueError):
        frequency_roots(aligned, sphere, 0, (0, 0), (1, 0), (0.5, 1.5))
