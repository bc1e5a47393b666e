"""Monte Carlo evidence for the eigenvalue counting conjecture on ellipsoids.

The unit cosphere bundle of the round sphere carries the measure (area on S^2)
x (angle of the unit covector), of total mass 8 pi^2.  A boundary point of
``E = L(B)`` is labelled by ``y`` on the sphere; a unit covector ``eta`` at
``y`` pulls back to the covector ``xi(L v) = eta(v)`` on the ellipsoid, so in
the frame ``J = L [t1 t2]`` built from an orthonormal tangent basis of the
sphere, ``xi`` has components (cos theta, sin theta).

The integrand is the number of frequencies in [a, b] at which the Kelvin
symbol vanishes, n_[a,b](x, xi).
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .model import PhysicalConfig, frequency_bounds

BUNDLE_VOLUME = 8.0 * math.pi ** 2
EDGE_GUARD = 1e-6
BATCH = 10_000
INTERPRETATION = (
    "integral over the round unit cosphere bundle of S^2 (total mass 8 pi^2) of the number of roots "
    "omega in [a, b] of the Kelvin symbol at the pulled-back boundary covector"
)


def _batches(n_samples, seed):
    sizes = [BATCH] * (n_samples // BATCH)
    if n_samples % BATCH:
        sizes.append(n_samples % BATCH)
    seqs = np.random.SeedSequence(seed).spawn(len(sizes))
    return list(zip(sizes, seqs))


def sample_bundle(n, rng):
    """Uniform points y on S^2, orthonormal tangent frames (t1, t2) and covector angles."""
    y = rng.standard_normal((n, 3))
    y /= np.linalg.norm(y, axis=1, keepdims=True)
    theta = rng.uniform(0.0, 2 * math.pi, n)
    ref = np.where(np.abs(y[:, 2:3]) < 0.9, [[0.0, 0.0, 1.0]], [[1.0, 0.0, 0.0]])
    t1 = np.cross(ref, y)
    t1 /= np.linalg.norm(t1, axis=1, keepdims=True)
    t2 = np.cross(y, t1)
    return y, t1, t2, theta


def bundle_integral(func, n_samples, seed=0):
    """Monte Carlo integral of func(y, theta, t1, t2) over the cosphere bundle; (value, stderr)."""
    vals = []
    for size, seq in _batches(int(n_samples), seed):
        y, t1, t2, th = sample_bundle(size, np.random.default_rng(seq))
        vals.append(np.asarray(func(y, th, t1, t2), dtype=float) * np.ones(size))
    v = np.concatenate(vals)
    return BUNDLE_VOLUME * float(v.mean()), BUNDLE_VOLUME * float(v.std(ddof=1)) / math.sqrt(len(v))


def frequency_grid(cfg, interval, grid=200):
    a, b = map(float, interval)
    lo = frequency_bounds(cfg).omega_minus
    if not 0 <= a < b <= lo:
        raise ValueError(f"interval {interval!r} must lie inside [0, {lo}]")
    return np.linspace(max(a, EDGE_GUARD * lo), min(b, (1 - EDGE_GUARD) * lo), grid)


def root_counts(cfg, ellipsoid, omegas, y, t1, t2, theta, drift=True, rows=None):
    """Number of sign changes of k_omega over the grid ``omegas`` for each bundle sample."""
    axes = np.asarray(ellipsoid.semi_axes, dtype=float)
    jac = axes[None, :, None] * np.stack([t1, t2], axis=-1)
    a = 2.0 * y / axes
    xi = np.column_stack([np.cos(theta), np.sin(theta)])
    if rows is None:
        rows = kernels.metric_rows(cfg, omegas)
    return kernels.backend.count_roots(rows, jac, a, xi, 1.0 if drift else 0.0)


@dataclass
class WeylIntegral:
    interval: tuple
    value: float
    stderr: float
    n_samples: int
    seed: int
    interpretation: str = INTERPRETATION


def liouville_integral(cfg, ellipsoid, interval, n_samples=100_000, seed=0, grid=200, threads=1,
                       drift=True) -> WeylIntegral:
    """Integral of the root count n_[a,b] over the cosphere bundle, with its standard error.

    ``drift=False`` integrates the drift-free symbol, which is elliptic everywhere.
    """
    omegas = frequency_grid(cfg, interval, grid)
    rows = kernels.metric_rows(cfg, omegas)

    def work(job):
        size, seq = job
        y, t1, t2, th = sample_bundle(size, np.random.default_rng(seq))
        return root_counts(cfg, ellipsoid, omegas, y, t1, t2, th, drift=drift, rows=rows)

    jobs = _batches(int(n_samples), seed)
    if threads and threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]
    counts = np.concatenate(parts).astype(float)
    mean = counts.mean()
    err = counts.std(ddof=1) / math.sqrt(len(counts)) if len(counts) > 1 else 0.0
    return WeylIntegral(tuple(interval), float(BUNDLE_VOLUME * mean), float(BUNDLE_VOLUME * err), len(counts), seed)


def aligned_sphere_coverage(buoyancy, coriolis, interval=None):
    """Closed-form bundle measure of {a root in (0, omega_-)} for the aligned sphere.

    A root exists where 0 < N cos(lat) t < omega_- with t = cos(angle) of the
    covector, so at latitude ``lat`` the admissible angle measure is pi when
    N cos(lat) <= omega_- and pi - 2 arccos(omega_- / (N cos(lat))) otherwise.
    """
    from scipy.integrate import quad

    lo = min(buoyancy, coriolis) if interval is None else interval[1]

    def h(lat):
        c = buoyancy * math.cos(lat)
        return math.pi if c <= lo else math.pi - 2 * math.acos(lo / c)

    brk = math.acos(min(1.0, lo / buoyancy)) if buoyancy > 0 else 0.0
    pts = [brk, -brk] if 0 < brk < math.pi / 2 else None
    val, _ = quad(lambda lat: h(lat) * math.cos(lat), -math.pi / 2, math.pi / 2, points=pts, epsabs=1e-13, epsrel=1e-13)
    return 2 * math.pi * val


@dataclass
class WeylEstimate:
    interval: tuple
    integral: float
    stderr: float
    degrees: np.ndarray
    predicted: np.ndarray
    measured: np.ndarray
    ratio: np.ndarray
    trend_slope: float
    trend_intercept: float
    interpretation: str = INTERPRETATION
    extra: dict = field(default_factory=dict)

    def rows(self):
        return list(zip(self.degrees.tolist(), self.measured.tolist(), self.predicted.tolist(), self.ratio.tolist()))

    def to_dict(self):
        return {
            "interval": list(self.interval),
            "integral": self.integral,
            "stderr": self.stderr,
            "trend_slope_ratio_vs_inverse_n": self.trend_slope,
            "trend_intercept": self.trend_intercept,
            "interpretation": self.interpretation,
            "rows": [
                {"n": n, "measured": m, "predicted": p, "ratio": r} for n, m, p, r in self.rows()
            ],
            **self.extra,
        }


def measured_counts(cfg, ellipsoid, interval, n_max, method="graded"):
    """Per-degree number of new eigenvalues in ``interval``, degrees 1..n_max.

    Zero and band-edge eigenvalues are excluded.
    """
    from . import galerkin, graded

    a, b = interval
    out = []
    prev = None
    for n in range(1, n_max + 1):
        if method == "graded":
            ev = graded.new_eigenvalues(cfg, ellipsoid, n)
        else:
            cur = galerkin.spectrum(cfg, ellipsoid, n).eigenvalues
            if prev is None:
                prev = galerkin.spectrum(cfg, ellipsoid, n - 1).eigenvalues
            ev = galerkin.multiset_difference(cur, prev)
            prev = cur
        out.append(int(np.sum(galerkin.low_band_mask(cfg, ev, (a, b)))))
    return np.array(out)


def conjecture_report(cfg: PhysicalConfig, ellipsoid, interval, n_max, n_samples=100_000, seed=0,
                      method="graded", threads=1, integral: WeylIntegral | None = None) -> WeylEstimate:
    """Measured per-degree counts against (2n+3)/(8 pi^2) times the bundle integral."""
    if integral is None:
        integral = liouville_integral(cfg, ellipsoid, interval, n_samples, seed, threads=threads)
    degrees = np.arange(1, n_max + 1)
    predicted = (2 * degrees + 3) / BUNDLE_VOLUME * integral.value
    measured = measured_counts(cfg, ellipsoid, interval, n_max, method)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(predicted > 0, measured / predicted, np.nan)
    ok = np.isfinite(ratio)
    if ok.sum() >= 2:
        slope, intercept = np.polyfit(1.0 / degrees[ok], ratio[ok], 1)
    else:
        slope, intercept = math.nan, math.nan
    return WeylEstimate(
        tuple(interval), integral.value, integral.stderr, degrees, predicted, measured, ratio,
        float(slope), float(intercept), extra={"samples": integral.n_samples, "seed": integral.seed, "method": method},
    )
