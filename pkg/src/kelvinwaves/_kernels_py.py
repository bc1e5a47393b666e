"""Pure-Python implementation of the hot kernels (fallback for the compiled module).

Both backends share one calling convention.  ``consts`` is a float64 array::

    [0:9]   g_omega, row-major
    [9:18]  Xi (W1 = Xi a)
    [18:27] Sigma_omega
    [27:30] semi-axes
    [30]    1.0 to include the drift term W, 0.0 to drop it
    [31]    finite-difference step in chart coordinates

Ray states are ``y = (q1, q2, p1, p2, log_scale)``.
"""
from __future__ import annotations

import math

import numpy as np

# Face frames as (normal, u, v) triples; must match geometry.FACE_FRAMES.
_FRAMES = (
    ((1, 0, 0), (0, 1, 0), (0, 0, 1)),
    ((-1, 0, 0), (0, -1, 0), (0, 0, 1)),
    ((0, 1, 0), (0, 0, 1), (1, 0, 0)),
    ((0, -1, 0), (0, 0, -1), (1, 0, 0)),
    ((0, 0, 1), (1, 0, 0), (0, 1, 0)),
    ((0, 0, -1), (-1, 0, 0), (0, 1, 0)),
)

BACKEND = "python"

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)


def _local(consts, chart, q1, q2):
    """Return (G* entries, w chart vector) at chart point q."""
    n, u, v = _FRAMES[chart]
    t1, t2 = math.tan(q1), math.tan(q2)
    p = [n[i] + t1 * u[i] + t2 * v[i] for i in range(3)]
    r = math.sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    y = [c / r for c in p]
    s1, s2 = 1 + t1 * t1, 1 + t2 * t2
    d1 = [u[i] * s1 for i in range(3)]
    d2 = [v[i] * s2 for i in range(3)]
    yd1 = y[0] * d1[0] + y[1] * d1[1] + y[2] * d1[2]
    yd2 = y[0] * d2[0] + y[1] * d2[1] + y[2] * d2[2]
    ax = consts[27:30]
    j1 = [ax[i] * (d1[i] - y[i] * yd1) / r for i in range(3)]
    j2 = [ax[i] * (d2[i] - y[i] * yd2) / r for i in range(3)]
    a = [2.0 * y[i] / ax[i] for i in range(3)]
    g = consts[0:9]
    gj1 = [g[3 * i] * j1[0] + g[3 * i + 1] * j1[1] + g[3 * i + 2] * j1[2] for i in range(3)]
    gj2 = [g[3 * i] * j2[0] + g[3 * i + 1] * j2[1] + g[3 * i + 2] * j2[2] for i in range(3)]
    b11 = j1[0] * gj1[0] + j1[1] * gj1[1] + j1[2] * gj1[2]
    b12 = j1[0] * gj2[0] + j1[1] * gj2[1] + j1[2] * gj2[2]
    b22 = j2[0] * gj2[0] + j2[1] * gj2[1] + j2[2] * gj2[2]
    det = b11 * b22 - b12 * b12
    s11, s12, s22 = b22 / det, -b12 / det, b11 / det
    w1 = w2 = 0.0
    if consts[30] != 0.0:
        xi = consts[9:18]
        sg = consts[18:27]
        wv = [xi[3 * i] * a[0] + xi[3 * i + 1] * a[1] + xi[3 * i + 2] * a[2] for i in range(3)]
        sa = sum(a[i] * (sg[3 * i] * a[0] + sg[3 * i + 1] * a[1] + sg[3 * i + 2] * a[2]) for i in range(3))
        if not sa > 0:
            return None
        scale = 1.0 / math.sqrt(sa)
        # least squares J w = W via the normal equations
        e11 = j1[0] * j1[0] + j1[1] * j1[1] + j1[2] * j1[2]
        e12 = j1[0] * j2[0] + j1[1] * j2[1] + j1[2] * j2[2]
        e22 = j2[0] * j2[0] + j2[1] * j2[1] + j2[2] * j2[2]
        r1 = (j1[0] * wv[0] + j1[1] * wv[1] + j1[2] * wv[2]) * scale
        r2 = (j2[0] * wv[0] + j2[1] * wv[1] + j2[2] * wv[2]) * scale
        de = e11 * e22 - e12 * e12
        w1 = (e22 * r1 - e12 * r2) / de
        w2 = (e11 * r2 - e12 * r1) / de
    return s11, s12, s22, w1, w2


def symbol(consts, chart, q1, q2, p1, p2):
    loc = _local(consts, chart, q1, q2)
    if loc is None:
        return math.nan
    s11, s12, s22, w1, w2 = loc
    return math.sqrt(max(s11 * p1 * p1 + 2 * s12 * p1 * p2 + s22 * p2 * p2, 0.0)) - p1 * w1 - p2 * w2


def symbol_dp(consts, chart, q1, q2, p1, p2):
    """(k, dk/dp1, dk/dp2)."""
    loc = _local(consts, chart, q1, q2)
    if loc is None:
        return math.nan, math.nan, math.nan
    s11, s12, s22, w1, w2 = loc
    g1 = s11 * p1 + s12 * p2
    g2 = s12 * p1 + s22 * p2
    nrm = math.sqrt(max(p1 * g1 + p2 * g2, 0.0))
    return nrm - p1 * w1 - p2 * w2, g1 / nrm - w1, g2 / nrm - w2


def _dkdq(consts, chart, q1, q2, p1, p2):
    h = consts[31]
    out = []
    for e1, e2 in ((1.0, 0.0), (0.0, 1.0)):
        fp1 = symbol(consts, chart, q1 + h * e1, q2 + h * e2, p1, p2)
        fm1 = symbol(consts, chart, q1 - h * e1, q2 - h * e2, p1, p2)
        fp2 = symbol(consts, chart, q1 + 2 * h * e1, q2 + 2 * h * e2, p1, p2)
        fm2 = symbol(consts, chart, q1 - 2 * h * e1, q2 - 2 * h * e2, p1, p2)
        out.append((8.0 * (fp1 - fm1) - (fp2 - fm2)) / (12.0 * h))
    return out


def rhs(consts, chart, y):
    """Projectivized Hamiltonian field: (dq/dt, dp/dt, d log_scale/dt)."""
    q1, q2, p1, p2 = y[0], y[1], y[2], y[3]
    _, dp1, dp2 = symbol_dp(consts, chart, q1, q2, p1, p2)
    kq1, kq2 = _dkdq(consts, chart, q1, q2, p1, p2)
    sdot = -(p1 * kq1 + p2 * kq2) / (p1 * p1 + p2 * p2)
    return np.array([dp1, dp2, -kq1 - sdot * p1, -kq2 - sdot * p2, sdot])


def dopri_step(consts, chart, y, dt):
    """One Dormand-Prince step; returns (5th-order solution, embedded error estimate)."""
    y = np.asarray(y, dtype=float)
    ks = []
    for i in range(7):
        yi = y.copy()
        for j, aij in enumerate(_A[i]):
            yi += dt * aij * ks[j]
        ks.append(rhs(consts, chart, yi))
    y5 = y + dt * sum(b * k for b, k in zip(_B5, ks))
    y4 = y + dt * sum(b * k for b, k in zip(_B4, ks))
    return y5, y5 - y4


def count_roots(gxs, jac, a, xi, drift=1.0):
    """Sign changes of k_omega along an omega grid, per boundary sample.

    ``gxs`` has one row (g, Xi, Sigma flattened) per grid frequency; ``jac``
    (n, 3, 2), ``a`` (n, 3) and ``xi`` (n, 2) describe the samples.
    """
    gxs = np.asarray(gxs, dtype=float)
    jac = np.asarray(jac, dtype=float)
    a = np.asarray(a, dtype=float)
    xi = np.asarray(xi, dtype=float)
    jtj = np.einsum("nia,nib->nab", jac, jac)
    pinv = np.linalg.solve(jtj, np.transpose(jac, (0, 2, 1)))
    counts = np.zeros(len(a), dtype=np.int64)
    prev = None
    for row in gxs:
        g = row[0:9].reshape(3, 3)
        xm = row[9:18].reshape(3, 3)
        sg = row[18:27].reshape(3, 3)
        gb = np.einsum("nia,ij,njb->nab", jac, g, jac)
        gstar = np.linalg.inv(gb)
        k = np.sqrt(np.maximum(np.einsum("na,nab,nb->n", xi, gstar, xi), 0.0))
        if drift:
            w1 = a @ xm.T
            sa = np.einsum("ni,ij,nj->n", a, sg, a)
            w = np.einsum("nai,ni->na", pinv, w1) / np.sqrt(sa)[:, None]
            k = k - np.einsum("na,na->n", xi, w)
        sgn = np.sign(k)
        if prev is not None:
            counts += (sgn * prev < 0).astype(np.int64)
        prev = np.where(sgn == 0, prev if prev is not None else sgn, sgn)
    return counts
