# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels; same calling convention as ``_kernels_py``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, tan, NAN, isnan

cnp.import_array()

BACKEND = "cython"

cdef double FRAMES[6][3][3]
FRAMES[0][0][:] = [1, 0, 0]; FRAMES[0][1][:] = [0, 1, 0]; FRAMES[0][2][:] = [0, 0, 1]
FRAMES[1][0][:] = [-1, 0, 0]; FRAMES[1][1][:] = [0, -1, 0]; FRAMES[1][2][:] = [0, 0, 1]
FRAMES[2][0][:] = [0, 1, 0]; FRAMES[2][1][:] = [0, 0, 1]; FRAMES[2][2][:] = [1, 0, 0]
FRAMES[3][0][:] = [0, -1, 0]; FRAMES[3][1][:] = [0, 0, -1]; FRAMES[3][2][:] = [1, 0, 0]
FRAMES[4][0][:] = [0, 0, 1]; FRAMES[4][1][:] = [1, 0, 0]; FRAMES[4][2][:] = [0, 1, 0]
FRAMES[5][0][:] = [0, 0, -1]; FRAMES[5][1][:] = [-1, 0, 0]; FRAMES[5][2][:] = [0, 1, 0]

cdef double DP_A[7][6]
cdef double DP_B5[7]
cdef double DP_B4[7]
DP_A[1][:1] = [1.0 / 5]
DP_A[2][:2] = [3.0 / 40, 9.0 / 40]
DP_A[3][:3] = [44.0 / 45, -56.0 / 15, 32.0 / 9]
DP_A[4][:4] = [19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729]
DP_A[5][:5] = [9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656]
DP_A[6][:6] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84]
DP_B5[:] = [35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84, 0.0]
DP_B4[:] = [5179.0 / 57600, 0.0, 7571.0 / 16695, 393.0 / 640, -92097.0 / 339200, 187.0 / 2100, 1.0 / 40]


cdef int _local(const double* c, int chart, double q1, double q2, double* out) noexcept nogil:
    """out = (s11, s12, s22, w1, w2); returns -1 if sigma(a) <= 0."""
    cdef double t1 = tan(q1), t2 = tan(q2)
    cdef double p[3], y[3], d1[3], d2[3], j1[3], j2[3], a[3], gj1[3], gj2[3], wv[3]
    cdef int i
    cdef double r, s1, s2, yd1, yd2, b11, b12, b22, det
    cdef double sa, scale, e11, e12, e22, r1, r2, de
    for i in range(3):
        p[i] = FRAMES[chart][0][i] + t1 * FRAMES[chart][1][i] + t2 * FRAMES[chart][2][i]
    r = sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2])
    s1 = 1 + t1 * t1
    s2 = 1 + t2 * t2
    for i in range(3):
        y[i] = p[i] / r
        d1[i] = FRAMES[chart][1][i] * s1
        d2[i] = FRAMES[chart][2][i] * s2
    yd1 = y[0] * d1[0] + y[1] * d1[1] + y[2] * d1[2]
    yd2 = y[0] * d2[0] + y[1] * d2[1] + y[2] * d2[2]
    for i in range(3):
        j1[i] = c[27 + i] * (d1[i] - y[i] * yd1) / r
        j2[i] = c[27 + i] * (d2[i] - y[i] * yd2) / r
        a[i] = 2.0 * y[i] / c[27 + i]
    for i in range(3):
        gj1[i] = c[3 * i] * j1[0] + c[3 * i + 1] * j1[1] + c[3 * i + 2] * j1[2]
        gj2[i] = c[3 * i] * j2[0] + c[3 * i + 1] * j2[1] + c[3 * i + 2] * j2[2]
    b11 = j1[0] * gj1[0] + j1[1] * gj1[1] + j1[2] * gj1[2]
    b12 = j1[0] * gj2[0] + j1[1] * gj2[1] + j1[2] * gj2[2]
    b22 = j2[0] * gj2[0] + j2[1] * gj2[1] + j2[2] * gj2[2]
    det = b11 * b22 - b12 * b12
    out[0] = b22 / det
    out[1] = -b12 / det
    out[2] = b11 / det
    out[3] = 0.0
    out[4] = 0.0
    if c[30] != 0.0:
        sa = 0.0
        for i in range(3):
            wv[i] = c[9 + 3 * i] * a[0] + c[10 + 3 * i] * a[1] + c[11 + 3 * i] * a[2]
            sa += a[i] * (c[18 + 3 * i] * a[0] + c[19 + 3 * i] * a[1] + c[20 + 3 * i] * a[2])
        if not sa > 0:
            return -1
        scale = 1.0 / sqrt(sa)
        e11 = j1[0] * j1[0] + j1[1] * j1[1] + j1[2] * j1[2]
        e12 = j1[0] * j2[0] + j1[1] * j2[1] + j1[2] * j2[2]
        e22 = j2[0] * j2[0] + j2[1] * j2[1] + j2[2] * j2[2]
        r1 = (j1[0] * wv[0] + j1[1] * wv[1] + j1[2] * wv[2]) * scale
        r2 = (j2[0] * wv[0] + j2[1] * wv[1] + j2[2] * wv[2]) * scale
        de = e11 * e22 - e12 * e12
        out[3] = (e22 * r1 - e12 * r2) / de
        out[4] = (e11 * r2 - e12 * r1) / de
    return 0


cdef double _symbol(const double* c, int chart, double q1, double q2, double p1, double p2) noexcept nogil:
    cdef double loc[5]
    cdef double v
    if _local(c, chart, q1, q2, loc) < 0:
        return NAN
    v = loc[0] * p1 * p1 + 2 * loc[1] * p1 * p2 + loc[2] * p2 * p2
    if v < 0:
        v = 0
    return sqrt(v) - p1 * loc[3] - p2 * loc[4]


cdef void _rhs(const double* c, int chart, const double* y, double* dy) noexcept nogil:
    cdef double loc[5]
    cdef double q1 = y[0], q2 = y[1], p1 = y[2], p2 = y[3]
    cdef double h = c[31]
    cdef double g1, g2, nrm, kq1, kq2, sdot
    cdef int i
    if _local(c, chart, q1, q2, loc) < 0:
        for i in range(5):
            dy[i] = NAN
        return
    g1 = loc[0] * p1 + loc[1] * p2
    g2 = loc[1] * p1 + loc[2] * p2
    nrm = sqrt(p1 * g1 + p2 * g2)
    dy[0] = g1 / nrm - loc[3]
    dy[1] = g2 / nrm - loc[4]
    kq1 = (8.0 * (_symbol(c, chart, q1 + h, q2, p1, p2) - _symbol(c, chart, q1 - h, q2, p1, p2))
           - (_symbol(c, chart, q1 + 2 * h, q2, p1, p2) - _symbol(c, chart, q1 - 2 * h, q2, p1, p2))) / (12.0 * h)
    kq2 = (8.0 * (_symbol(c, chart, q1, q2 + h, p1, p2) - _symbol(c, chart, q1, q2 - h, p1, p2))
           - (_symbol(c, chart, q1, q2 + 2 * h, p1, p2) - _symbol(c, chart, q1, q2 - 2 * h, p1, p2))) / (12.0 * h)
    sdot = -(p1 * kq1 + p2 * kq2) / (p1 * p1 + p2 * p2)
    dy[2] = -kq1 - sdot * p1
    dy[3] = -kq2 - sdot * p2
    dy[4] = sdot


def symbol(double[::1] consts, int chart, double q1, double q2, double p1, double p2):
    return _symbol(&consts[0], chart, q1, q2, p1, p2)


def symbol_dp(double[::1] consts, int chart, double q1, double q2, double p1, double p2):
    cdef double loc[5]
    cdef double g1, g2, nrm
    if _local(&consts[0], chart, q1, q2, loc) < 0:
        return NAN, NAN, NAN
    g1 = loc[0] * p1 + loc[1] * p2
    g2 = loc[1] * p1 + loc[2] * p2
    nrm = sqrt(p1 * g1 + p2 * g2)
    return nrm - p1 * loc[3] - p2 * loc[4], g1 / nrm - loc[3], g2 / nrm - loc[4]


def rhs(double[::1] consts, int chart, y):
    cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
    out = np.empty(5)
    cdef double[::1] ov = out
    _rhs(&consts[0], chart, &yv[0], &ov[0])
    return out


def dopri_step(double[::1] consts, int chart, y, double dt):
    cdef double[::1] y0 = np.ascontiguousarray(y, dtype=np.float64)
    cdef double ks[7][5]
    cdef double yi[5]
    cdef int s, j, i
    y5 = np.empty(5)
    err = np.empty(5)
    cdef double[::1] y5v = y5
    cdef double[::1] ev = err
    cdef double acc5, acc4
    with nogil:
        for s in range(7):
            for i in range(5):
                yi[i] = y0[i]
                for j in range(s):
                    yi[i] += dt * DP_A[s][j] * ks[j][i]
            _rhs(&consts[0], chart, yi, ks[s])
        for i in range(5):
            acc5 = 0.0
            acc4 = 0.0
            for s in range(7):
                acc5 += DP_B5[s] * ks[s][i]
                acc4 += DP_B4[s] * ks[s][i]
            y5v[i] = y0[i] + dt * acc5
            ev[i] = dt * (acc5 - acc4)
    return y5, err


def count_roots(gxs, jac, a, xi, double drift=1.0):
    cdef double[:, ::1] G = np.ascontiguousarray(gxs, dtype=np.float64)
    cdef double[:, :, ::1] J = np.ascontiguousarray(jac, dtype=np.float64)
    cdef double[:, ::1] A = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[:, ::1] X = np.ascontiguousarray(xi, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], m = G.shape[0], p, w
    counts = np.zeros(n, dtype=np.int64)
    cdef long long[::1] cv = counts
    cdef double e11, e12, e22, de, pi[2][3], gj[3][2], b11, b12, b22, det
    cdef double s11, s12, s22, k, prev, wv[3], sa, x1, x2, w1, w2, v
    cdef int i, l
    cdef const double* c
    with nogil:
        for p in range(n):
            e11 = J[p, 0, 0] * J[p, 0, 0] + J[p, 1, 0] * J[p, 1, 0] + J[p, 2, 0] * J[p, 2, 0]
            e12 = J[p, 0, 0] * J[p, 0, 1] + J[p, 1, 0] * J[p, 1, 1] + J[p, 2, 0] * J[p, 2, 1]
            e22 = J[p, 0, 1] * J[p, 0, 1] + J[p, 1, 1] * J[p, 1, 1] + J[p, 2, 1] * J[p, 2, 1]
            de = e11 * e22 - e12 * e12
            for i in range(3):
                pi[0][i] = (e22 * J[p, i, 0] - e12 * J[p, i, 1]) / de
                pi[1][i] = (e11 * J[p, i, 1] - e12 * J[p, i, 0]) / de
            x1 = X[p, 0]
            x2 = X[p, 1]
            prev = 0.0
            for w in range(m):
                c = &G[w, 0]
                for i in range(3):
                    for l in range(2):
                        gj[i][l] = c[3 * i] * J[p, 0, l] + c[3 * i + 1] * J[p, 1, l] + c[3 * i + 2] * J[p, 2, l]
                b11 = J[p, 0, 0] * gj[0][0] + J[p, 1, 0] * gj[1][0] + J[p, 2, 0] * gj[2][0]
                b12 = J[p, 0, 0] * gj[0][1] + J[p, 1, 0] * gj[1][1] + J[p, 2, 0] * gj[2][1]
                b22 = J[p, 0, 1] * gj[0][1] + J[p, 1, 1] * gj[1][1] + J[p, 2, 1] * gj[2][1]
                det = b11 * b22 - b12 * b12
                s11 = b22 / det
                s12 = -b12 / det
                s22 = b11 / det
                v = s11 * x1 * x1 + 2 * s12 * x1 * x2 + s22 * x2 * x2
                if v < 0:
                    v = 0
                k = sqrt(v)
                if drift != 0.0:
                    sa = 0.0
                    for i in range(3):
                        wv[i] = c[9 + 3 * i] * A[p, 0] + c[10 + 3 * i] * A[p, 1] + c[11 + 3 * i] * A[p, 2]
                        sa += A[p, i] * (c[18 + 3 * i] * A[p, 0] + c[19 + 3 * i] * A[p, 1] + c[20 + 3 * i] * A[p, 2])
                    w1 = (pi[0][0] * wv[0] + pi[0][1] * wv[1] + pi[0][2] * wv[2]) / sqrt(sa)
                    w2 = (pi[1][0] * wv[0] + pi[1][1] * wv[1] + pi[1][2] * wv[2]) / sqrt(sa)
                    k = k - x1 * w1 - x2 * w2
                if k != 0.0:
                    if prev * k < 0:
                        cv[p] += 1
                    prev = k
    return counts
