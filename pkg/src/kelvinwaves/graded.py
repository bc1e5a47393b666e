"""Degree-by-degree Galerkin blocks in an orthonormal ball basis (for high degrees).

Monomial bases lose conditioning quickly (the scaled Gram condition passes
1e12 around degree 16), so high-degree counts use the orthogonal
decomposition of polynomials on the unit ball.  A velocity ``u`` on
``E = L(B)`` is represented through ``u(L y) = L v(y)``, which preserves both
divergence and tangency.  The degree-n block then lives in the space of
polynomials of degree n orthogonal to lower degrees, spanned by

    P_k^(0, l+1/2)(2 r^2 - 1) r^l Y_lm(y / r),      n = 2k + l,

and every inner product is evaluated by a Gauss rule exact at degree 2n.
"""
from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np
from scipy.special import eval_jacobi, roots_jacobi, roots_legendre

from .errors import NotNested
from .galerkin import _reduce
from .harmonics import real_sph_harm

RANK_TOL = 1e-10


def _homogeneous(d):
    return [a for a in itertools.product(range(d + 1), repeat=3) if sum(a) == d][::-1]


@lru_cache(maxsize=32)
def ball_quadrature(degree):
    """Nodes and weights on the unit ball exact for polynomials of ``degree``."""
    nr = degree // 2 + 1
    t, wt = roots_jacobi(nr, 0, 2)
    r, wr = (1 + t) / 2, wt / 8
    c, wc = roots_legendre(degree // 2 + 1)
    nph = degree + 1
    ph = 2 * np.pi * np.arange(nph) / nph
    rr, cc, pp = np.meshgrid(r, c, ph, indexing="ij")
    w = wr[:, None, None] * wc[None, :, None] * np.full(nph, 2 * np.pi / nph)[None, None, :]
    s = np.sqrt(1 - cc ** 2)
    pts = np.stack([rr * s * np.cos(pp), rr * s * np.sin(pp), rr * cc], -1).reshape(-1, 3)
    return pts, w.ravel(), rr.ravel(), np.arccos(cc).ravel(), pp.ravel()


@lru_cache(maxsize=32)
def _orthonormal_block(n):
    """Values at the nodes of an orthonormal basis of degree-n polynomials orthogonal to lower degrees."""
    pts, w, r, th, ph = ball_quadrature(2 * n)
    out = []
    for l in range(n % 2, n + 1, 2):
        k = (n - l) // 2
        radial = eval_jacobi(k, 0, l + 0.5, 2 * r ** 2 - 1) * r ** l
        for m in range(-l, l + 1):
            f = radial * real_sph_harm(l, m, th, ph)
            out.append(f / np.sqrt(np.sum(w * f * f)))
    return np.array(out)


@lru_cache(maxsize=32)
def _velocity_block(n):
    """Orthonormal (plain L2 of the ball) coordinates of the degree-n velocity block."""
    pts, w, *_ = ball_quadrature(2 * n)
    psi = _orthonormal_block(n)
    mons = _homogeneous(n)
    idx = {b: i for i, b in enumerate(mons)}
    proj = np.array([np.prod(pts ** np.array(b), axis=1) for b in mons]) @ (w[:, None] * psi.T)
    cands = []
    for a in _homogeneous(n - 1):
        g = np.zeros((3, len(mons)))
        for i in range(3):
            for j in range(3):
                b = list(a)
                b[j] += 2
                if b[i] > 0:
                    c = b[i]
                    b[i] -= 1
                    g[i, idx[tuple(b)]] += c
        for l in range(3):
            e = np.zeros(3)
            e[l] = 1
            v = np.array([g[1] * e[2] - g[2] * e[1], g[2] * e[0] - g[0] * e[2], g[0] * e[1] - g[1] * e[0]])
            cands.append((v @ proj).ravel())
    mat = np.array(cands).T
    u, s, _ = np.linalg.svd(mat, full_matrices=False)
    rank = int(np.sum(s > RANK_TOL * s[0]))
    if rank != n * (n + 2):
        raise NotNested(f"degree-{n} velocity block has rank {rank}, expected {n * (n + 2)}")
    return u[:, :rank]


def degree_block_matrices(cfg, ellipsoid, n):
    """(H', G) of the block new at degree n; H = i H'."""
    dv = _orthonormal_block(n).shape[0]
    axes = np.asarray(getattr(ellipsoid, "semi_axes", ellipsoid), dtype=float)
    eye = np.eye(dv)
    if n >= 1:
        vb = _velocity_block(n)
        bv = np.kron(np.diag(axes), eye) @ vb
    else:
        bv = np.zeros((3 * dv, 0))
    nv = bv.shape[1]
    om = 2.0 * np.asarray(cfg.rotation, dtype=float)
    ox = np.array([[0, -om[2], om[1]], [om[2], 0, -om[0]], [-om[1], om[0], 0]])
    e3 = np.kron(np.array([[0.0, 0.0, 1.0]]), eye)
    dim = nv + dv
    g = np.zeros((dim, dim))
    g[:nv, :nv] = bv.T @ bv
    g[nv:, nv:] = eye
    hp = np.zeros((dim, dim))
    hp[:nv, :nv] = bv.T @ np.kron(ox, eye) @ bv
    hp[:nv, nv:] = cfg.buoyancy * bv.T @ e3.T
    hp[nv:, :nv] = -cfg.buoyancy * e3 @ bv
    return 0.5 * (hp - hp.T), 0.5 * (g + g.T)


def new_eigenvalues(cfg, ellipsoid, n):
    """Eigenvalues new at degree n, sorted."""
    hp, g = degree_block_matrices(cfg, ellipsoid, n)
    k, *_ = _reduce(hp, g)
    return np.linalg.eigvalsh(1j * k)
