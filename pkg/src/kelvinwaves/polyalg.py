"""Sparse polynomials on R^3 and exact moment integrals over balls and ellipsoids.

A ``MultiPoly`` maps exponent triples ``(a1, a2, a3)`` to coefficients.  Zero
coefficients are never stored and iteration is lexicographic, so everything
built from these objects is reproducible bit for bit.
"""
from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np
from scipy.special import gammaln


def _clean(terms):
    return {k: terms[k] for k in sorted(terms) if terms[k] != 0}


class MultiPoly:
    __slots__ = ("_terms",)

    def __init__(self, terms=None):
        self._terms = _clean(dict(terms or {}))

    @classmethod
    def constant(cls, c):
        return cls({(0, 0, 0): c})

    @classmethod
    def monomial(cls, alpha, c=1.0):
        return cls({tuple(alpha): c})

    @classmethod
    def coordinate(cls, i):
        e = [0, 0, 0]
        e[i] = 1
        return cls({tuple(e): 1.0})

    @property
    def terms(self):
        return dict(self._terms)

    def items(self):
        return self._terms.items()

    def __len__(self):
        return len(self._terms)

    def __bool__(self):
        return bool(self._terms)

    def __iter__(self):
        return iter(self._terms)

    def coeff(self, alpha):
        return self._terms.get(tuple(alpha), 0)

    @property
    def degree(self):
        """Total degree; -1 for the zero polynomial."""
        return max((sum(a) for a in self._terms), default=-1)

    def __repr__(self):
        if not self._terms:
            return "MultiPoly(0)"
        parts = [f"{c!r}*x^{a}" for a, c in self._terms.items()]
        return "MultiPoly(" + " + ".join(parts) + ")"

    def __eq__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other)
        return self._terms == other._terms

    __hash__ = None

    def __add__(self, other):
        if not isinstance(other, MultiPoly):
            other = MultiPoly.constant(other)
        out = dict(self._terms)
        for a, c in other._terms.items():
            out[a] = out.get(a, 0) + c
        return MultiPoly(out)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({a: -c for a, c in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if not isinstance(other, MultiPoly):
            return MultiPoly({a: c * other for a, c in self._terms.items()})
        out = {}
        for a, c in self._terms.items():
            for b, d in other._terms.items():
                k = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
                out[k] = out.get(k, 0) + c * d
        return MultiPoly(out)

    def __rmul__(self, other):
        return self * other

    def __truediv__(self, scalar):
        return MultiPoly({a: c / scalar for a, c in self._terms.items()})

    def __pow__(self, k):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        out = MultiPoly.constant(1.0)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj(self):
        return MultiPoly({a: np.conj(c) for a, c in self._terms.items()})

    def real(self):
        return MultiPoly({a: float(np.real(c)) for a, c in self._terms.items()})

    def imag(self):
        return MultiPoly({a: float(np.imag(c)) for a, c in self._terms.items()})

    def max_abs_coeff(self):
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def diff(self, i):
        out = {}
        for a, c in self._terms.items():
            if a[i]:
                b = list(a)
                b[i] -= 1
                out[tuple(b)] = c * a[i]
        return MultiPoly(out)

    def homogeneous_part(self, d):
        return MultiPoly({a: c for a, c in self._terms.items() if sum(a) == d})

    def chop(self, tol):
        """Drop coefficients with modulus <= tol."""
        return MultiPoly({a: c for a, c in self._terms.items() if abs(c) > tol})

    def __call__(self, x):
        """Evaluate at a point ``x`` of shape (3,) or a stack of points (..., 3)."""
        x = np.asarray(x)
        if not self._terms:
            return np.zeros(x.shape[:-1])
        dmax = max(max(a) for a in self._terms)
        powers = [np.stack([x[..., i] ** k for k in range(dmax + 1)]) for i in range(3)]
        total = 0
        for a, c in self._terms.items():
            total = total + c * powers[0][a[0]] * powers[1][a[1]] * powers[2][a[2]]
        return total


class PolyVec:
    """Three MultiPoly components of a polynomial vector field."""

    __slots__ = ("comps",)

    def __init__(self, comps):
        comps = tuple(c if isinstance(c, MultiPoly) else MultiPoly.constant(c) for c in comps)
        if len(comps) != 3:
            raise ValueError("PolyVec needs three components")
        self.comps = comps

    @classmethod
    def zero(cls):
        return cls((MultiPoly(), MultiPoly(), MultiPoly()))

    @classmethod
    def basis(cls, l):
        c = [MultiPoly(), MultiPoly(), MultiPoly()]
        c[l] = MultiPoly.constant(1.0)
        return cls(c)

    def __getitem__(self, i):
        return self.comps[i]

    def __iter__(self):
        return iter(self.comps)

    def __repr__(self):
        return f"PolyVec{self.comps!r}"

    def __eq__(self, other):
        return isinstance(other, PolyVec) and all(a == b for a, b in zip(self.comps, other.comps))

    __hash__ = None

    @property
    def degrees(self):
        return tuple(c.degree for c in self.comps)

    @property
    def degree(self):
        return max(self.degrees)

    def __add__(self, other):
        return PolyVec(tuple(a + b for a, b in zip(self.comps, other.comps)))

    def __sub__(self, other):
        return PolyVec(tuple(a - b for a, b in zip(self.comps, other.comps)))

    def __neg__(self):
        return PolyVec(tuple(-a for a in self.comps))

    def __mul__(self, scalar):
        """Multiply by a number or a scalar MultiPoly."""
        return PolyVec(tuple(a * scalar for a in self.comps))

    __rmul__ = __mul__

    def dot(self, other):
        return self.comps[0] * other.comps[0] + self.comps[1] * other.comps[1] + self.comps[2] * other.comps[2]

    def conj(self):
        return PolyVec(tuple(a.conj() for a in self.comps))

    def apply_matrix(self, m):
        """Pointwise product M v with a constant 3x3 matrix."""
        m = np.asarray(m)
        return PolyVec(
            tuple(sum((self.comps[j] * m[i, j] for j in range(3) if m[i, j] != 0), MultiPoly()) for i in range(3))
        )

    def max_abs_coeff(self):
        return max(c.max_abs_coeff() for c in self.comps)

    def __call__(self, x):
        return np.stack([c(x) for c in self.comps], axis=-1)


def grad(p: MultiPoly) -> PolyVec:
    return PolyVec((p.diff(0), p.diff(1), p.diff(2)))


def div(v: PolyVec) -> MultiPoly:
    return v[0].diff(0) + v[1].diff(1) + v[2].diff(2)


def curl(v: PolyVec) -> PolyVec:
    return PolyVec(
        (
            v[2].diff(1) - v[1].diff(2),
            v[0].diff(2) - v[2].diff(0),
            v[1].diff(0) - v[0].diff(1),
        )
    )


def cross(v: PolyVec, w: PolyVec) -> PolyVec:
    return PolyVec(
        (
            v[1] * w[2] - v[2] * w[1],
            v[2] * w[0] - v[0] * w[2],
            v[0] * w[1] - v[1] * w[0],
        )
    )


def linear_pullback(p, lmap):
    """Composition ``x -> p(L x)`` for a constant 3x3 matrix L (MultiPoly or PolyVec)."""
    if isinstance(p, PolyVec):
        return PolyVec(tuple(linear_pullback(c, lmap) for c in p.comps))
    lmap = np.asarray(lmap, dtype=float)
    rows = [MultiPoly({tuple(int(i == j) for i in range(3)): lmap[r, j] for j in range(3)}) for r in range(3)]
    cache = {}

    def power(r, k):
        if (r, k) not in cache:
            cache[(r, k)] = rows[r] ** k
        return cache[(r, k)]

    out = MultiPoly()
    for a, c in p.items():
        out = out + power(0, a[0]) * power(1, a[1]) * power(2, a[2]) * c
    return out


def divide_exact(p: MultiPoly, q: MultiPoly):
    """Multivariate division ``p = quotient * q + remainder`` (graded lex leading terms).

    The remainder is zero (up to rounding) whenever q divides p.
    """
    def lead(poly):
        return max(poly, key=lambda a: (sum(a), a))

    qa = lead(q)
    qc = q.coeff(qa)
    quotient = {}
    rem = {}
    work = p
    scale = max(p.max_abs_coeff(), 1e-300)
    while work:
        a = lead(work)
        c = work.coeff(a)
        if abs(c) <= 1e-14 * scale:
            work = work - MultiPoly.monomial(a, c)
            rem[a] = rem.get(a, 0) + c
            continue
        if all(a[i] >= qa[i] for i in range(3)):
            b = tuple(a[i] - qa[i] for i in range(3))
            t = MultiPoly.monomial(b, c / qc)
            quotient[b] = quotient.get(b, 0) + c / qc
            work = work - t * q
        else:
            rem[a] = rem.get(a, 0) + c
            work = work - MultiPoly.monomial(a, c)
    return MultiPoly(quotient), MultiPoly(rem)


# ---------------------------------------------------------------------------
# moments

@lru_cache(maxsize=None)
def ball_moment(alpha) -> float:
    """Integral of x^alpha over the unit ball; uses log-Gamma so |alpha| ~ 60 is safe."""
    alpha = tuple(int(a) for a in alpha)
    if any(a < 0 for a in alpha):
        raise ValueError("exponents must be non-negative")
    if any(a % 2 for a in alpha):
        return 0.0
    p, q, r = (a // 2 for a in alpha)
    return math.exp(gammaln(p + 0.5) + gammaln(q + 0.5) + gammaln(r + 0.5) - gammaln(p + q + r + 2.5))


def ellipsoid_moment(alpha, ellipsoid) -> float:
    axes = _axes(ellipsoid)
    scale = 1.0
    for a, s in zip(alpha, axes):
        scale *= s ** (a + 1)
    return scale * ball_moment(tuple(alpha))


def _axes(ellipsoid):
    if ellipsoid is None:
        return (1.0, 1.0, 1.0)
    return tuple(getattr(ellipsoid, "semi_axes", ellipsoid))


def l2_inner(f, g, ellipsoid=None):
    """L^2 inner product over the ellipsoid, conjugate-linear in ``g``.

    Works term by term on exact moments; ``ellipsoid=None`` means the unit ball.
    """
    if isinstance(f, PolyVec):
        return sum(l2_inner(a, b, ellipsoid) for a, b in zip(f.comps, g.comps))
    axes = _axes(ellipsoid)
    total = 0
    for a, c in f.items():
        for b, d in g.items():
            k = (a[0] + b[0], a[1] + b[1], a[2] + b[2])
            if k[0] % 2 or k[1] % 2 or k[2] % 2:
                continue
            total += c * np.conj(d) * ellipsoid_moment(k, axes)
    return total


# ---------------------------------------------------------------------------
# dense helpers for matrix assembly

@lru_cache(maxsize=None)
def monomials(max_degree):
    """Exponents of total degree <= max_degree, graded then reverse-lex."""
    out = []
    for d in range(max_degree + 1):
        out.extend(sorted((a for a in itertools.product(range(d + 1), repeat=3) if sum(a) == d), reverse=True))
    return tuple(out)


def monomial_index(max_degree):
    return {a: i for i, a in enumerate(monomials(max_degree))}


def coeff_matrix(polys, max_degree):
    """Dense (n_monomials, n_polys) coefficient matrix of MultiPoly objects."""
    index = monomial_index(max_degree)
    dtype = complex if any(isinstance(c, complex) or np.iscomplexobj(c) for p in polys for _, c in p.items()) else float
    out = np.zeros((len(index), len(polys)), dtype=dtype)
    for j, p in enumerate(polys):
        for a, c in p.items():
            out[index[a], j] = c
    return out


def moment_matrix(max_degree, ellipsoid=None):
    """M[i, j] = integral over the ellipsoid of x^(alpha_i + alpha_j)."""
    axes = _axes(ellipsoid)
    mons = np.array(monomials(max_degree))
    total = mons[:, None, :] + mons[None, :, :]
    flat = total.reshape(-1, 3)
    even = ~np.any(flat % 2, axis=1)
    half = flat // 2
    vals = np.zeros(len(flat))
    h = half[even]
    vals[even] = np.exp(
        gammaln(h[:, 0] + 0.5) + gammaln(h[:, 1] + 0.5) + gammaln(h[:, 2] + 0.5) - gammaln(h.sum(axis=1) + 2.5)
    )
    logscale = (flat + 1) @ np.log(np.asarray(axes, dtype=float))
    vals = vals * np.exp(logscale)
    return vals.reshape(len(mons), len(mons))
