"""Polynomial Galerkin eigensolver for the Poincare operator iP0 A P0 on an ellipsoid.

The state is ``(u, rho1)``.  Velocities are spanned by the curl-type fields
``grad(x^alpha S) x e_l``, which are divergence-free and tangent to the
boundary, so the Leray projection never has to be assembled.  Everything is
exact polynomial algebra up to the final dense eigensolve.

Basis elements are kept in degree-graded order.  After the Cholesky reduction
the leading rows then span the degree <= n-1 space, so the trailing block of
the reduced operator carries exactly the eigenvectors new at degree n.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .errors import GramIllConditioned, NotAGradient, NotNested
from .geometry import Ellipsoid
from .model import PhysicalConfig, frequency_bounds
from .polyalg import MultiPoly, PolyVec, coeff_matrix, curl, grad, moment_matrix, monomials

GRAM_LIMIT = 1e12
DEPENDENCE_TOL = 1e-10
MATCH_TOL = 1e-7
RESIDUAL_TOL = 1e-8
ZERO_TOL = 1e-8


@dataclass
class VelocityBasis:
    """Divergence-free polynomial fields tangent to the boundary, degree <= n."""

    ellipsoid: Ellipsoid
    n: int
    fields: list
    recipes: list  # (alpha, l) per element
    degrees: np.ndarray
    coeffs: np.ndarray  # (3, n_monomials(n), n_fields)

    def __len__(self):
        return len(self.fields)


@dataclass
class StateBasis:
    velocity: VelocityBasis | None
    n: int
    scalars: tuple  # monomial exponents for rho1, degree <= n
    order: np.ndarray = field(repr=False)  # graded permutation of [velocity..., scalars...]
    degrees: np.ndarray = field(repr=False)  # degree of each element in graded order

    @property
    def n_velocity(self):
        return 0 if self.velocity is None else len(self.velocity)

    @property
    def dimension(self):
        return self.n_velocity + len(self.scalars)

    def count_below(self, d):
        """Number of graded basis elements of degree <= d."""
        return int(np.sum(self.degrees <= d))


@dataclass
class SpectralResult:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, coefficients in the graded state basis
    n: int
    condition: float
    residuals: np.ndarray
    basis: StateBasis | None = None


def velocity_dimension(n):
    """Dimension of the degree <= n space (matches the rank found numerically)."""
    return n * (n + 1) * (2 * n + 7) // 6


def _cross_el(g: PolyVec, l: int) -> PolyVec:
    z = MultiPoly()
    if l == 0:
        return PolyVec((z, g[2], -g[1]))
    if l == 1:
        return PolyVec((-g[2], z, g[0]))
    return PolyVec((g[1], -g[0], z))


def build_velocity_basis(ellipsoid: Ellipsoid, n: int) -> VelocityBasis:
    """Candidates grad(x^alpha S) x e_l, |alpha| <= n-1, with dependent ones removed.

    Dependence is tested in degree-graded order on the exact coefficient
    vectors (two-pass Gram-Schmidt, relative residual < 1e-10).
    """
    if n < 1:
        raise ValueError("velocity basis needs n >= 1")
    ellipsoid = ellipsoid if isinstance(ellipsoid, Ellipsoid) else Ellipsoid(tuple(ellipsoid))
    s = ellipsoid.defining_poly()
    fields, recipes, degs, cols = [], [], [], []
    q = np.zeros((3 * len(monomials(n)), 0))
    for alpha in monomials(n - 1):
        g = grad(MultiPoly.monomial(alpha) * s)
        for l in range(3):
            v = _cross_el(g, l)
            c = coeff_matrix(list(v.comps), n).T.ravel()
            nrm = np.linalg.norm(c)
            r = c - q @ (q.T @ c)
            r = r - q @ (q.T @ r)
            rn = np.linalg.norm(r)
            if rn <= DEPENDENCE_TOL * nrm:
                continue
            q = np.column_stack([q, r / rn])
            fields.append(v)
            recipes.append((alpha, l))
            degs.append(sum(alpha) + 1)
            cols.append(c)
    coeffs = np.array(cols).T.reshape(3, len(monomials(n)), len(cols))
    return VelocityBasis(ellipsoid, n, fields, recipes, np.array(degs), coeffs)


def build_state_basis(ellipsoid: Ellipsoid, n: int) -> StateBasis:
    vel = build_velocity_basis(ellipsoid, n) if n >= 1 else None
    scal = monomials(n)
    sdeg = np.array([sum(a) for a in scal])
    vdeg = vel.degrees if vel is not None else np.zeros(0, dtype=int)
    degs = np.concatenate([vdeg, sdeg])
    kind = np.concatenate([np.zeros(len(vdeg)), np.ones(len(sdeg))])
    order = np.lexsort((np.arange(len(degs)), kind, degs))
    return StateBasis(vel, n, scal, order, degs[order])


def assemble(cfg: PhysicalConfig, ellipsoid: Ellipsoid, basis: StateBasis):
    """Real antisymmetric H' and SPD Gram G in the graded basis (H = i H')."""
    n = basis.n
    mom = moment_matrix(n, ellipsoid)
    nm = len(monomials(n))
    nv = basis.n_velocity
    u = basis.velocity.coeffs if nv else np.zeros((3, nm, 0))
    o = 2.0 * np.array(cfg.rotation)
    cu = np.stack([o[1] * u[2] - o[2] * u[1], o[2] * u[0] - o[0] * u[2], o[0] * u[1] - o[1] * u[0]])
    mu = np.einsum("ab,cbj->caj", mom, u)
    gvv = np.einsum("cai,caj->ij", u, mu)
    hvv = np.einsum("cai,caj->ij", mu, cu)
    nb = cfg.buoyancy
    hvs = nb * mu[2].T  # <N rho_j e3, u_i>
    dim = nv + nm
    g = np.zeros((dim, dim))
    h = np.zeros((dim, dim))
    g[:nv, :nv] = gvv
    g[nv:, nv:] = mom
    h[:nv, :nv] = hvv
    h[:nv, nv:] = hvs
    h[nv:, :nv] = -hvs.T
    p = basis.order
    g = g[np.ix_(p, p)]
    h = h[np.ix_(p, p)]
    return 0.5 * (h - h.T), 0.5 * (g + g.T)


def _reduce(hp, g):
    d = 1.0 / np.sqrt(np.diag(g))
    gs = g * d[:, None] * d[None, :]
    ev = np.linalg.eigvalsh(gs)
    cond = float(ev[-1] / ev[0]) if ev[0] > 0 else np.inf
    if not cond <= GRAM_LIMIT:
        raise GramIllConditioned(cond, GRAM_LIMIT)
    chol = np.linalg.cholesky(gs)
    hs = hp * d[:, None] * d[None, :]
    k = sla.solve_triangular(chol, sla.solve_triangular(chol, hs.T, lower=True).T, lower=True)
    return 0.5 * (k - k.T), chol, d, cond


def _back(chol, d, y):
    return d[:, None] * sla.solve_triangular(chol.T, y, lower=False)


def _residuals(hp, g, w, x):
    hx = 1j * (hp @ x)
    gx = g @ x
    return np.linalg.norm(hx - gx * w[None, :], axis=0) / np.linalg.norm(gx, axis=0)


def solve_spectrum(hp, g, n=None, basis=None) -> SpectralResult:
    """Eigenpairs of H x = omega G x with H = i hp, via Cholesky reduction of G."""
    k, chol, d, cond = _reduce(hp, g)
    w, y = np.linalg.eigh(1j * k)
    x = _back(chol, d, y)
    res = _residuals(hp, g, w, x)
    if res.size and res.max() > RESIDUAL_TOL:
        raise ArithmeticError(f"eigen-residual {res.max():.2e} exceeds {RESIDUAL_TOL}")
    return SpectralResult(w, x, n, cond, res, basis)


def spectrum(cfg, ellipsoid, n) -> SpectralResult:
    basis = build_state_basis(ellipsoid, n)
    hp, g = assemble(cfg, ellipsoid, basis)
    return solve_spectrum(hp, g, n, basis)


def degree_block(cfg, ellipsoid, n) -> SpectralResult:
    """Eigenpairs orthogonal to the degree <= n-1 space (the ones new at degree n)."""
    basis = build_state_basis(ellipsoid, n)
    hp, g = assemble(cfg, ellipsoid, basis)
    k, chol, d, cond = _reduce(hp, g)
    m = basis.count_below(n - 1)
    leak = np.abs(k[m:, :m]).max() if m and m < len(k) else 0.0
    if leak > 1e-8 * max(np.abs(k).max(), 1.0):
        raise NotNested(f"degree <= {n - 1} space is not invariant (coupling {leak:.2e})")
    w, yb = np.linalg.eigh(1j * k[m:, m:])
    y = np.zeros((len(k), len(w)), dtype=complex)
    y[m:] = yb
    x = _back(chol, d, y)
    res = _residuals(hp, g, w, x)
    return SpectralResult(w, x, n, cond, res, basis)


def multiset_difference(new, old, tol=MATCH_TOL):
    """Remove each value of ``old`` from ``new`` (nearest match within ``tol``)."""
    new = np.sort(np.asarray(new, dtype=float))
    used = np.zeros(len(new), dtype=bool)
    for v in np.sort(old):
        cand = np.where(~used & (np.abs(new - v) <= tol))[0]
        if not len(cand):
            raise NotNested(f"eigenvalue {v!r} from the lower degree has no match within {tol}")
        used[cand[np.argmin(np.abs(new[cand] - v))]] = True
    return new[~used]


def new_eigenvalues_at_degree(cfg, ellipsoid, n, previous=None):
    """Spectrum at degree <= n minus spectrum at degree <= n-1, as a multiset."""
    hi = spectrum(cfg, ellipsoid, n).eigenvalues
    lo = previous if previous is not None else spectrum(cfg, ellipsoid, n - 1).eigenvalues
    return multiset_difference(hi, lo)


def low_band_mask(cfg, eigenvalues, interval=None):
    """Eigenvalues strictly inside (0, omega_-), optionally also inside ``interval``.

    Values within ZERO_TOL of 0 or of the band edge omega_- count as zero or
    band-edge modes and are excluded.
    """
    lo = frequency_bounds(cfg).omega_minus
    w = np.asarray(eigenvalues)
    keep = (w > ZERO_TOL) & (w < lo - ZERO_TOL * max(lo, 1.0))
    if interval is not None:
        keep &= (w > interval[0]) & (w < interval[1])
    return keep


def count_low_band(cfg, eigenvalues):
    """Number of eigenvalues in the open interval (0, omega_-)."""
    return int(np.sum(low_band_mask(cfg, eigenvalues)))


def low_band_counts(cfg, ellipsoid, n_max):
    """Per-degree counts of new eigenvalues in (0, omega_-), degrees 1..n_max."""
    rows = []
    prev = spectrum(cfg, ellipsoid, 0).eigenvalues
    for n in range(1, n_max + 1):
        cur = spectrum(cfg, ellipsoid, n).eigenvalues
        rows.append((n, count_low_band(cfg, multiset_difference(cur, prev))))
        prev = cur
    return rows


# ---------------------------------------------------------------------------
# eigenvectors as polynomials and pressures

def state_fields(basis: StateBasis, x):
    """(u, rho1) polynomials for a coefficient vector in the graded basis."""
    x = np.asarray(x)
    raw = np.zeros(basis.dimension, dtype=x.dtype)
    raw[basis.order] = x
    nv = basis.n_velocity
    mons = monomials(basis.n)
    if nv:
        uc = np.einsum("cai,i->ca", basis.velocity.coeffs, raw[:nv])
        u = PolyVec(tuple(MultiPoly(dict(zip(mons, uc[c]))) for c in range(3)))
    else:
        u = PolyVec.zero()
    rho = MultiPoly(dict(zip(basis.scalars, raw[nv:])))
    return u, rho


def pressure_from_eigenpair(cfg: PhysicalConfig, u: PolyVec, rho: MultiPoly, omega: float) -> MultiPoly:
    """Pressure phi with grad phi = -(i omega u + 2 Omega x u + N rho e3), phi(0) = 0.

    Raises NotAGradient if the field has a curl (a spurious eigenpair).
    """
    o = [MultiPoly.constant(2.0 * c) for c in cfg.rotation]
    ou = PolyVec(
        (o[1] * u[2] - o[2] * u[1], o[2] * u[0] - o[0] * u[2], o[0] * u[1] - o[1] * u[0])
    )
    fz = PolyVec((MultiPoly(), MultiPoly(), rho * cfg.buoyancy))
    f = -(u * (1j * omega) + ou + fz)
    scale = max(f.max_abs_coeff(), 1e-300)
    if curl(f).max_abs_coeff() > 1e-8 * scale:
        raise NotAGradient(f"field is not curl-free (|curl| = {curl(f).max_abs_coeff():.2e})")
    terms = {}
    for i in range(3):
        for a, c in f[i].items():
            b = list(a)
            b[i] += 1
            b = tuple(b)
            terms[b] = terms.get(b, 0) + c / (sum(a) + 1)
    return MultiPoly(terms)
