"""Quadrature, mass/load assembly, L2 projection and the fitting pipeline.

Mass matrices are assembled per patch over the tensor B-spline basis with
cell-wise Gauss quadrature, then sandwiched with the sparse coefficient
matrices of the smooth basis.  The convergence study performs dyadic
h-refinement with the geometry refined exactly by knot insertion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .bspline import KnotVector, SplineSpace1D, make_knot_vector, uniform_inner_knots
from .geometry import (Patch, TwoPatchGeometry, bilinear_from_vertices,
                       refine_geometry)
from .gluing import GluingData, gluing_invariants
from .smooth import SmoothBasis, build_basis_v2, build_basis_w2, dim_v1

DENSE_EIG_CUTOFF = 6000


@dataclass(frozen=True)
class QuadratureRule:
    """Per-cell Gauss nodes and weights on [0, 1]."""

    nodes: np.ndarray      # (ncells, q)
    weights: np.ndarray    # (ncells, q)

    @property
    def points_per_cell(self) -> int:
        return self.nodes.shape[1]

    def flat(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.ravel(), self.weights.ravel()


def gauss_rule(points_per_cell: int, cells: Sequence[tuple[float, float]]) -> QuadratureRule:
    """Gauss-Legendre rule mapped to each cell (a, b)."""
    if points_per_cell < 1:
        raise ValueError("points_per_cell must be >= 1")
    x, w = np.polynomial.legendre.leggauss(points_per_cell)
    cells = np.asarray(cells, dtype=float)
    mid = 0.5 * (cells[:, 0] + cells[:, 1])
    half = 0.5 * (cells[:, 1] - cells[:, 0])
    return QuadratureRule(mid[:, None] + half[:, None] * x[None, :],
                          half[:, None] * w[None, :])


def default_points_per_cell(space: SplineSpace1D) -> int:
    """Enough Gauss points for exact mass entries and resolved load fields.

    Mass integrands of degree-p patches have per-cell degree 4p - 1 per
    direction (basis product times the Jacobian factor), exact with 2p
    points.  On coarse meshes the count is raised further so that every
    patch direction carries at least ~30 points for non-polynomial fields.
    """
    ncells = max(len(space.spans()), 1)
    return max(2 * space.degree, -(-30 // ncells))


def space_rule(space: SplineSpace1D, points_per_cell: int | None = None) -> QuadratureRule:
    ppc = points_per_cell or default_points_per_cell(space)
    return gauss_rule(ppc, [(a, b) for _, a, b in space.spans()])


@dataclass(frozen=True)
class _BasisOnCells:
    """B-spline values/derivatives at quadrature nodes, organized per cell."""

    first: np.ndarray        # (ncells,) first active index per cell
    values: np.ndarray       # (ncells, q, nd+1, p+1)


def _basis_on_cells(space: SplineSpace1D, rule: QuadratureRule,
                    max_deriv: int = 1) -> _BasisOnCells:
    ncells, q = rule.nodes.shape
    first = np.empty(ncells, dtype=int)
    values = np.empty((ncells, q, max_deriv + 1, space.degree + 1))
    for c in range(ncells):
        for i in range(q):
            f, d = space.eval_basis(rule.nodes[c, i], max_deriv)
            values[c, i] = d
        first[c] = f
    return _BasisOnCells(first, values)


class PatchAssembler:
    """Cell-wise quadrature data of one patch: weights, physical points."""

    def __init__(self, patch: Patch, points_per_cell: int | None = None):
        self.patch = patch
        su = patch.space.space_u
        sv = patch.space.space_v
        self.rule_u = space_rule(su, points_per_cell)
        self.rule_v = space_rule(sv, points_per_cell)
        self.bu = _basis_on_cells(su, self.rule_u, 1)
        self.bv = _basis_on_cells(sv, self.rule_v, 1)
        self.n_u = su.dim
        self.n_v = sv.dim
        self.p_u = su.degree
        self.p_v = sv.degree
        self._geometry_data()

    def _geometry_data(self):
        """|det J| and physical coordinates at every quadrature point."""
        ncu, q = self.rule_u.nodes.shape
        ncv, r = self.rule_v.nodes.shape
        cp = self.patch.control_points
        self.absdet = np.empty((ncu, ncv, q, r))
        self.phys = np.empty((ncu, ncv, q, r, 2))
        pu, pv = self.p_u, self.p_v
        for cu in range(ncu):
            fu = self.bu.first[cu]
            Bu = self.bu.values[cu, :, 0, :]      # (q, pu+1)
            Du = self.bu.values[cu, :, 1, :]
            for cv in range(ncv):
                fv = self.bv.first[cv]
                Bv = self.bv.values[cv, :, 0, :]
                Dv = self.bv.values[cv, :, 1, :]
                loc = cp[fu:fu + pu + 1, fv:fv + pv + 1, :]
                F = np.einsum("qa,abc,rb->qrc", Bu, loc, Bv)
                Fu = np.einsum("qa,abc,rb->qrc", Du, loc, Bv)
                Fv = np.einsum("qa,abc,rb->qrc", Bu, loc, Dv)
                det = Fu[..., 0] * Fv[..., 1] - Fu[..., 1] * Fv[..., 0]
                self.absdet[cu, cv] = np.abs(det)
                self.phys[cu, cv] = F

    def mass(self) -> sp.csr_matrix:
        """Weighted Gram matrix of the tensor B-splines, (n_u*n_v)^2 sparse."""
        ncu, q = self.rule_u.nodes.shape
        ncv, r = self.rule_v.nodes.shape
        pu, pv = self.p_u, self.p_v
        wu = self.rule_u.weights
        wv = self.rule_v.weights
        nloc = (pu + 1) * (pv + 1)
        data = np.empty(ncu * ncv * nloc * nloc)
        rows = np.empty_like(data, dtype=np.int64)
        cols = np.empty_like(data, dtype=np.int64)
        pos = 0
        for cu in range(ncu):
            fu = self.bu.first[cu]
            Bu = self.bu.values[cu, :, 0, :]
            for cv in range(ncv):
                fv = self.bv.first[cv]
                Bv = self.bv.values[cv, :, 0, :]
                W = (wu[cu][:, None] * wv[cv][None, :]) * self.absdet[cu, cv]
                Tu = np.einsum("qa,qb->qab", Bu, Bu)
                Tv = np.einsum("rc,rd->rcd", Bv, Bv)
                local = np.einsum("qab,qr,rcd->acbd", Tu, W, Tv)
                gi = (np.arange(fu, fu + pu + 1)[:, None] * self.n_v
                      + np.arange(fv, fv + pv + 1)[None, :]).ravel()
                rows[pos:pos + nloc * nloc] = np.repeat(gi, nloc)
                cols[pos:pos + nloc * nloc] = np.tile(gi, nloc)
                data[pos:pos + nloc * nloc] = local.reshape(nloc, nloc).ravel()
                pos += nloc * nloc
        n2 = self.n_u * self.n_v
        return sp.coo_matrix((data, (rows, cols)), shape=(n2, n2)).tocsr()

    def sample_physical(self, f) -> np.ndarray:
        """f(x1, x2) sampled at every quadrature point: (ncu, ncv, q, r)."""
        return f(self.phys[..., 0], self.phys[..., 1])

    def sample_parametric(self, fn) -> np.ndarray:
        """fn(u, v) sampled at every parametric quadrature point."""
        ncu, q = self.rule_u.nodes.shape
        ncv, r = self.rule_v.nodes.shape
        out = np.empty((ncu, ncv, q, r))
        for cu in range(ncu):
            for cv in range(ncv):
                for a in range(q):
                    for b in range(r):
                        out[cu, cv, a, b] = fn(self.rule_u.nodes[cu, a],
                                               self.rule_v.nodes[cv, b])
        return out

    def load(self, f=None, values: np.ndarray | None = None) -> np.ndarray:
        """Integrals of the field against every tensor B-spline.

        The field is either a physical-space callable ``f(x1, x2)`` or a
        precomputed per-quadrature-point value array ``values``.
        """
        if values is None:
            values = self.sample_physical(f)
        ncu, q = self.rule_u.nodes.shape
        ncv, r = self.rule_v.nodes.shape
        pu, pv = self.p_u, self.p_v
        wu = self.rule_u.weights
        wv = self.rule_v.weights
        out = np.zeros(self.n_u * self.n_v)
        for cu in range(ncu):
            fu = self.bu.first[cu]
            Bu = self.bu.values[cu, :, 0, :]
            for cv in range(ncv):
                fv = self.bv.first[cv]
                Bv = self.bv.values[cv, :, 0, :]
                W = (wu[cu][:, None] * wv[cv][None, :]) * self.absdet[cu, cv] \
                    * values[cu, cv]
                local = np.einsum("qa,qr,rc->ac", Bu, W, Bv)
                gi = (np.arange(fu, fu + pu + 1)[:, None] * self.n_v
                      + np.arange(fv, fv + pv + 1)[None, :])
                out[gi.ravel()] += local.ravel()
        return out

    def integrate_sq_diff(self, coeffs_flat: np.ndarray,
                          f: Callable[[np.ndarray, np.ndarray], np.ndarray] | None,
                          ) -> tuple[float, float]:
        """(||g - f||^2, ||f||^2) over the patch; f = 0 when f is None."""
        ncu, q = self.rule_u.nodes.shape
        ncv, r = self.rule_v.nodes.shape
        pu, pv = self.p_u, self.p_v
        wu = self.rule_u.weights
        wv = self.rule_v.weights
        grid = coeffs_flat.reshape(self.n_u, self.n_v)
        err = 0.0
        ref = 0.0
        for cu in range(ncu):
            fu = self.bu.first[cu]
            Bu = self.bu.values[cu, :, 0, :]
            for cv in range(ncv):
                fv = self.bv.first[cv]
                Bv = self.bv.values[cv, :, 0, :]
                loc = grid[fu:fu + pu + 1, fv:fv + pv + 1]
                g = np.einsum("qa,ab,rb->qr", Bu, loc, Bv)
                W = (wu[cu][:, None] * wv[cv][None, :]) * self.absdet[cu, cv]
                if f is None:
                    fvals = 0.0
                else:
                    xy = self.phys[cu, cv]
                    fvals = f(xy[..., 0], xy[..., 1])
                    ref += float((W * fvals ** 2).sum())
                err += float((W * (g - fvals) ** 2).sum())
        return err, ref


# ---------------------------------------------------------------------------
# full-space coefficient matrices


def full_space_matrices(basis: SmoothBasis) -> tuple[sp.csr_matrix, sp.csr_matrix]:
    """Sparse per-patch coefficient matrices C_S of the full smooth space.

    Row order: the interface basis first (in family order), then the
    interface-untouched tensor B-splines of patch L, then of patch R.
    Columns are flattened (i, j) -> i*n + j grids.
    """
    n = basis.n
    n2 = n * n
    dim2 = basis.num_basis
    n_int = (n - 3) * n
    dim = dim2 + 2 * n_int

    mats = {}
    for side, A in (("L", basis.A_L), ("R", basis.A_R)):
        rows_idx = []
        cols_idx = []
        vals = []
        r_idx, c_idx = np.nonzero(A)
        rows_idx.append(r_idx)
        # A columns are (i, j) -> i*n + j with i < 3: same flat layout
        cols_idx.append(c_idx)
        vals.append(A[r_idx, c_idx])
        if side == "L":
            offset = dim2
        else:
            offset = dim2 + n_int
        int_rows = offset + np.arange(n_int)
        int_cols = np.array([i * n + j for i in range(3, n) for j in range(n)])
        rows_idx.append(int_rows)
        cols_idx.append(int_cols)
        vals.append(np.ones(n_int))
        mats[side] = sp.coo_matrix(
            (np.concatenate(vals),
             (np.concatenate(rows_idx), np.concatenate(cols_idx))),
            shape=(dim, n2)).tocsr()
    return mats["L"], mats["R"]


# ---------------------------------------------------------------------------
# assembly over the whole two-patch domain


class DomainAssembler:
    """Mass/load assembly for a smooth basis over a two-patch geometry."""

    def __init__(self, F: TwoPatchGeometry, basis: SmoothBasis,
                 points_per_cell: int | None = None):
        self.F = F
        self.basis = basis
        self.asm = {side: PatchAssembler(F.patch(side), points_per_cell)
                    for side in F.sides}
        self.C = dict(zip(("L", "R"), full_space_matrices(basis)))
        self.dim = self.C["L"].shape[0]

    def mass(self) -> sp.csr_matrix:
        M = sum(self.C[s] @ self.asm[s].mass() @ self.C[s].T for s in ("L", "R"))
        return ((M + M.T) * 0.5).tocsr()

    def load(self, f) -> np.ndarray:
        return sum(self.C[s] @ self.asm[s].load(f) for s in ("L", "R"))

    def patch_coefficients(self, b: np.ndarray, side: str) -> np.ndarray:
        return self.C[side].T @ b

    def relative_l2_error(self, b: np.ndarray, f) -> float:
        err = 0.0
        ref = 0.0
        for s in ("L", "R"):
            e, r = self.asm[s].integrate_sq_diff(self.patch_coefficients(b, s), f)
            err += e
            ref += r
        return float(np.sqrt(err / ref))


def assemble_mass(F: TwoPatchGeometry, basis: SmoothBasis,
                  points_per_cell: int | None = None) -> sp.csr_matrix:
    """Mass matrix of the full smooth space over the two-patch domain."""
    return DomainAssembler(F, basis, points_per_cell).mass()


def assemble_load(F: TwoPatchGeometry, basis: SmoothBasis, f,
                  points_per_cell: int | None = None) -> np.ndarray:
    return DomainAssembler(F, basis, points_per_cell).load(f)


def solve_spd(M, rhs: np.ndarray) -> np.ndarray:
    if M.shape[0] <= 1200:
        return np.linalg.solve(M.toarray() if sp.issparse(M) else M, rhs)
    return spla.spsolve(M.tocsc(), rhs)


def l2_project(F: TwoPatchGeometry, basis: SmoothBasis, f,
               points_per_cell: int | None = None) -> tuple[np.ndarray, float]:
    """Least-squares coefficients of f in the smooth space + relative L2 error."""
    asm = DomainAssembler(F, basis, points_per_cell)
    M = asm.mass()
    rhs = asm.load(f)
    b = solve_spd(M, rhs)
    return b, asm.relative_l2_error(b, f)


def scaled_condition_number(M, tol: float = 1e-6) -> float:
    """Condition number of the diagonally scaled SPD matrix.

    Dense symmetric eigensolve below DENSE_EIG_CUTOFF, extreme-eigenvalue
    iterations (relative tolerance ``tol``) above.
    """
    if not sp.issparse(M):
        M = sp.csr_matrix(M)
    d = M.diagonal()
    if (d <= 0.0).any():
        raise ValueError("matrix has a nonpositive diagonal entry")
    s = 1.0 / np.sqrt(d)
    A = sp.diags(s) @ M @ sp.diags(s)
    A = ((A + A.T) * 0.5).tocsc()
    if A.shape[0] <= DENSE_EIG_CUTOFF:
        ev = np.linalg.eigvalsh(A.toarray())
        return float(ev[-1] / ev[0])
    lmax = spla.eigsh(A, k=1, which="LA", tol=tol,
                      return_eigenvectors=False)[0]
    lmin = spla.eigsh(A, k=1, sigma=0.0, which="LM", tol=tol,
                      return_eigenvectors=False)[0]
    return float(lmax / lmin)


# ---------------------------------------------------------------------------
# convergence study


@dataclass(frozen=True)
class ApproxReport:
    level: int
    dim_interior: int
    dim_interface: int
    rel_l2_error: float
    rate: float | None
    cond: float
    cond_rate: float | None


def convergence_study(F0: TwoPatchGeometry, gluing: GluingData, space: str,
                      levels: int, f, points_per_cell: int | None = None,
                      with_cond: bool = True,
                      on_report=None) -> list[ApproxReport]:
    """Dyadic h-refinement study: levels L = 0..levels, k = 2^L - 1.

    The level-0 geometry is refined exactly by knot insertion; the gluing
    data is level-independent.  ``on_report`` is called with each finished
    per-level report, which allows callers to flush partial results.
    """
    if space not in ("v2", "w2"):
        raise ValueError("space must be 'v2' or 'w2'")
    p = F0.patch_L.degree
    base_r = 2
    reports: list[ApproxReport] = []
    prev_err = None
    prev_cond = None
    for L in range(levels + 1):
        k = 2 ** L - 1
        kv = make_knot_vector(p, base_r, k, uniform_inner_knots(k))
        geo = refine_geometry(F0, kv) if k else F0
        inv = gluing_invariants(gluing, kv)
        if space == "v2":
            basis = build_basis_v2(gluing, inv, p, base_r, k)
        else:
            basis = build_basis_w2(gluing, inv, p, base_r, k)
        asm = DomainAssembler(geo, basis, points_per_cell)
        M = asm.mass()
        b = solve_spd(M, asm.load(f))
        err = asm.relative_l2_error(b, f)
        cond = scaled_condition_number(M) if with_cond else float("nan")
        rate = None if prev_err is None else float(np.log2(prev_err / err))
        cond_rate = None if prev_cond is None else float(np.log2(prev_cond / cond))
        report = ApproxReport(L, dim_v1(p, base_r, k), basis.num_basis,
                              err, rate, cond, cond_rate)
        reports.append(report)
        if on_report is not None:
            on_report(report)
        prev_err, prev_cond = err, cond
    return reports


def reports_to_csv(reports: list[ApproxReport]) -> str:
    lines = ["L,dim_V1,dim_V2_or_W2,rel_L2_err,ecr,cond,cond_rate"]
    for r in reports:
        rate = "" if r.rate is None else repr(r.rate)
        crate = "" if r.cond_rate is None else repr(r.cond_rate)
        lines.append(f"{r.level},{r.dim_interior},{r.dim_interface},"
                     f"{r.rel_l2_error!r},{rate},{r.cond!r},{crate}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# fitting pipeline


@dataclass(frozen=True)
class FitResult:
    geometry: TwoPatchGeometry
    epsilon: float
    coefficients: np.ndarray    # (2, dim) solution vectors per coordinate


def discrete_relative_error(F_tilde: TwoPatchGeometry,
                            F: TwoPatchGeometry) -> float:
    """Relative squared-component mismatch on the 11 x 11 parameter grid."""
    num = 0.0
    den = 0.0
    for side in ("L", "R"):
        pt = F_tilde.patch(side)
        pf = F.patch(side)
        for i in range(11):
            for j in range(11):
                u, v = i / 10.0, j / 10.0
                a = pt.eval(u, v)
                b = pf.eval(u, v)
                num += float(((a - b) ** 2).sum())
                den += float((a ** 2).sum())
    return num / den


def fit_bilinear_like(F_tilde: TwoPatchGeometry,
                      F_hat: TwoPatchGeometry | None = None,
                      gluing: GluingData | None = None,
                      weighted: bool = True,
                      points_per_cell: int = 8) -> FitResult:
    """Approximate a generic two-patch input by a smooth biquintic geometry.

    Each coordinate of the input is least-squares projected onto the full
    C2 space built over the bilinear vertex interpolant; the projection
    weight is the bilinear reference Jacobian (``weighted=False`` projects
    in the parameter domain instead).
    """
    from .gluing import gluing_from_bilinear

    if F_hat is None:
        F_hat = bilinear_from_vertices(F_tilde)
    if gluing is None:
        gluing = gluing_from_bilinear(F_hat)
    p, r, k = 5, 2, 0
    kv = make_knot_vector(p, r, k)
    inv = gluing_invariants(gluing, kv)
    basis = build_basis_v2(gluing, inv, p, r, k)

    from .geometry import represent_geometry
    ref = represent_geometry(F_hat, kv)
    if not weighted:
        identity = _identity_geometry(kv)
        asm = DomainAssembler(identity, basis, points_per_cell)
    else:
        asm = DomainAssembler(ref, basis, points_per_cell)

    M = asm.mass().toarray()
    sol = np.empty((2, asm.dim))
    grids = {side: np.empty((kv.dim, kv.dim, 2)) for side in ("L", "R")}
    for c in (0, 1):
        rhs = np.zeros(asm.dim)
        for side in ("L", "R"):
            patch = F_tilde.patch(side)
            pa = asm.asm[side]
            values = pa.sample_parametric(lambda u, v: patch.eval(u, v)[c])
            rhs += asm.C[side] @ pa.load(values=values)
        sol[c] = np.linalg.solve(M, rhs)
        for side in ("L", "R"):
            grids[side][:, :, c] = asm.patch_coefficients(sol[c], side).reshape(
                kv.dim, kv.dim)

    space = ref.patch_L.space
    fitted = TwoPatchGeometry(Patch(space, grids["L"]), Patch(space, grids["R"]))
    return FitResult(fitted, discrete_relative_error(F_tilde, fitted), sol)


def _identity_geometry(kv: KnotVector) -> TwoPatchGeometry:
    """Two unit-square patches mirrored across x = 0 (|det J| = 1)."""
    from .geometry import square_patch_space
    space = square_patch_space(kv)
    s = SplineSpace1D(kv)
    xi = s.greville()
    n = s.dim
    gx = s.interpolate(xi)
    cp_R = np.empty((n, n, 2))
    for i in range(n):
        for j in range(n):
            cp_R[i, j] = (gx[i], gx[j])
    cp_L = cp_R.copy()
    cp_L[:, :, 0] *= -1.0
    return TwoPatchGeometry(Patch(space, cp_L), Patch(space, cp_R))
