"""Dimension formulas and explicit bases of the smooth isogeometric spaces.

The interface-supported part of the C2 space is parameterized by function
triplets (trace, first and second transversal data).  Each triplet yields,
per patch, three coefficient rows with respect to the underlying
tensor-product space; the rows are computed by Greville collocation of the
three trace combinations.  A constraint-collocation nullspace oracle and a
numerical C2 interface check provide independent validation.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np
from numpy.polynomial import Polynomial

from .bspline import (KnotVector, SplineFunction1D, SplineSpace1D,
                      make_knot_vector, unit_spline)
from .geometry import TwoPatchGeometry
from .gluing import (GluingData, GluingInvariants, beta_from_gluing,
                     ttilde_knot_vector)

TRACE_RESID_TOL = 1e-9


class DegreeBudgetError(ValueError):
    """Spline spaces of the smooth basis would degenerate."""


class RepresentationError(RuntimeError):
    """A trace combination is not representable in the target spline space."""


class IndeterminateRankError(RuntimeError):
    """Singular value gap too small to decide the nullspace dimension."""


def _check_params(p: int, r: int, k: int) -> None:
    if p < 5:
        raise ValueError(f"degree must be >= 5, got {p}")
    if not 2 <= r <= p - 3:
        raise ValueError(f"regularity r={r} outside 2..{p - 3}")
    if k < 0:
        raise ValueError(f"negative knot count {k}")


# ---------------------------------------------------------------------------
# dimension formulas


def dim_v1(p: int, r: int, k: int) -> int:
    """Dimension of the interface-untouched part of the C2 space."""
    _check_params(p, r, k)
    return 2 * (p - 2 + k * (p - r)) * (p + 1 + k * (p - r))


def dim_gamma_from_numbers(p: int, r: int, k: int, d_atilde: int, d_h: int,
                           z_beta: int) -> tuple[int, int, int]:
    _check_params(p, r, k)
    if p - 2 * d_atilde < r + 1:
        raise DegreeBudgetError(
            f"p - 2*d_atilde = {p - 2 * d_atilde} < r + 1 = {r + 1}")
    g0 = k * (p - r - 1) + p + z_beta + 1
    g1 = k * (p - d_atilde - d_h - r - 1) + p - d_atilde - d_h + z_beta + 1
    g2 = k * (p - 2 * d_atilde - r) + p + 1 - 2 * d_atilde
    return g0, g1, g2


def dim_gamma(inv: GluingInvariants, p: int, r: int, k: int) -> tuple[int, int, int]:
    """Dimensions of the three trace-component spaces."""
    return dim_gamma_from_numbers(p, r, k, inv.d_atilde, inv.d_h, inv.z_beta)


def dim_v2_from_numbers(p: int, r: int, k: int, d_atilde: int, d_h: int,
                        z_beta: int) -> int:
    _check_params(p, r, k)
    if p - 2 * d_atilde < r + 1:
        raise DegreeBudgetError(
            f"p - 2*d_atilde = {p - 2 * d_atilde} < r + 1 = {r + 1}")
    return (k + 1) * (3 * (p + 1) - 3 * d_atilde - d_h) - (3 * r + 5) * k + 2 * z_beta


def dim_v2(inv: GluingInvariants, p: int, r: int, k: int) -> int:
    """Dimension of the interface part of the C2 space (closed form)."""
    value = dim_v2_from_numbers(p, r, k, inv.d_atilde, inv.d_h, inv.z_beta)
    assert value == sum(dim_gamma(inv, p, r, k))
    return value


def dim_w2(p: int, r: int, k: int, d_alpha: int) -> int:
    """Dimension of the uniformly constructible interface subspace."""
    _check_params(p, r, k)
    if p - 2 * d_alpha < r:
        raise DegreeBudgetError(
            f"p - 2*d_alpha = {p - 2 * d_alpha} < r = {r}")
    return (k + 1) * (3 * p - 3 * d_alpha) + 3 * (1 - k - k * r)


# ---------------------------------------------------------------------------
# edge functions in the transversal direction


@dataclass(frozen=True)
class EdgeFunctions:
    """The three u-direction profiles with unit value/slope/curvature at u=0."""

    M0: SplineFunction1D
    M1: SplineFunction1D
    M2: SplineFunction1D
    tau1: float


def edge_functions(space_u: SplineSpace1D) -> EdgeFunctions:
    p = space_u.degree
    inner = space_u.kv.inner_knots
    tau1 = inner[0] if inner else 1.0
    n = space_u.dim
    c0 = np.zeros(n)
    c0[:3] = 1.0
    c1 = np.zeros(n)
    c1[1] = tau1 / p
    c1[2] = 2.0 * tau1 / p
    c2 = np.zeros(n)
    c2[2] = tau1 ** 2 / (p * (p - 1))
    return EdgeFunctions(SplineFunction1D(space_u, c0),
                         SplineFunction1D(space_u, c1),
                         SplineFunction1D(space_u, c2), tau1)


# ---------------------------------------------------------------------------
# triplet components: scalar * poly(v) * D^order spline(v)


@dataclass(frozen=True)
class TripletComponent:
    """A trace component of the form scalar * poly(v) * spline^(order)(v)."""

    spline: SplineFunction1D
    order: int = 0
    poly: Polynomial | None = None
    scalar: float = 1.0

    def derivs(self, xs, max_deriv: int) -> np.ndarray:
        """Values and derivatives, shape (max_deriv + 1, len(xs))."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        svals = self.spline.derivs(xs, self.order + max_deriv)
        if self.poly is None:
            out = self.scalar * svals[self.order:self.order + max_deriv + 1]
            return np.ascontiguousarray(out)
        pd = [self.poly.deriv(m)(xs) if m <= self.poly.degree() else
              np.zeros_like(xs) for m in range(max_deriv + 1)]
        out = np.zeros((max_deriv + 1, len(xs)))
        for m in range(max_deriv + 1):
            for j in range(m + 1):
                out[m] += comb(m, j) * pd[j] * svals[self.order + m - j]
        return self.scalar * out


ZERO = None  # structurally zero triplet component

V2_FAMILIES = ("Gamma0_regular", "Gamma0_knot", "Gamma0_zbeta",
               "Gamma1_regular", "Gamma1_zbeta", "Gamma2")
W2_FAMILIES = ("W0", "W1", "W2")


@dataclass(frozen=True)
class BasisTriplet:
    """One basis function of the interface space, as its function triplet."""

    kind: str
    j: int
    g0t: TripletComponent | None
    g1t: TripletComponent | None
    g2t: TripletComponent | None

    def __post_init__(self):
        if self.kind not in V2_FAMILIES + W2_FAMILIES:
            raise ValueError(f"unknown triplet family {self.kind!r}")


# ---------------------------------------------------------------------------
# refined B-spline selection

# Tie-break among certified candidates.  The central choice reproduces the
# conditioning benchmarks of the bundled experiments; "first" (smallest
# index) is the simplest alternative and changes only the basis, not the
# space.
SELECTION_RULE = "center"


def select_refined_bspline(base: KnotVector, which: int, extra_mult: int,
                           rule: str | None = None) -> SplineFunction1D:
    """A B-spline of the multiplicity-raised space that is genuinely new.

    The returned function is nonzero at the raised knot and exhibits the
    full smoothness defect there (nonzero jump in the derivative of order
    p - new_multiplicity + 1), which certifies that it does not belong to
    the unrefined space.
    """
    if extra_mult not in (1, 2):
        raise ValueError("extra_mult must be 1 or 2")
    raised = base.with_raised_multiplicity(which, extra_mult)
    space = SplineSpace1D(raised)
    p = base.degree
    tau = base.breakpoints[which]
    new_mult = raised.multiplicities[which]
    jump_order = p - new_mult + 1

    _, ders_r = space.eval_basis(tau, jump_order, side="right")
    first_r = space.find_span(tau, side="right") - p
    _, ders_l = space.eval_basis(tau, jump_order, side="left")
    first_l = space.find_span(tau, side="left") - p

    jumps = np.zeros(space.dim)
    values = np.zeros(space.dim)
    jumps[first_r:first_r + p + 1] += ders_r[jump_order]
    jumps[first_l:first_l + p + 1] -= ders_l[jump_order]
    values[first_r:first_r + p + 1] = ders_r[0]

    scale = max(np.abs(ders_r[jump_order]).max(), np.abs(ders_l[jump_order]).max())
    candidates = [i for i in range(space.dim)
                  if abs(values[i]) > 1e-12 and abs(jumps[i]) > 1e-6 * scale]
    if not candidates:
        raise ValueError(
            f"no refined B-spline with a defect of order {jump_order} at {tau}")
    rule = rule or SELECTION_RULE
    if rule == "first":
        pick = candidates[0]
    elif rule == "last":
        pick = candidates[-1]
    elif rule == "center":
        pick = candidates[(len(candidates) - 1) // 2]
    elif rule == "peak":
        pick = max(candidates, key=lambda i: values[i])
    else:
        raise ValueError(f"unknown selection rule {rule!r}")
    return unit_spline(space, pick)


# ---------------------------------------------------------------------------
# triplet -> per-patch interface coefficient rows


def _component_derivs(comp: TripletComponent | None, xs, max_deriv: int,
                      n: int | None = None) -> np.ndarray | None:
    if comp is None:
        return None
    return comp.derivs(xs, max_deriv)


def _interface_jets(t: BasisTriplet, g: GluingData, inv: GluingInvariants,
                    side: str, xs) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sampled trace, D_u trace and D_uu trace of the patch function."""
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    zero = np.zeros(len(xs))
    beta_s = g.beta(side)(xs)

    if t.kind in W2_FAMILIES:
        alpha_s = g.alpha(side)(xs)
        g0 = _component_derivs(t.g0t, xs, 2)
        g1 = _component_derivs(t.g1t, xs, 1)
        g2 = _component_derivs(t.g2t, xs, 0)
        val = g0[0] if g0 is not None else zero
        du = zero.copy()
        duu = zero.copy()
        if g0 is not None:
            du = du + beta_s * g0[1]
            duu = duu + beta_s ** 2 * g0[2]
        if g1 is not None:
            du = du + alpha_s * g1[0]
            duu = duu + 2.0 * alpha_s * beta_s * g1[1]
        if g2 is not None:
            duu = duu + alpha_s ** 2 * g2[0]
        return val, du, duu

    atilde_s = inv.atilde(side)(xs)
    qv = inv.q(xs)
    qd = inv.q.deriv()(xs) if inv.q.degree() >= 1 else zero
    g0 = _component_derivs(t.g0t, xs, 2)
    g1 = _component_derivs(t.g1t, xs, 1)
    g2 = _component_derivs(t.g2t, xs, 0)
    val = g0[0] if g0 is not None else zero
    du = zero.copy()
    duu = zero.copy()
    if g0 is not None:
        du = du + beta_s * g0[1]
        duu = duu + beta_s ** 2 * g0[2]
    if g1 is not None:
        du = du + atilde_s * g1[0]
        duu = duu + 2.0 * atilde_s * beta_s * (g1[1] - g1[0] * qd / qv)
    if g2 is not None:
        duu = duu + atilde_s ** 2 * g2[0]
    return val, du, duu


def surface_from_triplet(t: BasisTriplet, g: GluingData, inv: GluingInvariants,
                         side: str, trace_space: SplineSpace1D,
                         edge: EdgeFunctions) -> np.ndarray:
    """The three interface coefficient rows (3 x n) of the patch spline.

    Row i holds the coefficients multiplying the i-th u-column of the
    tensor basis; they are obtained by collocating the value, slope and
    curvature combinations of the interface jets at the Greville points.
    """
    p = trace_space.degree
    tau1 = edge.tau1
    n = trace_space.dim
    xi = trace_space.greville()
    val, du, duu = _interface_jets(t, g, inv, side, xi)

    rows = np.zeros((3, n))
    structurally_zero = [t.g0t is None,
                         t.g0t is None and t.g1t is None,
                         t.g0t is None and t.g1t is None and t.g2t is None]
    targets = [val,
               val + (tau1 / p) * du,
               val + (2.0 * tau1 / p) * du + (tau1 ** 2 / (p * (p - 1))) * duu]
    for i, (target, zero) in enumerate(zip(targets, structurally_zero)):
        if zero:
            continue
        rows[i] = trace_space.interpolate(target)

    # representability check at off-collocation points
    mids = 0.5 * (xi[:-1] + xi[1:])
    mids = mids[(mids > 0.0) & (mids < 1.0)]
    val_m, du_m, duu_m = _interface_jets(t, g, inv, side, mids)
    checks = [val_m,
              val_m + (tau1 / p) * du_m,
              val_m + (2.0 * tau1 / p) * du_m + (tau1 ** 2 / (p * (p - 1))) * duu_m]
    for i, target in enumerate(checks):
        if structurally_zero[i]:
            continue
        approx = trace_space.eval_function(rows[i], mids)[0]
        scale = max(1.0, np.abs(target).max())
        resid = np.abs(approx - target).max() / scale
        if resid > TRACE_RESID_TOL:
            raise RepresentationError(
                f"trace combination {i} of {t.kind}[{t.j}] not representable "
                f"in the patch space (residual {resid:.2e})")
    return rows


# ---------------------------------------------------------------------------
# basis assembly


@dataclass(frozen=True)
class SmoothBasis:
    """An explicit basis of the interface part of a smooth space."""

    space_kind: str                      # "v2" or "w2"
    triplets: tuple[BasisTriplet, ...]
    A_L: np.ndarray                      # (num_basis, 3n)
    A_R: np.ndarray
    n: int                               # trace-space dimension
    family_sizes: dict

    @property
    def num_basis(self) -> int:
        return len(self.triplets)

    def rows(self, side: str, m: int) -> np.ndarray:
        A = self.A_L if side == "L" else self.A_R
        return A[m].reshape(3, self.n)

    def interior_indices(self) -> list[tuple[str, int, int]]:
        """Index triples (side, i, j) of the interface-untouched basis."""
        return [(side, i, j) for side in ("L", "R")
                for i in range(3, self.n) for j in range(self.n)]

    def stacked_matrix(self) -> np.ndarray:
        """[A_L | A_R] with the shared trace block identified (num x 5n)."""
        return np.hstack([self.A_L, self.A_R[:, self.n:]])

    def records(self):
        """JSON-ready export records {family, j, rows_L, rows_R}."""
        for m, t in enumerate(self.triplets):
            yield {"family": t.kind, "j": t.j,
                   "rows_L": self.rows("L", m).tolist(),
                   "rows_R": self.rows("R", m).tolist()}


def _assemble_basis(kind: str, triplets, g, inv, trace_space, edge) -> SmoothBasis:
    n = trace_space.dim
    A_L = np.zeros((len(triplets), 3 * n))
    A_R = np.zeros((len(triplets), 3 * n))
    sizes: dict[str, int] = {}
    for m, t in enumerate(triplets):
        sizes[t.kind] = sizes.get(t.kind, 0) + 1
        rows_L = surface_from_triplet(t, g, inv, "L", trace_space, edge)
        rows_R = surface_from_triplet(t, g, inv, "R", trace_space, edge)
        if t.g0t is not None:
            rows_R[0] = rows_L[0]         # shared trace, computed once
        A_L[m] = rows_L.ravel()
        A_R[m] = rows_R.ravel()
    return SmoothBasis(kind, tuple(triplets), A_L, A_R, n, sizes)


def _spline_space(p: int, r: int, inner) -> SplineSpace1D:
    """S(T_k^{p,r}); interior multiplicity zero degenerates to k = 0."""
    if p - r <= 0:
        return SplineSpace1D(make_knot_vector(p, p - 1, 0))
    return SplineSpace1D(make_knot_vector(p, r, len(inner), inner))


def build_basis_v2(g: GluingData, inv: GluingInvariants, p: int, r: int,
                   k: int) -> SmoothBasis:
    """Explicit basis of the interface part of the full C2 space."""
    _check_params(p, r, k)
    if p - 2 * inv.d_atilde < r + 1:
        raise DegreeBudgetError("triplet spaces degenerate: p - 2*d_atilde < r + 1")
    inner = inv.ttilde.inner_knots
    if len(inner) != k:
        raise ValueError("invariants were built for a different knot count")

    trace_space = _spline_space(p, r, inner)
    edge = edge_functions(trace_space)

    s0 = _spline_space(p, r + 2, inner)
    p1 = p - inv.d_atilde - inv.d_h
    s1_base = _spline_space(p1, r + 1, inner)
    s2 = _spline_space(p - 2 * inv.d_atilde, r, inner)

    q, h = inv.q, inv.h
    h_poly = None if inv.d_h == 0 and abs(h(0.0) - 1.0) < 1e-14 else h
    q_poly = None if inv.q.degree() == 0 else q

    def at(poly_or_lin, tau):
        return float(poly_or_lin(tau))

    triplets: list[BasisTriplet] = []

    # trace family: plain B-splines of the smoother space
    for j in range(s0.dim):
        triplets.append(BasisTriplet(
            "Gamma0_regular", j, TripletComponent(unit_spline(s0, j)), ZERO, ZERO))

    # one function per interior knot, from the once-raised space
    for j in range(k):
        tau = inner[j]
        N = select_refined_bspline(s0.kv, j + 1, 1)
        aL, aR = at(inv.atilde_L, tau), at(inv.atilde_R, tau)
        bL, bR = at(g.beta_L, tau), at(g.beta_R, tau)
        c1 = -(aR * bL + aL * bR) / (2.0 * aR * aL * at(q, tau))
        c2 = (bL * bR) / (aL * aR)
        triplets.append(BasisTriplet(
            "Gamma0_knot", j,
            TripletComponent(N),
            TripletComponent(N, order=1, poly=q_poly, scalar=c1) if c1 else ZERO,
            TripletComponent(N, order=2, scalar=c2) if c2 else ZERO))

    # extra trace functions at the roots of beta, from the twice-raised space
    for j, ell in enumerate(inv.Z_beta):
        tau = inner[ell - 1]
        N = select_refined_bspline(s0.kv, ell, 2)
        aL = at(inv.atilde_L, tau)
        bL = at(g.beta_L, tau)
        c1 = -bL / (at(q, tau) * aL)
        c2 = (bL / aL) ** 2
        triplets.append(BasisTriplet(
            "Gamma0_zbeta", j,
            TripletComponent(N),
            TripletComponent(N, order=1, poly=q_poly, scalar=c1) if c1 else ZERO,
            TripletComponent(N, order=2, scalar=c2) if c2 else ZERO))

    # first transversal family
    for j in range(s1_base.dim):
        triplets.append(BasisTriplet(
            "Gamma1_regular", j, ZERO,
            TripletComponent(unit_spline(s1_base, j), poly=h_poly), ZERO))
    for j, ell in enumerate(inv.Z_beta):
        tau = inner[ell - 1]
        N = select_refined_bspline(s1_base.kv, ell, 1)
        c2 = -2.0 * at(g.beta_L, tau) / at(inv.atilde_L, tau)
        triplets.append(BasisTriplet(
            "Gamma1_zbeta", j, ZERO,
            TripletComponent(N, poly=h_poly),
            TripletComponent(N, order=1, poly=h_poly, scalar=c2) if c2 else ZERO))

    # second transversal family
    for j in range(s2.dim):
        triplets.append(BasisTriplet(
            "Gamma2", j, ZERO, ZERO, TripletComponent(unit_spline(s2, j))))

    g0_dim, g1_dim, g2_dim = dim_gamma(inv, p, r, k)
    assert len(triplets) == g0_dim + g1_dim + g2_dim
    return _assemble_basis("v2", triplets, g, inv, trace_space, edge)


def build_basis_w2(g: GluingData, inv: GluingInvariants, p: int, r: int,
                   k: int, d_alpha: int | None = None) -> SmoothBasis:
    """Basis of the uniformly constructible interface subspace."""
    _check_params(p, r, k)
    d_alpha = inv.d_alpha if d_alpha is None else d_alpha
    if p - 2 * d_alpha < r:
        raise DegreeBudgetError("triplet spaces degenerate: p - 2*d_alpha < r")
    inner = inv.ttilde.inner_knots
    trace_space = _spline_space(p, r, inner)
    edge = edge_functions(trace_space)

    s0 = _spline_space(p, r + 2, inner)
    s1 = _spline_space(p - d_alpha, r + 1, inner)
    s2 = _spline_space(p - 2 * d_alpha, r, inner)

    triplets: list[BasisTriplet] = []
    for j in range(s0.dim):
        triplets.append(BasisTriplet(
            "W0", j, TripletComponent(unit_spline(s0, j)), ZERO, ZERO))
    for j in range(s1.dim):
        triplets.append(BasisTriplet(
            "W1", j, ZERO, TripletComponent(unit_spline(s1, j)), ZERO))
    for j in range(s2.dim):
        triplets.append(BasisTriplet(
            "W2", j, ZERO, ZERO, TripletComponent(unit_spline(s2, j))))

    assert len(triplets) == dim_w2(p, r, k, d_alpha)
    return _assemble_basis("w2", triplets, g, inv, trace_space, edge)


# ---------------------------------------------------------------------------
# independent nullspace oracle on the smoothness conditions


@dataclass(frozen=True)
class OracleResult:
    nullspace_dim: int
    gap: float
    singular_values: np.ndarray


def constraint_nullspace_dim(F: TwoPatchGeometry, g: GluingData, p: int,
                             r: int, k: int, oversample: int = 4,
                             zero_tol: float = 1e-9,
                             min_gap: float = 1e2) -> OracleResult:
    """Nullspace dimension of the collocated interface smoothness system.

    Collocates the continuity, first-order and second-order matching
    equations in the 6n interface coefficients of both patches and counts
    the numerical nullspace (singular values below ``zero_tol`` times the
    largest).  Raises IndeterminateRankError when the spectral gap between
    kept and dropped singular values is smaller than ``min_gap``.
    """
    _check_params(p, r, k)
    kv = F.patch_L.space.space_u.kv
    if kv.degree != p or kv.num_inner != k:
        raise ValueError("geometry space does not match the requested (p, k)")
    trace = SplineSpace1D(kv)
    n = trace.dim

    beta = beta_from_gluing(g)
    dalpha_L = g.alpha_L.derivative()
    theta_lin = (g.alpha_L.poly * g.beta_L.derivative()
                 - dalpha_L * g.beta_L.poly)

    n_pts = oversample * (p + 1) * (k + 1)
    vs = np.linspace(0.0, 1.0, n_pts)

    # transversal derivative factors of the first three u-basis functions at u = 0
    _, du_ders = trace.eval_basis(0.0, 2)
    N0_d = du_ders[1, :3]     # first derivatives of N_0, N_1, N_2 at 0
    N0_dd = du_ders[2, :3]

    def vrow(v, der):
        first, ders = trace.eval_basis(v, der)
        out = np.zeros(n)
        out[first:first + p + 1] = ders[der]
        return out

    # unknown layout: d[(side, i, j)] -> side * 3n + i * n + j
    rows = []
    for v in vs:
        Nv = vrow(v, 0)
        Nv1 = vrow(v, 1)
        Nv2 = vrow(v, 2)
        aL, aR, bv = g.alpha_L(v), g.alpha_R(v), beta(v)

        # value agreement
        row = np.zeros(6 * n)
        row[0:n] = Nv
        row[3 * n:4 * n] = -Nv
        rows.append(row)

        # first-order matching
        row = np.zeros(6 * n)
        for i in range(2):
            row[i * n:(i + 1) * n] += aR * N0_d[i] * Nv
            row[(3 + i) * n:(4 + i) * n] += -aL * N0_d[i] * Nv
        row[0:n] += bv * Nv1
        rows.append(row)

        # second-order matching
        row = np.zeros(6 * n)
        eta = 2.0 * dalpha_L * aR * bv
        theta = 2.0 * theta_lin(v) * aR * bv
        for i in range(3):
            # w-term: aL^2 Duu g_R - aR^2 Duu g_L
            row[(3 + i) * n:(4 + i) * n] += aL * aL ** 2 * N0_dd[i] * Nv
            row[i * n:(i + 1) * n] += -aL * aR ** 2 * N0_dd[i] * Nv
        for i in range(2):
            row[i * n:(i + 1) * n] += -aL * 2.0 * aR * bv * N0_d[i] * Nv1
            row[i * n:(i + 1) * n] += eta * N0_d[i] * Nv
        row[0:n] += -aL * bv ** 2 * Nv2
        row[0:n] += theta * Nv1
        rows.append(row)

    C = np.array(rows)
    norms = np.linalg.norm(C, axis=1)
    C = C[norms > 0.0] / norms[norms > 0.0, None]

    sv = np.linalg.svd(C, compute_uv=False)
    cutoff = zero_tol * sv[0]
    rank = int((sv > cutoff).sum())
    nullity = 6 * n - rank
    if rank == len(sv) or rank == 0:
        gap = np.inf
    else:
        gap = sv[rank - 1] / sv[rank] if sv[rank] > 0 else np.inf
    if gap < min_gap:
        raise IndeterminateRankError(
            f"singular value gap {gap:.1e} below {min_gap:.0e}; "
            f"rank decision is ambiguous")
    return OracleResult(nullity, float(gap), sv)


# ---------------------------------------------------------------------------
# numerical C2 check in physical space


@dataclass(frozen=True)
class C2Report:
    value_diff: float
    grad_diff: float
    hess_diff: float
    tol: float

    @property
    def passed(self) -> bool:
        return max(self.value_diff, self.grad_diff, self.hess_diff) < self.tol

    def __str__(self):
        status = "PASS" if self.passed else "FAIL"
        return (f"interface smoothness: value={self.value_diff:.3e} "
                f"grad={self.grad_diff:.3e} hess={self.hess_diff:.3e} "
                f"(tol {self.tol:.1e}) {status}")


def _physical_jets(patch, coeffs, u, v):
    space = patch.space
    gj = space.eval_derivs(coeffs, u, v, 2, 2)
    fd = patch.derivs(u, v, 2, 2)
    J = np.column_stack([fd[1, 0], fd[0, 1]])
    Jinv = np.linalg.inv(J)
    grad_param = np.array([gj[1, 0], gj[0, 1]])
    grad = Jinv.T @ grad_param
    Hg = np.array([[gj[2, 0], gj[1, 1]], [gj[1, 1], gj[0, 2]]])
    HF = [np.array([[fd[2, 0][c], fd[1, 1][c]], [fd[1, 1][c], fd[0, 2][c]]])
          for c in (0, 1)]
    H = Jinv.T @ (Hg - grad[0] * HF[0] - grad[1] * HF[1]) @ Jinv
    return gj[0, 0], grad, H


def verify_c2_at_interface(F: TwoPatchGeometry, rows_L: np.ndarray,
                           rows_R: np.ndarray, n_samples: int = 50,
                           tol: float = 1e-8) -> C2Report:
    """Compare value, gradient and Hessian across the interface.

    ``rows_L`` / ``rows_R`` hold the three interface coefficient rows of the
    respective patch (shape (3, n)); the remaining coefficients are zero.
    Differences are scaled by the magnitude of the quantity compared.
    """
    n = F.patch_L.space.space_u.dim
    grids = {}
    for side, rows in (("L", rows_L), ("R", rows_R)):
        rows = np.asarray(rows, dtype=float)
        if rows.shape == (3 * n,):
            rows = rows.reshape(3, n)
        if rows.shape != (3, n):
            raise ValueError(f"rows_{side} must have shape (3, {n})")
        grid = np.zeros((n, n))
        grid[:3] = rows
        grids[side] = grid

    vs = (np.arange(n_samples) + 0.5) / n_samples
    diffs = np.zeros(3)
    scales = np.full(3, 1e-30)
    for v in vs:
        val_L, grad_L, hess_L = _physical_jets(F.patch_L, grids["L"], 0.0, v)
        val_R, grad_R, hess_R = _physical_jets(F.patch_R, grids["R"], 0.0, v)
        diffs[0] = max(diffs[0], abs(val_L - val_R))
        diffs[1] = max(diffs[1], np.abs(grad_L - grad_R).max())
        diffs[2] = max(diffs[2], np.abs(hess_L - hess_R).max())
        scales[0] = max(scales[0], abs(val_L), abs(val_R))
        scales[1] = max(scales[1], np.abs(grad_L).max(), np.abs(grad_R).max())
        scales[2] = max(scales[2], np.abs(hess_L).max(), np.abs(hess_R).max())
    scales = np.maximum(scales, 1.0)
    rel = diffs / scales
    return C2Report(rel[0], rel[1], rel[2], tol)
