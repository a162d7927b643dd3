"""Univariate and tensor-product B-spline spaces on [0, 1].

Open knot vectors with per-knot multiplicity bookkeeping, basis evaluation
with derivatives (Cox-de Boor recurrences), Greville abscissae, collocation
interpolation and knot insertion.  Everything is immutable after
construction; operations are pure functions of their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.linalg import solve_banded

KNOT_TOL = 1e-12


def _as_float_tuple(values) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class KnotVector:
    """Open knot vector on [0, 1] stored as distinct breakpoints + multiplicities.

    Breakpoints include the interval ends 0 and 1, whose multiplicity is
    always ``degree + 1``.  Interior multiplicities lie in ``1..degree``.
    """

    degree: int
    breakpoints: tuple[float, ...]
    multiplicities: tuple[int, ...]

    def __post_init__(self):
        p = self.degree
        bp = self.breakpoints
        mult = self.multiplicities
        if p < 1:
            raise ValueError(f"degree must be >= 1, got {p}")
        if len(bp) != len(mult):
            raise ValueError("breakpoints and multiplicities differ in length")
        if len(bp) < 2:
            raise ValueError("need at least the two boundary breakpoints")
        if abs(bp[0]) > KNOT_TOL or abs(bp[-1] - 1.0) > KNOT_TOL:
            raise ValueError("knot vector must span exactly [0, 1]")
        if any(b2 - b1 <= KNOT_TOL for b1, b2 in zip(bp, bp[1:])):
            raise ValueError("breakpoints must be strictly increasing")
        if mult[0] != p + 1 or mult[-1] != p + 1:
            raise ValueError("boundary knots must have multiplicity degree + 1")
        for m in mult[1:-1]:
            if not 1 <= m <= p:
                raise ValueError(f"interior multiplicity {m} outside 1..{p}")

    @cached_property
    def knots(self) -> np.ndarray:
        """Expanded nondecreasing knot sequence."""
        out = np.repeat(np.asarray(self.breakpoints, dtype=float),
                        np.asarray(self.multiplicities, dtype=int))
        out.flags.writeable = False
        return out

    @property
    def num_inner(self) -> int:
        return len(self.breakpoints) - 2

    @property
    def inner_knots(self) -> tuple[float, ...]:
        return self.breakpoints[1:-1]

    @property
    def dim(self) -> int:
        """Number of B-spline basis functions."""
        return len(self.knots) - self.degree - 1

    def multiplicity_of(self, x: float, tol: float = KNOT_TOL) -> int:
        for b, m in zip(self.breakpoints, self.multiplicities):
            if abs(b - x) <= tol:
                return m
        return 0

    def with_raised_multiplicity(self, which: int, times: int = 1) -> "KnotVector":
        """Raise the multiplicity of the ``which``-th interior knot (1-based)."""
        if not 1 <= which <= self.num_inner:
            raise ValueError(f"interior knot index {which} outside 1..{self.num_inner}")
        if times < 1:
            raise ValueError("times must be >= 1")
        mult = list(self.multiplicities)
        mult[which] += times
        if mult[which] > self.degree:
            raise ValueError(
                f"multiplicity {mult[which]} exceeds degree {self.degree} "
                f"at inner knot {which}")
        return KnotVector(self.degree, self.breakpoints, tuple(mult))

    def __eq__(self, other) -> bool:
        if not isinstance(other, KnotVector):
            return NotImplemented
        return (self.degree == other.degree
                and self.multiplicities == other.multiplicities
                and len(self.breakpoints) == len(other.breakpoints)
                and all(abs(a - b) <= KNOT_TOL
                        for a, b in zip(self.breakpoints, other.breakpoints)))

    def __hash__(self):
        return hash((self.degree, self.multiplicities, len(self.breakpoints)))


def make_knot_vector(p: int, r: int, k: int, inner_knots=()) -> KnotVector:
    """Open knot vector of degree ``p`` whose ``k`` interior knots all carry
    multiplicity ``p - r`` (splines are then C^r at every interior knot)."""
    if p < 1:
        raise ValueError(f"degree must be >= 1, got {p}")
    if not 0 <= r <= p - 1:
        raise ValueError(f"regularity r={r} outside 0..{p - 1}")
    inner = _as_float_tuple(inner_knots)
    if len(inner) != k:
        raise ValueError(f"expected {k} interior knots, got {len(inner)}")
    if any(not 0.0 < t < 1.0 for t in inner):
        raise ValueError("interior knots must lie strictly inside (0, 1)")
    if any(t2 - t1 <= KNOT_TOL for t1, t2 in zip(inner, inner[1:])):
        raise ValueError("interior knots must be strictly increasing")
    bp = (0.0,) + inner + (1.0,)
    mult = (p + 1,) + (p - r,) * k + (p + 1,)
    return KnotVector(p, bp, mult)


def elevate_multiplicity(kv: KnotVector, which: int, times: int = 1) -> KnotVector:
    """Raise the multiplicity of a single interior knot (1-based index)."""
    return kv.with_raised_multiplicity(which, times)


def uniform_inner_knots(k: int) -> tuple[float, ...]:
    """k uniformly spaced interior knots i/(k+1); exact dyadics for k = 2^L - 1."""
    return tuple((i + 1) / (k + 1) for i in range(k))


def _ders_basis_funs(knots: np.ndarray, p: int, span: int, x: float,
                     nd: int) -> np.ndarray:
    """Nonzero basis functions and derivatives at ``x`` (orders 0..nd <= p)."""
    ndu = np.empty((p + 1, p + 1))
    ndu[0, 0] = 1.0
    left = np.empty(p + 1)
    right = np.empty(p + 1)
    for j in range(1, p + 1):
        left[j] = x - knots[span + 1 - j]
        right[j] = knots[span + j] - x
        saved = 0.0
        for rr in range(j):
            ndu[j, rr] = right[rr + 1] + left[j - rr]
            temp = ndu[rr, j - 1] / ndu[j, rr]
            ndu[rr, j] = saved + right[rr + 1] * temp
            saved = left[j - rr] * temp
        ndu[j, j] = saved

    ders = np.zeros((nd + 1, p + 1))
    ders[0, :] = ndu[:, p]
    a = np.empty((2, p + 1))
    for rr in range(p + 1):
        s1, s2 = 0, 1
        a[0, 0] = 1.0
        for kk in range(1, nd + 1):
            d = 0.0
            rk = rr - kk
            pk = p - kk
            if rr >= kk:
                a[s2, 0] = a[s1, 0] / ndu[pk + 1, rk]
                d = a[s2, 0] * ndu[rk, pk]
            j1 = 1 if rk >= -1 else -rk
            j2 = kk - 1 if rr - 1 <= pk else p - rr
            for j in range(j1, j2 + 1):
                a[s2, j] = (a[s1, j] - a[s1, j - 1]) / ndu[pk + 1, rk + j]
                d += a[s2, j] * ndu[rk + j, pk]
            if rr <= pk:
                a[s2, kk] = -a[s1, kk - 1] / ndu[pk + 1, rr]
                d += a[s2, kk] * ndu[rr, pk]
            ders[kk, rr] = d
            s1, s2 = s2, s1

    fac = float(p)
    for kk in range(1, nd + 1):
        ders[kk, :] *= fac
        fac *= p - kk
    return ders


class SplineSpace1D:
    """Univariate spline space S(T, [0, 1]) over an open knot vector."""

    def __init__(self, kv: KnotVector):
        self.kv = kv
        self.degree = kv.degree
        self.knots = kv.knots
        self.dim = kv.dim

    def __repr__(self):
        return (f"SplineSpace1D(p={self.degree}, dim={self.dim}, "
                f"inner={list(self.kv.inner_knots)})")

    def __eq__(self, other):
        return isinstance(other, SplineSpace1D) and self.kv == other.kv

    def __hash__(self):
        return hash(self.kv)

    def find_span(self, x: float, side: str = "right") -> int:
        """Span index i with knots[i] <= x < knots[i+1].

        ``side='right'`` gives right limits at knots, except at x = 1 where
        the left limit is used; ``side='left'`` gives left limits.
        """
        if not -KNOT_TOL <= x <= 1.0 + KNOT_TOL:
            raise ValueError(f"evaluation point {x} outside [0, 1]")
        n = self.dim
        if side == "right":
            span = int(np.searchsorted(self.knots, x, side="right")) - 1
        elif side == "left":
            span = int(np.searchsorted(self.knots, x, side="left")) - 1
        else:
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        return min(max(span, self.degree), n - 1)

    def eval_basis(self, x: float, max_deriv: int = 0,
                   side: str = "right") -> tuple[int, np.ndarray]:
        """Values/derivatives of the <= p+1 basis functions nonzero at ``x``.

        Returns ``(first_index, ders)`` where ``ders[m, j]`` is the m-th
        derivative of basis function ``first_index + j``.  Derivative orders
        beyond the degree are identically zero.
        """
        span = self.find_span(x, side=side)
        nd = min(max_deriv, self.degree)
        ders = _ders_basis_funs(self.knots, self.degree, span, float(x), nd)
        if max_deriv > nd:
            ders = np.vstack([ders, np.zeros((max_deriv - nd, self.degree + 1))])
        return span - self.degree, ders

    def eval_basis_many(self, xs, max_deriv: int = 0) -> tuple[np.ndarray, np.ndarray]:
        """Vectorized ``eval_basis``: (firsts, ders[len(xs), max_deriv+1, p+1])."""
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        firsts = np.empty(len(xs), dtype=int)
        ders = np.empty((len(xs), max_deriv + 1, self.degree + 1))
        for i, x in enumerate(xs):
            firsts[i], ders[i] = self.eval_basis(x, max_deriv)
        return firsts, ders

    def eval_function(self, coeffs, xs, max_deriv: int = 0) -> np.ndarray:
        """Evaluate a spline (given by its coefficients) and derivatives.

        Returns an array of shape ``(max_deriv + 1, len(xs))``.
        """
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coefficients, got {coeffs.shape}")
        xs = np.atleast_1d(np.asarray(xs, dtype=float))
        out = np.empty((max_deriv + 1, len(xs)))
        for i, x in enumerate(xs):
            first, ders = self.eval_basis(x, max_deriv)
            out[:, i] = ders @ coeffs[first:first + self.degree + 1]
        return out

    def greville(self) -> np.ndarray:
        """Greville abscissae xi_i = (t_{i+1} + ... + t_{i+p}) / p."""
        p = self.degree
        t = self.knots
        out = np.array([t[i + 1:i + p + 1].sum() / p for i in range(self.dim)])
        return np.clip(out, 0.0, 1.0)

    @cached_property
    def _collocation_banded(self) -> np.ndarray:
        """Banded storage of the Greville collocation matrix for solve_banded."""
        p = self.degree
        n = self.dim
        ab = np.zeros((2 * p + 1, n))
        for i, x in enumerate(self.greville()):
            first, ders = self.eval_basis(x, 0)
            for loc in range(p + 1):
                j = first + loc
                ab[p + i - j, j] = ders[0, loc]
        return ab

    def interpolate(self, samples) -> np.ndarray:
        """Coefficients c with sum_j c_j N_j(xi_i) = samples[i] at Greville points."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape[0] != self.dim:
            raise ValueError(f"expected {self.dim} samples, got {samples.shape[0]}")
        p = self.degree
        return solve_banded((p, p), self._collocation_banded, samples)

    def spans(self) -> list[tuple[int, float, float]]:
        """Nonempty knot spans as (span_index, left, right)."""
        t = self.knots
        return [(i, t[i], t[i + 1])
                for i in range(self.degree, self.dim)
                if t[i + 1] - t[i] > KNOT_TOL]


@dataclass(frozen=True)
class SplineFunction1D:
    """A univariate spline: a space plus a coefficient vector."""

    space: SplineSpace1D
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=float)
        if c.shape != (self.space.dim,):
            raise ValueError(
                f"expected {self.space.dim} coefficients, got {c.shape}")
        object.__setattr__(self, "coefficients", c)

    def __call__(self, xs, der: int = 0):
        vals = self.space.eval_function(self.coefficients, xs, der)[der]
        return float(vals[0]) if np.isscalar(xs) else vals

    def derivs(self, xs, max_deriv: int) -> np.ndarray:
        return self.space.eval_function(self.coefficients, xs, max_deriv)


def unit_spline(space: SplineSpace1D, index: int) -> SplineFunction1D:
    """The ``index``-th B-spline of a space as a SplineFunction1D."""
    c = np.zeros(space.dim)
    c[index] = 1.0
    return SplineFunction1D(space, c)


def eval_basis(space: SplineSpace1D, x: float, max_deriv: int = 0):
    """Functional form of SplineSpace1D.eval_basis."""
    return space.eval_basis(x, max_deriv)


def greville_abscissae(space: SplineSpace1D) -> np.ndarray:
    """Functional form of SplineSpace1D.greville."""
    return space.greville()


def interpolate_at_greville(space: SplineSpace1D, samples) -> SplineFunction1D:
    """Spline matching the samples at the Greville abscissae."""
    return SplineFunction1D(space, space.interpolate(samples))


@dataclass(frozen=True)
class TensorSplineSpace:
    """Tensor-product spline space on the unit square."""

    space_u: SplineSpace1D
    space_v: SplineSpace1D

    @property
    def shape(self) -> tuple[int, int]:
        return (self.space_u.dim, self.space_v.dim)

    def eval(self, coeffs, u: float, v: float, du: int = 0, dv: int = 0) -> float:
        """Value of d_u^du d_v^dv sum_{i,j} c_{i,j} N_i(u) N_j(v)."""
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape[:2] != self.shape:
            raise ValueError(f"coefficient grid {coeffs.shape} does not match "
                             f"space shape {self.shape}")
        fu, bu = self.space_u.eval_basis(u, du)
        fv, bv = self.space_v.eval_basis(v, dv)
        pu = self.space_u.degree
        pv = self.space_v.degree
        block = coeffs[fu:fu + pu + 1, fv:fv + pv + 1]
        return float(bu[du] @ block @ bv[dv])

    def eval_derivs(self, coeffs, u: float, v: float,
                    max_du: int, max_dv: int) -> np.ndarray:
        """All mixed derivatives up to (max_du, max_dv) at one point."""
        coeffs = np.asarray(coeffs, dtype=float)
        fu, bu = self.space_u.eval_basis(u, max_du)
        fv, bv = self.space_v.eval_basis(v, max_dv)
        pu = self.space_u.degree
        pv = self.space_v.degree
        block = coeffs[fu:fu + pu + 1, fv:fv + pv + 1]
        return np.einsum("ai,ij,bj->ab", bu, block, bv)


def eval_tensor(space: TensorSplineSpace, coeffs, u: float, v: float,
                du: int = 0, dv: int = 0) -> float:
    return space.eval(coeffs, u, v, du, dv)


def insert_knot(kv: KnotVector, coeffs: np.ndarray, x: float) -> tuple[KnotVector, np.ndarray]:
    """Insert the knot ``x`` once (Boehm); coefficients along axis 0.

    Reproduces the same spline in the refined space.
    """
    p = kv.degree
    t = kv.knots
    n = kv.dim
    coeffs = np.asarray(coeffs, dtype=float)
    if coeffs.shape[0] != n:
        raise ValueError(f"expected {n} coefficient rows, got {coeffs.shape[0]}")
    if not KNOT_TOL < x < 1.0 - KNOT_TOL:
        raise ValueError("can only insert interior knots")

    span = int(np.searchsorted(t, x, side="right")) - 1
    span = min(max(span, p), n - 1)

    new = np.empty((n + 1,) + coeffs.shape[1:], dtype=float)
    new[:span - p + 1] = coeffs[:span - p + 1]
    for i in range(span - p + 1, span + 1):
        a = (x - t[i]) / (t[i + p] - t[i])
        new[i] = a * coeffs[i] + (1.0 - a) * coeffs[i - 1]
    new[span + 1:] = coeffs[span:]

    bp = list(kv.breakpoints)
    mult = list(kv.multiplicities)
    for idx, b in enumerate(bp):
        if abs(b - x) <= KNOT_TOL:
            mult[idx] += 1
            break
    else:
        idx = int(np.searchsorted(np.asarray(bp), x))
        bp.insert(idx, float(x))
        mult.insert(idx, 1)
    return KnotVector(p, tuple(bp), tuple(mult)), new


def refine_to(kv: KnotVector, target: KnotVector, coeffs: np.ndarray) -> np.ndarray:
    """Coefficients of the same spline in the finer space ``target``.

    ``target`` must refine ``kv``: same degree, knot multiset containment.
    """
    if target.degree != kv.degree:
        raise ValueError("refinement requires equal degrees")
    cur_kv, cur = kv, np.asarray(coeffs, dtype=float)
    for b, m in zip(target.breakpoints[1:-1], target.multiplicities[1:-1]):
        have = cur_kv.multiplicity_of(b)
        if have > m:
            raise ValueError(f"target is coarser than source at knot {b}")
        for _ in range(m - have):
            cur_kv, cur = insert_knot(cur_kv, cur, b)
    if cur_kv != target:
        raise ValueError("target does not refine the source knot vector")
    return cur
