"""Two-patch planar geometries: spline patches sharing the u = 0 edge.

Includes the JSON geometry schema used by the CLI:

    {
      "degree": p, "regularity": r, "knots_interior": [...],
      "patches": {"L": {"control_points": [[x, y], ...]}, "R": {...}},
      "gluing": {"alpha_L": [a, b], "alpha_R": [...],
                 "beta_L": [...], "beta_R": [...]}      # optional
    }

Control points are listed i-major (i along u, i = 0 at the interface;
j along v).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .bspline import (KnotVector, SplineSpace1D, TensorSplineSpace,
                      make_knot_vector, refine_to)

INTERFACE_TOL = 1e-10


class GeometryError(ValueError):
    """Invalid two-patch geometry data."""


@dataclass(frozen=True)
class Patch:
    """A planar tensor-product spline patch."""

    space: TensorSplineSpace
    control_points: np.ndarray  # (n_u, n_v, 2)

    def __post_init__(self):
        cp = np.asarray(self.control_points, dtype=float)
        want = self.space.shape + (2,)
        if cp.shape != want:
            raise GeometryError(
                f"control point grid {cp.shape} does not match {want}")
        object.__setattr__(self, "control_points", cp)

    @property
    def degree(self) -> int:
        return self.space.space_u.degree

    def eval(self, u: float, v: float, du: int = 0, dv: int = 0) -> np.ndarray:
        return np.array([
            self.space.eval(self.control_points[:, :, c], u, v, du, dv)
            for c in (0, 1)])

    def derivs(self, u: float, v: float, max_du: int, max_dv: int) -> np.ndarray:
        """All mixed derivatives: shape (max_du+1, max_dv+1, 2)."""
        out = np.empty((max_du + 1, max_dv + 1, 2))
        for c in (0, 1):
            out[:, :, c] = self.space.eval_derivs(
                self.control_points[:, :, c], u, v, max_du, max_dv)
        return out

    def jacobian(self, u: float, v: float) -> np.ndarray:
        d = self.derivs(u, v, 1, 1)
        return np.column_stack([d[1, 0], d[0, 1]])


def square_patch_space(kv: KnotVector) -> TensorSplineSpace:
    s = SplineSpace1D(kv)
    return TensorSplineSpace(s, s)


@dataclass(frozen=True)
class TwoPatchGeometry:
    """Two spline patches F_L, F_R sharing the interface F_L(0, v) = F_R(0, v)."""

    patch_L: Patch
    patch_R: Patch

    def __post_init__(self):
        if self.patch_L.space.shape != self.patch_R.space.shape:
            raise GeometryError("patches must live in the same spline space")

    def patch(self, side: str) -> Patch:
        if side == "L":
            return self.patch_L
        if side == "R":
            return self.patch_R
        raise ValueError(f"side must be 'L' or 'R', got {side!r}")

    @property
    def sides(self) -> tuple[str, str]:
        return ("L", "R")

    @cached_property
    def diameter(self) -> float:
        pts = np.vstack([self.patch_L.control_points.reshape(-1, 2),
                         self.patch_R.control_points.reshape(-1, 2)])
        lo, hi = pts.min(axis=0), pts.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    def interface_mismatch(self, n_samples: int = 64) -> float:
        vs = np.linspace(0.0, 1.0, n_samples)
        worst = 0.0
        for v in vs:
            d = self.patch_L.eval(0.0, v) - self.patch_R.eval(0.0, v)
            worst = max(worst, float(np.hypot(*d)))
        return worst

    def min_abs_jacobian(self) -> float:
        """Smallest |det J| over Gauss sample grids of both patches."""
        worst = np.inf
        for patch in (self.patch_L, self.patch_R):
            p = patch.degree
            nodes, _ = np.polynomial.legendre.leggauss(p + 1)
            for su in patch.space.space_u.spans():
                us = 0.5 * (su[1] + su[2]) + 0.5 * (su[2] - su[1]) * nodes
                for sv in patch.space.space_v.spans():
                    vs = 0.5 * (sv[1] + sv[2]) + 0.5 * (sv[2] - sv[1]) * nodes
                    for u in us:
                        for v in vs:
                            det = np.linalg.det(patch.jacobian(u, v))
                            worst = min(worst, abs(det))
        return float(worst)

    def validate(self, check_regularity: bool = True) -> None:
        mism = self.interface_mismatch()
        if mism > INTERFACE_TOL * max(self.diameter, 1e-30):
            raise GeometryError(
                f"patch interfaces disagree: max |F_L(0,v) - F_R(0,v)| = {mism:.3e}")
        if check_regularity and self.min_abs_jacobian() <= 0.0:
            raise GeometryError("patch Jacobian vanishes on the sample grid")


def two_patch_geometry(patch_L: Patch, patch_R: Patch,
                       validate: bool = True,
                       check_regularity: bool = True) -> TwoPatchGeometry:
    geo = TwoPatchGeometry(patch_L, patch_R)
    if validate:
        geo.validate(check_regularity=check_regularity)
    return geo


def refine_geometry(geo: TwoPatchGeometry, target_kv: KnotVector) -> TwoPatchGeometry:
    """Exact knot-insertion refinement of both patches into S(target)^2."""
    space = square_patch_space(target_kv)
    patches = {}
    for side in geo.sides:
        patch = geo.patch(side)
        kv = patch.space.space_u.kv
        cp = patch.control_points
        cp = refine_to(kv, target_kv, cp)                      # along u
        cp = np.swapaxes(refine_to(kv, target_kv, np.swapaxes(cp, 0, 1)), 0, 1)
        patches[side] = Patch(space, cp)
    return TwoPatchGeometry(patches["L"], patches["R"])


def represent_geometry(geo: TwoPatchGeometry, target_kv: KnotVector,
                       tol: float = 1e-9) -> TwoPatchGeometry:
    """Represent both patches in S(target)^2 by Greville-grid interpolation.

    Exact (up to roundoff) when the patches already lie in the target space,
    e.g. low-degree polynomial patches re-expressed at a higher degree; a
    residual check at off-grid points guards against inexact inputs.
    """
    space = square_patch_space(target_kv)
    s1 = space.space_u
    xi = s1.greville()
    patches = {}
    for side in geo.sides:
        patch = geo.patch(side)
        cp = np.empty((s1.dim, s1.dim, 2))
        samples = np.empty((s1.dim, s1.dim, 2))
        for a, u in enumerate(xi):
            for b, v in enumerate(xi):
                samples[a, b] = patch.eval(u, v)
        for c in (0, 1):
            tmp = np.column_stack([s1.interpolate(samples[:, b, c])
                                   for b in range(s1.dim)])
            cp[:, :, c] = np.column_stack([s1.interpolate(tmp[a, :])
                                           for a in range(s1.dim)]).T
        new = Patch(space, cp)
        for u, v in ((0.37, 0.51), (0.73, 0.18)):
            err = np.abs(new.eval(u, v) - patch.eval(u, v)).max()
            if err > tol * max(np.abs(samples).max(), 1.0):
                raise GeometryError(
                    f"patch {side!r} is not representable in the target space "
                    f"(residual {err:.2e})")
        patches[side] = new
    return TwoPatchGeometry(patches["L"], patches["R"])


def bilinear_from_vertices(initial: TwoPatchGeometry) -> TwoPatchGeometry:
    """Bilinear two-patch geometry interpolating the four corners of each patch."""
    kv1 = make_knot_vector(1, 0, 0)
    space = square_patch_space(kv1)
    corner_tol = INTERFACE_TOL * max(initial.diameter, 1e-30)
    for j in (0.0, 1.0):
        d = initial.patch_L.eval(0.0, j) - initial.patch_R.eval(0.0, j)
        if np.hypot(*d) > corner_tol:
            raise GeometryError(
                f"interface corners disagree at v={j}: |diff| = {np.hypot(*d):.3e}")
    patches = {}
    for side in initial.sides:
        patch = initial.patch(side)
        cp = np.empty((2, 2, 2))
        for i in (0, 1):
            for j in (0, 1):
                cp[i, j] = patch.eval(float(i), float(j))
        patches[side] = Patch(space, cp)
    return TwoPatchGeometry(patches["L"], patches["R"])


# ---------------------------------------------------------------------------
# JSON geometry schema


def _patch_to_dict(patch: Patch) -> dict:
    return {"control_points": [[float(x), float(y)]
                               for x, y in patch.control_points.reshape(-1, 2)]}


def geometry_to_dict(geo: TwoPatchGeometry, gluing=None,
                     regularity: int | None = None) -> dict:
    kv = geo.patch_L.space.space_u.kv
    p = kv.degree
    if regularity is None:
        mults = set(kv.multiplicities[1:-1])
        regularity = p - max(mults) if mults else max(p - 1, 0)
    out = {
        "degree": p,
        "regularity": int(regularity),
        "knots_interior": [float(t) for t in kv.inner_knots],
        "patches": {side: _patch_to_dict(geo.patch(side)) for side in geo.sides},
    }
    if gluing is not None:
        out["gluing"] = gluing.to_dict()
    return out


def geometry_from_dict(data: dict, validate: bool = True) -> tuple[TwoPatchGeometry, dict | None]:
    """Parse the geometry schema; returns (geometry, raw gluing dict or None)."""
    try:
        p = int(data["degree"])
        r = int(data["regularity"])
        inner = [float(t) for t in data["knots_interior"]]
        patches_raw = data["patches"]
    except (KeyError, TypeError, ValueError) as exc:
        raise GeometryError(f"malformed geometry record: {exc}") from exc
    if not 0 <= r <= p - 1:
        raise GeometryError(f"regularity {r} invalid for degree {p}")
    kv = make_knot_vector(p, r, len(inner), inner)
    space = square_patch_space(kv)
    n = kv.dim
    patches = {}
    for side in ("L", "R"):
        if side not in patches_raw:
            raise GeometryError(f"missing patch {side!r}")
        pts = np.asarray(patches_raw[side]["control_points"], dtype=float)
        if pts.shape != (n * n, 2):
            raise GeometryError(
                f"patch {side!r}: expected {n * n} control points, got {pts.shape}")
        patches[side] = Patch(space, pts.reshape(n, n, 2))
    geo = TwoPatchGeometry(patches["L"], patches["R"])
    if validate:
        geo.validate()
    return geo, data.get("gluing")


def load_geometry(path) -> tuple[TwoPatchGeometry, dict | None]:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise GeometryError(f"invalid JSON in {path}: {exc}") from exc
    return geometry_from_dict(data)


def save_geometry(path, geo: TwoPatchGeometry, gluing=None,
                  regularity: int | None = None) -> None:
    with open(path, "w") as fh:
        json.dump(geometry_to_dict(geo, gluing, regularity), fh, indent=1)
        fh.write("\n")
