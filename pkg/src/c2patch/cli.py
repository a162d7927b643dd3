"""Command line interface.

Subcommands: dim, gluing, basis, verify, fit, bilinear, table2.
Exit codes: 0 success, 1 validation failure, 2 numerical indeterminacy.
"""

from __future__ import annotations

import argparse
import json
import sys
from importlib import resources


from . import assembly, fields, smooth
from .bspline import make_knot_vector, uniform_inner_knots
from .geometry import (GeometryError, bilinear_from_vertices,
                       geometry_from_dict, refine_geometry, save_geometry)
from .gluing import (GluingData, GluingError, beta_from_gluing,
                     gluing_from_bilinear, gluing_invariants,
                     verify_bilinear_like, verify_sign_condition)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INDETERMINATE = 2


class CommandError(Exception):
    def __init__(self, message, code=EXIT_INVALID):
        super().__init__(message)
        self.code = code


def _resolve_geometry_path(path: str):
    """A filesystem path, or 'builtin:<name>' for a bundled asset."""
    if path.startswith("builtin:"):
        name = path.split(":", 1)[1]
        ref = resources.files("c2patch") / "assets" / f"{name}.json"
        if not ref.is_file():
            raise CommandError(f"no bundled geometry {name!r}")
        return str(ref)
    return path


def _load(path: str):
    real_path = _resolve_geometry_path(path)
    try:
        with open(real_path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise CommandError(f"cannot read geometry file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise CommandError(f"invalid JSON in geometry file: {exc}") from exc
    try:
        geo, gluing_raw = geometry_from_dict(data)
    except GeometryError as exc:
        raise CommandError(f"invalid geometry file: {exc}") from exc
    return geo, gluing_raw, int(data.get("regularity", 2))


def _gluing_for(geo, gluing_raw):
    if gluing_raw is not None:
        try:
            return GluingData.from_dict(gluing_raw)
        except GluingError as exc:
            raise CommandError(str(exc)) from exc
    if geo.patch_L.degree == 1:
        return gluing_from_bilinear(geo)
    raise CommandError(
        "geometry file carries no gluing record and is not bilinear")


def _space_params(geo, args, file_r):
    p = geo.patch_L.degree if args.p is None else args.p
    file_kv = geo.patch_L.space.space_u.kv
    r = args.r if args.r is not None else file_r
    if args.k is None:
        inner = file_kv.inner_knots
        k = len(inner)
    else:
        k = args.k
        inner = uniform_inner_knots(k)
    return p, r, k, inner


def cmd_dim(args) -> int:
    geo, gluing_raw, file_r = _load(args.geometry)
    g = _gluing_for(geo, gluing_raw)
    p, r, k, inner = _space_params(geo, args, file_r)
    kv = make_knot_vector(p, r, k, inner)
    inv = gluing_invariants(g, kv)
    g0, g1, g2 = smooth.dim_gamma(inv, p, r, k)
    d_v1 = smooth.dim_v1(p, r, k)
    d_v2 = smooth.dim_v2(inv, p, r, k)
    d_w2 = smooth.dim_w2(p, r, k, inv.d_alpha)
    print(f"p={p} r={r} k={k}")
    print(f"q = {inv.q.coef.tolist()}  h = {inv.h.coef.tolist()}")
    print(f"d_alpha={inv.d_alpha} d_atilde={inv.d_atilde} d_h={inv.d_h}")
    print(f"z_beta={inv.z_beta} Z_beta={list(inv.Z_beta)}")
    print(f"trace knot branch: {inv.ttilde_branch}")
    print(f"dim_Gamma0 = {g0}  dim_Gamma1 = {g1}  dim_Gamma2 = {g2}")
    print(f"dim_V1 = {d_v1}")
    print(f"dim_V2 = {d_v2}")
    print(f"dim_V = {d_v1 + d_v2}")
    print(f"dim_W2 = {d_w2}")
    print(f"dim_W = {d_v1 + d_w2}")
    return EXIT_OK


def cmd_gluing(args) -> int:
    geo, gluing_raw, _file_r = _load(args.geometry)
    g = _gluing_for(geo, gluing_raw)
    beta = beta_from_gluing(g)
    print(f"alpha_L = {g.alpha_L.to_list()}")
    print(f"alpha_R = {g.alpha_R.to_list()}")
    print(f"beta_L  = {g.beta_L.to_list()}")
    print(f"beta_R  = {g.beta_R.to_list()}")
    print(f"beta    = {beta.coef.tolist()}")
    print(f"sign condition: {'OK' if verify_sign_condition(g) else 'VIOLATED'}")
    return EXIT_OK if verify_sign_condition(g) else EXIT_INVALID


def _build_basis(geo, g, args, file_r):
    """Basis at the requested parameters + the geometry refined to match."""
    p, r, k, inner = _space_params(geo, args, file_r)
    if p != geo.patch_L.degree:
        raise CommandError(
            f"space degree {p} does not match the geometry degree "
            f"{geo.patch_L.degree}")
    kv = make_knot_vector(p, r, k, inner)
    inv = gluing_invariants(g, kv)
    if kv != geo.patch_L.space.space_u.kv:
        geo = refine_geometry(geo, kv)
    if args.space == "v2":
        return smooth.build_basis_v2(g, inv, p, r, k), inv, geo
    return smooth.build_basis_w2(g, inv, p, r, k), inv, geo


def cmd_basis(args) -> int:
    geo, gluing_raw, file_r = _load(args.geometry)
    g = _gluing_for(geo, gluing_raw)
    basis, _, _ = _build_basis(geo, g, args, file_r)
    out = open(args.out, "w") if args.out else sys.stdout
    try:
        for record in basis.records():
            out.write(json.dumps(record))
            out.write("\n")
    finally:
        if args.out:
            out.close()
    print(f"exported {basis.num_basis} basis records "
          f"({args.space})", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    geo, gluing_raw, file_r = _load(args.geometry)
    g = _gluing_for(geo, gluing_raw)
    ok = verify_sign_condition(g)
    print(f"sign condition: {'OK' if ok else 'VIOLATED'}")
    if not ok:
        return EXIT_INVALID
    report = verify_bilinear_like(geo, g, n_samples=args.samples, tol=args.tol)
    print(report)
    all_ok = report.passed

    basis, inv, geo = _build_basis(geo, g, args, file_r)
    worst = smooth.C2Report(0.0, 0.0, 0.0, args.tol)
    worst_vals = [0.0, 0.0, 0.0]
    for m in range(basis.num_basis):
        rep = smooth.verify_c2_at_interface(
            geo, basis.rows("L", m), basis.rows("R", m),
            n_samples=args.samples, tol=args.tol)
        worst_vals[0] = max(worst_vals[0], rep.value_diff)
        worst_vals[1] = max(worst_vals[1], rep.grad_diff)
        worst_vals[2] = max(worst_vals[2], rep.hess_diff)
    worst = smooth.C2Report(*worst_vals, args.tol)
    print(f"{basis.num_basis} basis functions ({args.space}): {worst}")
    all_ok = all_ok and worst.passed

    if args.oracle:
        p, r, k, _ = _space_params(geo, args, file_r)
        try:
            res = smooth.constraint_nullspace_dim(geo, g, p, r, k)
        except smooth.IndeterminateRankError as exc:
            print(f"oracle: INDETERMINATE ({exc})")
            return EXIT_INDETERMINATE
        formula = smooth.dim_v2(inv, p, r, k)
        status = "OK" if res.nullspace_dim == formula else "MISMATCH"
        print(f"oracle={res.nullspace_dim} formula={formula} {status} "
              f"(gap {res.gap:.1e})")
        all_ok = all_ok and res.nullspace_dim == formula
    return EXIT_OK if all_ok else EXIT_INVALID


def cmd_fit(args) -> int:
    geo, _gluing, _file_r = _load(args.initial)
    try:
        fhat = bilinear_from_vertices(geo)
        g = gluing_from_bilinear(fhat)
    except (GeometryError, GluingError) as exc:
        raise CommandError(str(exc)) from exc
    result = assembly.fit_bilinear_like(geo, fhat, g, weighted=not args.unweighted)
    print(f"discrete relative error: {result.epsilon:.6g}")
    if args.out:
        save_geometry(args.out, result.geometry, gluing=g, regularity=2)
        print(f"fitted geometry written to {args.out}")
    return EXIT_OK


def cmd_bilinear(args) -> int:
    geo, _gluing, _file_r = _load(args.initial)
    try:
        fhat = bilinear_from_vertices(geo)
        g = gluing_from_bilinear(fhat)
    except (GeometryError, GluingError) as exc:
        raise CommandError(str(exc)) from exc
    if args.out:
        save_geometry(args.out, fhat, gluing=g, regularity=0)
        print(f"bilinear interpolant written to {args.out}")
    else:
        print(json.dumps(g.to_dict()))
    return EXIT_OK


def cmd_table2(args) -> int:
    geo, gluing_raw, _file_r = _load(args.geometry)
    g = _gluing_for(geo, gluing_raw)
    f = fields.resolve_field(args.function)
    space = args.space
    reports = []
    try:
        assembly.convergence_study(geo, g, space, args.levels, f,
                                   on_report=reports.append)
    except Exception as exc:
        # flush whatever finished, with a trailing error row
        csv_text = assembly.reports_to_csv(reports)
        csv_text += f"# error at level {len(reports)}: {exc}\n"
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(csv_text)
        else:
            sys.stdout.write(csv_text)
        raise CommandError(f"convergence study failed: {exc}") from exc
    csv_text = assembly.reports_to_csv(reports)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(csv_text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(csv_text)
    for rep in reports:
        rate = "-" if rep.rate is None else f"{rep.rate:.3g}"
        crate = "-" if rep.cond_rate is None else f"{rep.cond_rate:.3g}"
        print(f"L={rep.level} dim_V1={rep.dim_interior} "
              f"dim_{space}={rep.dim_interface} err={rep.rel_l2_error:.6g} "
              f"rate={rate} cond={rep.cond:.6g} cond_rate={crate}",
              file=sys.stderr)
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="c2patch",
        description="Smooth isogeometric spline spaces on two-patch domains")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_space_opts(p):
        p.add_argument("--space", choices=("v2", "w2"), default="v2")
        p.add_argument("--p", type=int, default=None)
        p.add_argument("--r", type=int, default=None)
        p.add_argument("--k", type=int, default=None)

    p = sub.add_parser("dim", help="dimension and invariant report")
    p.add_argument("--geometry", required=True)
    add_space_opts(p)
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("gluing", help="print the interface gluing data")
    p.add_argument("--geometry", required=True)
    p.set_defaults(func=cmd_gluing)

    p = sub.add_parser("basis", help="export basis records as JSON lines")
    p.add_argument("--geometry", required=True)
    p.add_argument("--out", default=None)
    add_space_opts(p)
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("verify", help="check interface smoothness")
    p.add_argument("--geometry", required=True)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--oracle", action="store_true")
    add_space_opts(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fit", help="fit a smooth geometry to a generic input")
    p.add_argument("--initial", required=True, help="input geometry JSON")
    p.add_argument("--out", default=None)
    p.add_argument("--unweighted", action="store_true",
                   help="project in the parameter domain instead of the "
                        "reference physical domain")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("bilinear", help="bilinear vertex interpolant + gluing")
    p.add_argument("--initial", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_bilinear)

    p = sub.add_parser("table2", help="dyadic refinement convergence study")
    p.add_argument("--geometry", required=True)
    p.add_argument("--space", choices=("v2", "w2"), default="v2")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--function", default="cos2sin2")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_table2)

    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CommandError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (GeometryError, GluingError, fields.FieldError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except smooth.IndeterminateRankError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INDETERMINATE


if __name__ == "__main__":
    sys.exit(main())
