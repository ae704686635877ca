"""Command line interface.

Exit codes: 0 success, 1 failed example checks, 2 malformed spec or
arguments, 3 convexity violation, 4 solver failure, 5 failed precondition,
6 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import criteria as cr
from .billiards import SYSTEMS, build_system
from .curves import LpBall, SupportBody, SupportCurve, det2, dot2, unit
from .errors import (BandError, BilliardError, ConvexityError, PreconditionError, SolverError, SpecError,
                     SymmetryError)
from .specs import as_body, as_curve, load_shape
from .symmetry import linear_orders, rotation_orders
from .twistmaps import periodic_orbit_solve

EXIT_OK, EXIT_EXAMPLES, EXIT_SPEC, EXIT_CONVEXITY, EXIT_SOLVER, EXIT_PRECONDITION, EXIT_IO = range(7)
FLOAT_FMT = "%.17g"


def _emit(obj, out=None):
    text = json.dumps(cr._jsonable(obj), indent=2, allow_nan=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def write_csv(path, columns, data, comments=()):
    """Write columns with ``#`` header lines; floats in round-trip precision."""
    header = list(comments) + ["columns: " + ", ".join(columns)]
    np.savetxt(path, np.column_stack(data), fmt=FLOAT_FMT, delimiter=",",
               header="\n".join(header), comments="# ")


def read_csv(path):
    """Inverse of :func:`write_csv`: ``(columns, array)``."""
    columns = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            if line.startswith("# columns:"):
                columns = [c.strip() for c in line.split(":", 1)[1].split(",")]
    return columns, np.loadtxt(path, delimiter=",", comments="#", ndmin=2)


def _widths(shape, n=2048):
    theta = np.arange(n) * (np.pi / n)
    if hasattr(shape, "support"):
        w = shape.support(theta) + shape.support(theta + np.pi)
    else:
        p = as_curve(shape).sample(4 * n)[1]
        proj = p @ unit(theta).T
        w = proj.max(axis=0) - proj.min(axis=0)
    return float(w.min()), float(w.max())


def cmd_curve(args):
    shape = load_shape(args.spec)
    curve = as_curve(shape)
    out = {"type": type(shape).__name__, "period": curve.period, "tag": curve.tag}
    if isinstance(shape, SupportCurve):
        out["convexity_margin"] = shape.convexity_margin
    else:
        t = np.linspace(0, curve.period, 4096, endpoint=False)
        v = curve.d1(t)
        out["min_curvature"] = float(np.min(det2(v, curve.d2(t)) / dot2(v, v) ** 1.5))
    out["rotation_orders"] = rotation_orders(curve, args.kmax)
    out["linear_orders"] = linear_orders(curve, args.kmax)
    out["width_min"], out["width_max"] = _widths(shape)
    out["area"] = curve.area()
    _emit(out, args.out)
    return EXIT_OK


def _system(args):
    shape = load_shape(args.curve)
    body = as_body(load_shape(args.body)) if args.body else None
    if args.system == "minkowski" and body is None:
        body = as_body(shape)
    curve = as_curve(shape)
    return build_system(args.system, curve, body)


def cmd_orbit(args):
    sys_ = _system(args)
    try:
        orbit = periodic_orbit_solve(sys_, args.k, args.r, init=args.init, t0=args.t0,
                                     tol=args.tol, max_iter=args.max_iter)
    except SolverError as exc:
        print(f"solver failed: {exc}", file=sys.stderr)
        print("residual trace: " + " ".join(f"{v:.6e}" for v in exc.trace), file=sys.stderr)
        raise
    rec = orbit.to_dict(sys_)
    rec["system"] = sys_.name
    if args.out and args.out.endswith(".csv"):
        t = orbit.lifted(1)
        write_csv(args.out, ["index", "param", "x", "y", "chord_value"],
                  [np.arange(orbit.k), orbit.params, *sys_.curve.position(orbit.params).T,
                   np.asarray(sys_.S(t[:-1], t[1:]))],
                  [f"system: {sys_.name}", f"k: {orbit.k}, r: {orbit.winding}",
                   f"action: {orbit.action:.17g}", f"residual: {orbit.gradient_residual:.17g}",
                   "units: parameters in the curve's own parametrization, lengths dimensionless"])
        _emit(rec)
    else:
        _emit(rec, args.out)
    return EXIT_OK


def cmd_criteria(args):
    kind = args.kind
    shape = load_shape(args.curve or args.body)
    if kind == "gutkin":
        if not isinstance(shape, SupportCurve):
            raise SpecError("gutkin check needs a support_fourier curve")
        _, dev = cr.gutkin_angle_profile(shape, args.r, args.k, args.samples)
        theory = np.pi * args.r / args.k
        out = {"kind": kind, "r": args.r, "k": args.k, "angle": theory, "deviation": dev,
               "verdict": "constant" if dev < args.tol else "not constant"}
    elif kind in ("outer-fourier", "symplectic-fourier"):
        fn = cr.outer_fourier_check if kind == "outer-fourier" else cr.symplectic_fourier_check
        out = fn(as_curve(shape), args.r, args.k).to_dict()
        out["kind"] = kind
    elif kind == "minkowski":
        out = cr.extra_symmetry_equivalence(as_body(shape), args.k, args.m, args.tol).to_dict()
        out["kind"] = kind
    else:  # pragma: no cover - argparse restricts choices
        raise SpecError(f"unknown criterion {kind!r}")
    _emit(out, args.out)
    return EXIT_OK


def run_examples(rounded=None, lp=4.0, family_eps=0.01, k=4):
    """Polygon orbit perimeters, the L^p constancy failure and a sufficiency family.

    Returns a list of ``(name, passed, detail)``; a group that raises is
    reported as one failed check carrying the error message.
    """
    checks = []

    def perimeters():
        for (name, val), exp in zip(cr.polygon_orbit_perimeters(), cr.PERIMETERS_EXPECTED):
            checks.append((f"perimeter {name}", abs(val - exp) < 1e-9,
                           f"{val:.17g} (expected {exp:g})"))

    def rounded_perimeters():
        for (name, val), exp in zip(cr.polygon_orbit_perimeters(rounded), cr.PERIMETERS_EXPECTED):
            checks.append((f"rounded {rounded:g} {name}", abs(val - exp) < 0.15,
                           f"{val:.17g} (expected {exp:g} within 0.15)"))

    def lp_ball():
        dev, _ = cr.minkowski_constancy(LpBall(lp), k, 1)
        checks.append((f"L^{lp:g} ball constancy fails for k={k}", dev > 1e-2, f"max_dev {dev:.6e}"))

    def family():
        body = SupportBody(SupportCurve(1.0, [0.0] * 7 + [family_eps]))
        fam = cr.construct_invariant_family(body, k, 1)
        checks.append((f"8-fold body (eps {family_eps:g}) invariant family",
                       fam.criticality < 1e-8 and fam.action_spread < 1e-8,
                       f"criticality {fam.criticality:.3e}, action spread {fam.action_spread:.3e}"))

    groups = [("perimeters", perimeters), ("L^p ball", lp_ball), ("invariant family", family)]
    if rounded:
        groups.insert(1, ("rounded perimeters", rounded_perimeters))
    for name, fn in groups:
        try:
            fn()
        except BilliardError as exc:
            checks.append((name, False, f"{type(exc).__name__}: {exc}"))
    return checks


def cmd_examples(args):
    failed = []
    for name, ok, detail in run_examples(args.rounded, args.lp, args.family_eps):
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failed.append(name)
    if failed:
        print("failed checks: " + "; ".join(failed))
        return EXIT_EXAMPLES
    return EXIT_OK


def cmd_plot_data(args):
    what = args.what
    if what == "perimeters":
        rows = cr.polygon_orbit_perimeters(args.rounded)
        exp = cr.PERIMETERS_EXPECTED
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("# gauge perimeters of symmetric polygon orbits\n# columns: name, perimeter, expected\n")
            for (name, val), e in zip(rows, exp):
                fh.write(f"{name},{val:.17g},{e:.17g}\n")
        return EXIT_OK
    shape = load_shape(args.curve)
    n = args.samples
    if what == "curve":
        curve = as_curve(shape)
        t, p = curve.sample(n)
        write_csv(args.out, ["t", "x", "y"], [t, p[:, 0], p[:, 1]],
                  [f"boundary polyline, {n} points", f"parametrization: {curve.tag}",
                   "units: t in the curve parameter (radians for angle parametrizations)"])
    elif what == "angle":
        if not isinstance(shape, SupportCurve):
            raise SpecError("angle profile needs a support_fourier curve")
        d, _ = cr.gutkin_angle_profile(shape, args.r, args.k, n)
        psi = np.arange(n) * (2 * np.pi / n)
        write_csv(args.out, ["psi", "d"], [psi, d(psi)],
                  [f"chord angle profile, r={args.r}, k={args.k}", "units: radians"])
    elif what == "constancy":
        body = as_body(shape)
        B = cr._body_symmetry(body, args.k, args.m)[2]
        t, g = cr.constancy_profile(body, B, n)
        write_csv(args.out, ["t", "gauge"], [t, g],
                  [f"g_K(B gamma - gamma), k={args.k}, m={args.m}",
                   "units: t boundary parameter, gauge dimensionless"])
    elif what == "orbit":
        sys_ = _system(args)
        orbit = periodic_orbit_solve(sys_, args.k, args.r, t0=args.t0, tol=args.tol)
        pts = sys_.curve.position(orbit.params)
        write_csv(args.out, ["param", "x", "y"], [orbit.params, pts[:, 0], pts[:, 1]],
                  [f"{sys_.name} ({args.k}, {args.r}) orbit", f"action: {orbit.action:.17g}"])
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="billiardlab", description="Convex billiards laboratory")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("curve", help="inspect a curve or body spec")
    c.add_argument("spec")
    c.add_argument("--kmax", type=int, default=16)
    c.add_argument("--out")
    c.set_defaults(func=cmd_curve)

    o = sub.add_parser("orbit", help="solve for a (k, r) periodic orbit")
    o.add_argument("--system", choices=SYSTEMS, required=True)
    o.add_argument("--curve", required=True)
    o.add_argument("--body")
    o.add_argument("--k", type=int, required=True)
    o.add_argument("--r", type=int, default=1)
    o.add_argument("--t0", type=float, default=0.0)
    o.add_argument("--init", type=float, nargs="+")
    o.add_argument("--tol", type=float, default=1e-10)
    o.add_argument("--max-iter", type=int, default=100)
    o.add_argument("--out")
    o.set_defaults(func=cmd_orbit)

    q = sub.add_parser("criteria", help="evaluate a rigidity criterion")
    q.add_argument("kind", choices=("gutkin", "outer-fourier", "symplectic-fourier", "minkowski"))
    q.add_argument("--curve")
    q.add_argument("--body")
    q.add_argument("--k", type=int, required=True)
    q.add_argument("--r", type=int, default=1)
    q.add_argument("--m", type=int, default=1)
    q.add_argument("--samples", type=int, default=1024)
    q.add_argument("--tol", type=float, default=1e-8)
    q.add_argument("--out")
    q.set_defaults(func=cmd_criteria)

    e = sub.add_parser("examples", help="run the example suite")
    e.add_argument("--rounded", type=float)
    e.add_argument("--lp", type=float, default=4.0)
    e.add_argument("--family-eps", type=float, default=0.01)
    e.set_defaults(func=cmd_examples)

    d = sub.add_parser("plot-data", help="write CSV data for plots")
    d.add_argument("what", choices=("curve", "orbit", "angle", "constancy", "perimeters"))
    d.add_argument("--curve")
    d.add_argument("--body")
    d.add_argument("--system", choices=SYSTEMS, default="birkhoff")
    d.add_argument("--k", type=int, default=4)
    d.add_argument("--r", type=int, default=1)
    d.add_argument("--m", type=int, default=1)
    d.add_argument("--t0", type=float, default=0.0)
    d.add_argument("--samples", type=int, default=512)
    d.add_argument("--tol", type=float, default=1e-10)
    d.add_argument("--rounded", type=float)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "criteria" and not (args.curve or args.body):
        print("error: criteria needs --curve or --body", file=sys.stderr)
        return EXIT_SPEC
    if args.command == "plot-data" and args.what != "perimeters" and not args.curve:
        print("error: plot-data needs --curve", file=sys.stderr)
        return EXIT_SPEC
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except ConvexityError as exc:
        print(f"convexity error: {exc}", file=sys.stderr)
        return EXIT_CONVEXITY
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (PreconditionError, BandError, SymmetryError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
