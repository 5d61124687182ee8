"""Command-line interface: ``alphaflow {curvature,flow,check,stability,mesh}``.

Exit codes
----------
0  success / Converged / check passed / Stable
1  check failed / stability Inconclusive
2  parse or configuration error
3  inadmissible 3D sphere packing metric
4  flow reached t_end without converging (MaxTime)
5  flow Diverging or LeftAdmissibleRegion
6  too many vertices for subset enumeration
7  stability requested at a metric without constant alpha-curvature
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import flow2d, flow3d, mesh_io, packing2d, packing3d, thurston
from .area_elements import parse_selector
from .errors import (
    AlphaFlowError,
    ComplexError,
    ConfigError,
    InadmissibleMetric,
    LeftAdmissibleRegion,
    MaxStepsExceeded,
    NotConstantCurvature,
    TooManyVertices,
)
from .flow2d import FlowConfig, Verdict

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_CONFIG = 2
EXIT_INADMISSIBLE = 3
EXIT_MAX_TIME = 4
EXIT_DIVERGED = 5
EXIT_TOO_MANY = 6
EXIT_NOT_CONSTANT = 7

_VERDICT_EXIT = {
    Verdict.CONVERGED: EXIT_OK,
    Verdict.MAX_TIME: EXIT_MAX_TIME,
    Verdict.DIVERGING: EXIT_DIVERGED,
    Verdict.LEFT_ADMISSIBLE: EXIT_DIVERGED,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _emit(obj, out=None) -> None:
    text = json.dumps(obj, indent=2, allow_nan=True)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)


def _load(args) -> mesh_io.MeshDocument:
    return mesh_io.read_mesh(args.mesh)


def cmd_curvature(args) -> int:
    doc = _load(args)
    r = doc.radii_or_default()
    if doc.dim == 2:
        st = packing2d.curvature_state(doc.complex, r, args.alpha)
        target = 2.0 * math.pi * doc.complex.euler_characteristic
        total = float(st.K.sum())
        _emit({
            "dim": 2,
            "alpha": args.alpha,
            "radii": r.tolist(),
            "K": st.K.tolist(),
            "R_alpha": st.R_alpha.tolist(),
            "s_alpha": st.s_alpha,
            "gauss_bonnet": {"sum_K": total, "two_pi_chi": target, "ok": abs(total - target) <= 1e-9},
        })
        return EXIT_OK
    cx = doc.complex
    ok, bad = packing3d.admissible_metric_check(cx, r)
    if not ok:
        _emit({"dim": 3, "admissible": False, "offending_tets": [list(t) for t in bad]})
        return EXIT_INADMISSIBLE
    K = packing3d.cr_curvature(cx, r)
    S = float(K @ r)
    _emit({
        "dim": 3,
        "alpha": args.alpha,
        "radii": r.tolist(),
        "admissible": True,
        "K": K.tolist(),
        "R_alpha": (K / r**args.alpha).tolist(),
        "s_alpha": S / float(np.sum(r ** (args.alpha + 1.0))),
        "S": S,
    })
    return EXIT_OK


def _flow_summary(trace, extra=None) -> dict:
    out = {
        "kind": trace.kind,
        "alpha": trace.alpha,
        "verdict": trace.verdict.value,
        "rate": trace.rate,
        "t_final": float(trace.times[-1]),
        "final_residual": trace.final_residual,
        "tol": trace.tol,
        "normalization_factor": trace.normalization,
        trace.conserved_name + "_drift": trace.conserved_drift,
        "final_radii": trace.final_radii.tolist(),
        "accepted_steps": trace.extra.get("n_accepted"),
    }
    out.update(extra or {})
    return out


def cmd_flow(args) -> int:
    doc = _load(args)
    r0 = doc.radii_or_default()
    cfg = FlowConfig(alpha=args.alpha, t_end=args.t_end, tol=args.tol, track_potential=doc.dim == 2)
    if doc.dim == 3:
        if args.area is not None:
            raise ConfigError("--area applies to 2D meshes only")
        if args.prescribed is not None:
            raise ConfigError("--prescribed applies to 2D meshes only")
        if not packing3d.admissible_metric_check(doc.complex, r0)[0]:
            raise InadmissibleMetric("initial metric is not admissible")
        run = flow3d.integrate_gradient_flow_3d if args.gradient else flow3d.integrate_alpha_flow_3d
        try:
            trace = run(doc.complex, r0, cfg)
        except LeftAdmissibleRegion as exc:
            trace = exc.trace
    else:
        if args.gradient:
            raise ConfigError("--gradient applies to 3D meshes only")
        if args.area is not None and args.prescribed is not None:
            raise ConfigError("--area and --prescribed are mutually exclusive")
        if args.prescribed is not None:
            cfg.prescribed = mesh_io.read_vector(args.prescribed, doc.vertex_count, "prescribed curvature")
            trace = flow2d.integrate_modified_flow(doc.complex, r0, cfg)
        elif args.area is not None:
            cfg.area = parse_selector(args.area)
            trace = flow2d.integrate_a_flow(doc.complex, r0, cfg)
        else:
            trace = flow2d.integrate_alpha_flow(doc.complex, r0, cfg)
    if args.out:
        trace.to_csv(args.out)
    _emit(_flow_summary(trace))
    return _VERDICT_EXIT[trace.verdict]


def cmd_check(args) -> int:
    doc = _load(args)
    if doc.dim != 2:
        raise ConfigError("subset checks apply to 2D meshes only")
    kw = {"cap": args.cap, "workers": args.workers}
    if args.mode == "thurston":
        rep = thurston.thurston_condition(doc.complex, **kw)
    elif args.mode == "gexu":
        r = (
            mesh_io.read_vector(args.rstar, doc.vertex_count, "r*")
            if args.rstar
            else doc.radii_or_default()
        )
        if not np.all(r > 0):
            raise ConfigError("r* must be positive")
        rep = thurston.ge_xu_condition(doc.complex, r, args.alpha, **kw)
    else:
        if not args.x:
            raise ConfigError("--mode membership needs --x")
        x = mesh_io.read_vector(args.x, doc.vertex_count, "curvature vector")
        rep = thurston.admissible_curvature_membership(doc.complex, x, **kw)
    _emit(rep.to_dict(records=True), args.out)
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_stability(args) -> int:
    doc = _load(args)
    if doc.dim != 3:
        raise ConfigError("stability analysis applies to 3D meshes only")
    if args.rstar:
        r = mesh_io.read_vector(args.rstar, doc.vertex_count, "r*")
    elif doc.radii is not None:
        r = doc.radii.copy()
    else:
        r = np.full(doc.vertex_count, 1.0 / math.sqrt(doc.vertex_count))
    if not np.all(r > 0):
        raise ConfigError("r* must be positive")
    rep = flow3d.stability_analysis(doc.complex, r, args.alpha)
    _emit(rep.to_dict(), args.out)
    return EXIT_OK if rep.stable else EXIT_FAIL


def cmd_mesh(args) -> int:
    doc = mesh_io.generate(args.name)
    if args.out:
        mesh_io.write_mesh(doc, args.out)
    else:
        print(mesh_io.dumps_mesh(doc), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="alphaflow", description="alpha-curvatures and alpha-flows of circle and sphere packings")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("curvature", help="curvatures of the mesh's metric")
    c.add_argument("mesh")
    c.add_argument("--alpha", type=float, default=0.0)
    c.set_defaults(func=cmd_curvature)

    f = sub.add_parser("flow", help="integrate an alpha-flow")
    f.add_argument("mesh")
    f.add_argument("--alpha", type=float, default=0.0)
    f.add_argument("--t-end", type=float, default=100.0)
    f.add_argument("--tol", type=float, default=1e-10)
    f.add_argument("--area", help="A-flow area element: power:<a>, third or dual (2D)")
    f.add_argument("--prescribed", help="file with a prescribed alpha-curvature (2D modified flow)")
    f.add_argument("--gradient", action="store_true", help="use the normalized gradient flow (3D)")
    f.add_argument("--out", help="CSV trace path")
    f.set_defaults(func=cmd_flow)

    k = sub.add_parser("check", help="subset-condition checks on a 2D mesh")
    k.add_argument("mesh")
    k.add_argument("--mode", choices=("thurston", "gexu", "membership"), default="thurston")
    k.add_argument("--alpha", type=float, default=0.0)
    k.add_argument("--rstar", help="metric for --mode gexu (default: mesh radii)")
    k.add_argument("--x", help="curvature vector for --mode membership")
    k.add_argument("--cap", type=int, default=thurston.DEFAULT_CAP)
    k.add_argument("--workers", type=int, default=1)
    k.add_argument("--out", help="also write the JSON report here")
    k.set_defaults(func=cmd_check)

    s = sub.add_parser("stability", help="linear stability of a constant alpha-curvature 3D metric")
    s.add_argument("mesh")
    s.add_argument("--alpha", type=float, default=0.0)
    s.add_argument("--rstar", help="metric file (default: mesh radii, else equal radii)")
    s.add_argument("--out", help="also write the JSON report here")
    s.set_defaults(func=cmd_stability)

    m = sub.add_parser("mesh", help="write a bundled mesh document")
    m.add_argument("name", choices=mesh_io.BUNDLED)
    m.add_argument("--out")
    m.set_defaults(func=cmd_mesh)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"alphaflow: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InadmissibleMetric as exc:
        print(f"alphaflow: inadmissible metric: {exc}", file=sys.stderr)
        return EXIT_INADMISSIBLE
    except TooManyVertices as exc:
        print(f"alphaflow: {exc}", file=sys.stderr)
        return EXIT_TOO_MANY
    except NotConstantCurvature as exc:
        print(f"alphaflow: not a constant-curvature metric: {exc}", file=sys.stderr)
        return EXIT_NOT_CONSTANT
    except MaxStepsExceeded as exc:
        print(f"alphaflow: {exc}", file=sys.stderr)
        return EXIT_MAX_TIME
    except (ConfigError, ComplexError, AlphaFlowError, ValueError) as exc:
        print(f"alphaflow: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
