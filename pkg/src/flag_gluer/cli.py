"""Command-line front end with stable JSON output.

Exit codes: 0 success / check passed, 1 check failed, 2 usage or parse error,
3 numerical failure.  The FLAG_GLUER_TOL environment variable overrides the
default tolerance of the invoked subcommand.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .edgeface import from_text
from .flags import normal_form, proj_distance
from .geometry import classify
from .monodromy import (CocycleError, PathError, develop, evaluate_path, holonomy,
                        MonodromyComplex, parse_path, verify_cocycle)
from .params import ParamError, ParamSet, params_to_json, parse_params
from .solver import SolveError, SolveOptions, assemble, solve, trace
from .triangulation import Triangulation, TriangulationError, parse_triangulation

SCHEMA = "flag-gluer/1"
CHECK_TOL = 1e-9
SOLVE_TOL = 1e-11


def _env_tol(default: float) -> float:
    raw = os.environ.get("FLAG_GLUER_TOL")
    if raw is None:
        return default
    try:
        return float(raw)
    except ValueError:
        raise UsageError(f"FLAG_GLUER_TOL={raw!r} is not a number")


class UsageError(ValueError):
    pass


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}")


def _load_tri(path: str) -> Triangulation:
    return parse_triangulation(_read(path))


def _load_params(path: str, tri: Triangulation) -> ParamSet:
    return parse_params(_read(path), tri)


def _matrix_doc(m: np.ndarray) -> dict:
    return {"matrix": [float(v) for v in normal_form(m).ravel()], "scale_normalized": True}


def _emit(doc: dict):
    print(json.dumps(doc, indent=2, sort_keys=True))


def _emit_line(doc: dict):
    sys.stdout.write(json.dumps(doc, sort_keys=True) + "\n")
    sys.stdout.flush()


def _parse_pins(pairs) -> dict[str, float]:
    pins = {}
    for raw in pairs or []:
        name, sep, value = raw.rpartition("=")
        if not sep:
            raise UsageError(f"--pin expects NAME=VALUE, got {raw!r}")
        try:
            pins[name.strip()] = float(value)
        except ValueError:
            raise UsageError(f"--pin {raw!r}: value is not a number")
    return pins


def _solve_result_doc(res) -> dict:
    return {
        "status": res.status,
        "residual_norm": res.residual_norm,
        "iterations": res.iterations,
        "jacobian_rank": res.jacobian_rank,
    }


# -- subcommands ---------------------------------------------------------------


def cmd_info(args) -> int:
    tri = _load_tri(args.triangulation)
    doc = {
        "schema": SCHEMA,
        "command": "info",
        "num_tetrahedra": tri.num_tetrahedra,
        "face_classes": [{"id": fc.face_id, "key": fc.key()} for fc in tri.face_classes()],
        "edges": [
            {"id": c.edge_id, "valence": c.valence, "order": c.order,
             "slots": [f"{t}:{s}" for t, s, _ in c.slots]}
            for c in tri.edge_cycles()
        ],
        "cusps": [
            {"id": v.cusp_id, "members": sorted(f"{t}:{vx}" for t, vx in v.members)}
            for v in tri.vertex_classes()
        ],
        "monodromy_counts": MonodromyComplex(tri).counts(),
    }
    _emit(doc)
    return 0


def cmd_check(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(CHECK_TOL)
    tri = _load_tri(args.triangulation)
    ps = _load_params(args.params, tri)
    system = assemble(tri)
    r = system.residual(system.to_vector(ps))
    norm = float(np.linalg.norm(r))
    failing = {name: float(v) for name, v in zip(system.residual_names, r)
               if abs(v) >= tol}
    doc = {
        "schema": SCHEMA,
        "command": "check",
        "tol": tol,
        "passed": norm < tol,
        "residual_norm": norm,
        "residuals": {name: float(v) for name, v in zip(system.residual_names, r)},
        "failing": sorted(failing),
    }
    _emit(doc)
    return 0 if doc["passed"] else 1


def cmd_cocycle(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(CHECK_TOL)
    tri = _load_tri(args.triangulation)
    ps = _load_params(args.params, tri)
    report = verify_cocycle(tri, ps, tol)
    doc = {
        "schema": SCHEMA,
        "command": "cocycle",
        "tol": tol,
        "passed": report.passed,
        "cells": [
            {"cell": list(c.cell), "defect": c.defect, "passed": c.passed}
            for c in report.cells
        ],
        "failing": [list(c.cell) for c in report.failing()],
    }
    _emit(doc)
    return 0 if report.passed else 1


def cmd_solve(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(SOLVE_TOL)
    tri = _load_tri(args.triangulation)
    init = _load_params(args.init, tri) if args.init else None
    system = assemble(tri, _parse_pins(args.pin))
    opts = SolveOptions(tol=tol, max_iter=args.max_iter, seed=args.seed)
    res = solve(system, init, opts)
    doc = {"schema": SCHEMA, "command": "solve", **_solve_result_doc(res),
           "params": params_to_json(res.params, tri)}
    _emit(doc)
    return 0 if res.converged else 3


def cmd_trace(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(SOLVE_TOL)
    tri = _load_tri(args.triangulation)
    init = _load_params(args.init, tri) if args.init else None
    opts = SolveOptions(tol=tol, max_iter=args.max_iter, seed=args.seed)
    result = trace(tri, init, args.pin, args.start, args.stop, args.steps,
                   base_pins=_parse_pins(args.extra_pin), opts=opts)
    for value, res in result.steps:
        _emit_line({"schema": SCHEMA, "command": "trace", "pin": args.pin,
                    "value": value, **_solve_result_doc(res),
                    "params": params_to_json(res.params, tri)})
    if not result.completed:
        print(result.message, file=sys.stderr)
        return 3
    return 0


def cmd_classify(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(1e-8)
    tri = _load_tri(args.triangulation)
    ps = _load_params(args.params, tri)
    entries, uniform = classify(ps, tri, tol)
    tets = []
    for entry in entries:
        doc = {"kind": entry.kind}
        if entry.z is not None:
            doc["z"] = {repr(s): {"re": w.re, "im": w.im, "star": w.star}
                        for s, w in sorted(entry.z.items())}
        if entry.scale is not None:
            doc["scale"] = entry.scale
        if entry.witness is not None:
            doc["witness"] = {"edge_face": repr(entry.witness[0]),
                              "triple_ratio": entry.witness[1]}
        if entry.warning:
            doc["warning"] = entry.warning
        tets.append(doc)
    _emit({"schema": SCHEMA, "command": "classify", "tol": tol,
           "tets": tets, "uniform_kind": uniform})
    return 0


def cmd_holonomy(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(CHECK_TOL)
    tri = _load_tri(args.triangulation)
    ps = _load_params(args.params, tri)
    path = parse_path(args.path)
    g = holonomy(tri, ps, path, tol)
    fixes = (proj_distance(g[:, 0], np.eye(4)[0]) < 1e-7
             and proj_distance(g[1, :], np.eye(4)[1]) < 1e-7)
    _emit({"schema": SCHEMA, "command": "holonomy", "path": str(path),
           **_matrix_doc(g), "fixes_standard_flag": bool(fixes)})
    return 0


def cmd_develop(args) -> int:
    tol = args.tol if args.tol is not None else _env_tol(CHECK_TOL)
    tri = _load_tri(args.triangulation)
    ps = _load_params(args.params, tri)
    tet_s, _, ef_s = args.base.partition(":")
    try:
        base = (int(tet_s), from_text(ef_s))
    except ValueError as exc:
        raise UsageError(f"bad --base {args.base!r}: {exc}")
    placements = develop(tri, ps, base, args.depth, tol)
    doc = {
        "schema": SCHEMA,
        "command": "develop",
        "base": args.base,
        "depth": args.depth,
        "placements": [
            {"copy": p.copy_id,
             "parent": p.parent,
             "tet": p.tet,
             "anchor": repr(p.anchor),
             "transform": _matrix_doc(p.transform),
             "points": [[float(v) for v in normal_form(f.point)] for f in p.flags.flags],
             "planes": [[float(v) for v in normal_form(f.plane)] for f in p.flags.flags]}
            for p in placements
        ],
    }
    _emit(doc)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="flag-gluer",
        description="Build, verify and solve real-projective gluing equations "
                    "for ideally triangulated 3-manifolds.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, params_file=True):
        p = sub.add_parser(name, help=help_)
        p.add_argument("triangulation", help="triangulation file (JSON)")
        if params_file:
            p.add_argument("params", help="parameter file (JSON)")
        p.add_argument("--tol", type=float, default=None)
        p.set_defaults(fn=fn)
        return p

    add("info", cmd_info, "summarize a triangulation", params_file=False)
    add("check", cmd_check, "evaluate all gluing-equation residuals")
    add("cocycle", cmd_cocycle, "verify every 2-cell boundary of the monodromy complex")

    p = add("solve", cmd_solve, "solve the gluing equations", params_file=False)
    p.add_argument("--init", help="initial-guess parameter file")
    p.add_argument("--pin", action="append", metavar="NAME=VALUE",
                   help="fix a variable (repeatable)")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=None,
                   help="enable random restarts with this seed")

    p = add("trace", cmd_trace, "continuation along a pinned variable", params_file=False)
    p.add_argument("--init", help="initial-guess parameter file")
    p.add_argument("--pin", required=True, metavar="NAME", help="variable to sweep")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--steps", type=int, required=True)
    p.add_argument("--extra-pin", action="append", metavar="NAME=VALUE")
    p.add_argument("--max-iter", type=int, default=200)
    p.add_argument("--seed", type=int, default=None)

    add("classify", cmd_classify, "classify tetrahedra into hyperbolic/AdS/half-pipe")

    p = add("holonomy", cmd_holonomy, "holonomy matrix of a loop")
    p.add_argument("--path", required=True,
                   help="loop spec: '<tet>:(ij)k' followed by rot+ rot- flip glue tokens")

    p = add("develop", cmd_develop, "develop tetrahedron copies across faces")
    p.add_argument("--base", default="0:(12)3", help="base vertex '<tet>:(ij)k'")
    p.add_argument("--depth", type=int, default=1)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except (UsageError, TriangulationError, ParamError, PathError, SolveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CocycleError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (np.linalg.LinAlgError, FloatingPointError, OverflowError, ZeroDivisionError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
