"""Command-line front end: ``h3flat gen | family | caustic | singular | verify | export``."""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .caustics import build_caustic, caustic_faces, focal_checks, singular_set
from .checks import default_tol, valence_suite, verify_surface
from .dholo import gen_exp, gen_linear, gen_power, normalize
from .errors import H3FlatError
from .fixtures import evaluate, fixture_names, load_fixture
from .frames import dress_weingarten, integrate_E, integrate_F
from .io import (Mesh, caustic_mesh, jsonable, obj_text, points_from_document, project,
                 read_json, surface_document, surface_from_document, surface_mesh, write_json)
from .lattice import build_domain
from .surfaces import build_surface, parallel_surface


# ------------------------------------------------------------ flag parsing

def parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from None


def parse_real(text: str) -> float:
    return float(parse_fraction(text))


def parse_complex(text: str) -> complex:
    """``0.3i``, ``1+2i``, ``2`` or a symbolic expression such as ``3*I/10``."""
    s = text.strip().replace(" ", "")
    try:
        return complex(s.replace("i", "j")) if s else complex("")
    except ValueError:
        pass
    try:
        return evaluate(s)
    except Exception:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def parse_size(text: str) -> tuple[int, int]:
    """``15`` or ``20x40``: vertex counts along m and n."""
    parts = text.lower().split("x")
    try:
        dims = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad size {text!r}") from None
    if len(dims) == 1:
        dims = dims * 2
    if len(dims) != 2 or min(dims) < 1:
        raise argparse.ArgumentTypeError(f"bad size {text!r}")
    return dims


def parse_list(text: str) -> list[float]:
    return [parse_real(x) for x in text.split(",") if x.strip()]


# ------------------------------------------------------------- generation

def make_function(kind: str, args):
    lam = float(args.lam) if args.lam is not None else None
    if kind.startswith("fixture:"):
        return load_fixture(kind.split(":", 1)[1], lam)
    lam = 0.01 if lam is None else lam
    a, b = args.size or (15, 15)
    if kind == "linear":
        return gen_linear(args.c if args.c is not None else 1.0, build_domain(0, a - 1, 0, b - 1), lam)
    if kind == "exp":
        if args.c is None:
            raise ValueError("exp needs --c")
        return gen_exp(args.c, build_domain(0, a - 1, 0, b - 1), lam)
    if kind == "power":
        if args.gamma is None:
            raise ValueError("power needs --gamma")
        return gen_power(args.gamma, a - 1, b - 1, lam, method=args.method)
    raise ValueError(f"unknown kind {kind!r}; use linear, exp, power or fixture:<name> "
                     f"({', '.join(fixture_names())})")


def generate(kind: str, args):
    g = normalize(make_function(kind, args))
    t = float(args.t)
    if t == 0:
        frame = integrate_E(g)
    elif t == 1:
        frame = integrate_F(g)
    else:
        frame = dress_weingarten(integrate_E(g), g, t)
    generator = {"kind": kind, "lambda": g.lam, "t": t}
    if args.c is not None:
        generator["c"] = args.c
    if args.gamma is not None:
        generator["gamma"] = str(args.gamma)
    if args.size is not None:
        generator["size"] = list(args.size)
    return build_surface(frame, g), generator


def _load_surface(path):
    return surface_from_document(read_json(path))


# --------------------------------------------------------------- commands

def cmd_gen(args) -> int:
    surface, generator = generate(args.kind, args)
    write_json(surface_document(surface, generator), args.output)
    return 0


def _family_member(doc: dict, mode: str, value: float) -> dict:
    surface = surface_from_document(doc, validate=False)
    if surface.kind != "flat" or surface.frame is None or surface.g is None:
        raise ValueError("family sweeps need a flat document with frame and g")
    if mode == "t":
        if value == 0:
            member = build_surface(surface.frame, surface.g)
        elif value == 1:
            member = build_surface(integrate_F(surface.g), surface.g)
        else:
            member = build_surface(dress_weingarten(surface.frame, surface.g, value), surface.g)
    else:
        member = parallel_surface(surface, value)
    return surface_document(member, {**doc.get("generator", {}), mode: value})


def cmd_family(args) -> int:
    if (args.t is None) == (args.d is None):
        raise ValueError("give exactly one of --t and --d")
    mode, values = ("t", args.t) if args.t is not None else ("d", args.d)
    doc = read_json(args.document)
    surface_from_document(doc)  # validates
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            docs = list(pool.map(_family_member, [doc] * len(values), [mode] * len(values), values))
    else:
        docs = [_family_member(doc, mode, v) for v in values]
    stem = Path(args.document).stem
    for v, member in zip(values, docs):
        path = out_dir / f"{stem}_{mode}{v:g}.json"
        write_json(member, path)
        print(path)
    return 0


def caustic_document(surface, a: float) -> dict:
    caustic = build_caustic(surface, a)
    faces = caustic_faces(caustic, surface)
    fc = focal_checks(surface)
    return jsonable({
        "format_version": 1, "type": "caustic", "a": a,
        "domain": [surface.domain.m_lo, surface.domain.m_hi, surface.domain.n_lo, surface.domain.n_hi],
        "points": caustic.points, "t_focal": caustic.t_focal, "d_star": caustic.d_star,
        "faces": [{"edge": f.edge, "plane_defect": f.plane_defect, "degenerate": f.degenerate,
                   "embedded": f.embedded} for f in faces],
        "checks": {"p_vs_q": fc.p_vs_q, "equidistance": fc.equidistance,
                   "lift_vs_focal": {str(k): v for k, v in fc.lift_vs_focal.items()},
                   "tanh_vs_R31": fc.tanh_vs_R31},
    })


def cmd_caustic(args) -> int:
    write_json(caustic_document(_load_surface(args.document), args.a), args.output)
    return 0


def singular_document(surface, d: float) -> dict:
    caustic = build_caustic(surface, with_normals=False)
    graph = singular_set(surface, caustic, d)
    return jsonable({
        "format_version": 1, "type": "singular_set", "d": d,
        "segments": [{"edge": p.edge, "s": [p.s0, p.s1], "points": p.points} for p in graph.segments],
        "points": [{"edge": p.edge, "s": p.s0, "point": p.points[0]} for p in graph.points],
        "nodes": [{"point": n.point, "valence": n.valence, "boundary": n.boundary} for n in graph.nodes],
        "coincident_vertices": graph.coincident_vertices,
        "nonembedded_faces": graph.nonembedded_faces,
        "hypotheses_ok": graph.hypotheses_ok,
        "suites": {"valence": valence_suite(graph)},
    })


def cmd_singular(args) -> int:
    doc = singular_document(_load_surface(args.document), args.d)
    write_json(doc, args.output)
    status = doc["suites"]["valence"]["status"]
    print(f"valence: {status}", file=sys.stderr)
    return 1 if status == "fail" else 0


def cmd_verify(args) -> int:
    tol = args.tol if args.tol is not None else default_tol()
    report = verify_surface(_load_surface(args.document), tol, d=args.d)
    print(json.dumps(jsonable(report), indent=2))
    return 0 if report["ok"] else 1


def cmd_export(args) -> int:
    doc = read_json(args.document)
    if doc.get("type") == "points":
        pts = points_from_document(doc)
        Path(args.output).write_text(obj_text([Mesh("points", project(pts, args.model))]))
        return 0
    surface = surface_from_document(doc)
    meshes = [surface_mesh(surface, args.model)]
    if args.with_caustic:
        caustic = build_caustic(surface, with_normals=False)
        meshes.append(caustic_mesh(caustic, caustic_faces(caustic, surface), args.model))
    Path(args.output).write_text(obj_text(meshes))
    return 0


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="h3flat", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a surface document")
    p.add_argument("kind", help="linear, exp, power or fixture:<name>")
    p.add_argument("--c", type=parse_complex)
    p.add_argument("--gamma", type=parse_fraction)
    p.add_argument("--size", type=parse_size)
    p.add_argument("--lambda", dest="lam", type=parse_real)
    p.add_argument("--t", type=parse_real, default=0.0, help="Weingarten parameter (0 flat, 1 CMC-1)")
    p.add_argument("--method", choices=("columns", "quad"), default="columns")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("family", help="Weingarten or parallel sweep of a flat document")
    p.add_argument("document")
    p.add_argument("--t", type=parse_list)
    p.add_argument("--d", type=parse_list)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--jobs", type=int, default=1)
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("caustic", help="caustic document of a flat surface")
    p.add_argument("document")
    p.add_argument("-a", type=parse_real, default=0.5, help="lift weight in [0, 1]")
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_caustic)

    p = sub.add_parser("singular", help="singular set of a parallel surface")
    p.add_argument("document")
    p.add_argument("--d", type=parse_real, required=True)
    p.add_argument("-o", "--output", default="-")
    p.set_defaults(func=cmd_singular)

    p = sub.add_parser("verify", help="run every invariant suite")
    p.add_argument("document")
    p.add_argument("--tol", type=parse_real)
    p.add_argument("--d", type=parse_real, help="also run the valence suite at this d")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("export", help="OBJ mesh in the Poincare or Klein model")
    p.add_argument("document")
    p.add_argument("--model", choices=("poincare", "klein"), default="poincare")
    p.add_argument("--with-caustic", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_export)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (H3FlatError, ValueError, OSError, ZeroDivisionError) as exc:
        print(f"h3flat {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
