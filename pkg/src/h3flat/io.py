"""JSON documents and OBJ export.

Floats are written with ``repr``, the shortest string that parses back to
the same double, so a write/read cycle is bit-exact.  Complex numbers are
stored as ``[re, im]`` pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .dholo import DiscreteHolomorphic
from .errors import H3FlatError
from .frames import MoebiusFrame
from .halg import check_hpoint, klein, poincare
from .lattice import build_domain
from .surfaces import DiscreteSurface

FORMAT_VERSION = 1


class DocumentError(H3FlatError):
    """A document does not match the schema."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


def _c(a) -> list:
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def _uc(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 0] + 1j * x[..., 1]


def jsonable(v):
    if isinstance(v, dict):
        return {str(k): jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [jsonable(x) for x in v]
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, np.generic):
        return jsonable(v.item())
    if isinstance(v, np.ndarray):
        return jsonable(v.tolist())
    if isinstance(v, (str, int, float, bool)) or v is None:
        return v
    return str(v)


# ------------------------------------------------------------------ schema

@lru_cache(maxsize=None)
def surface_schema() -> dict:
    with resources.files("h3flat").joinpath("data/surface.schema.json").open() as fh:
        return json.load(fh)


def validate_document(doc: dict) -> None:
    """Raise :class:`DocumentError` naming the offending field."""
    validator = jsonschema.Draft202012Validator(surface_schema())
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        path = "/" + "/".join(str(p) for p in e.absolute_path)
        raise DocumentError(path, e.message)
    a, b = _shape(doc["domain"])
    for key, shape in (("g", (a, b, 2)), ("vertices", (a, b, 4)), ("normals", (a, b, 4)),
                       ("frame", (a, b, 2, 2, 2)), ("alpha_h", (a - 1,)), ("alpha_v", (b - 1,))):
        if key in doc and doc[key] is not None and np.shape(doc[key]) != shape:
            raise DocumentError(f"/{key}", f"shape {np.shape(doc[key])} does not match domain {shape}")


POINTS_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "PointsDocument",
    "type": "object",
    "required": ["format_version", "type", "vertices"],
    "properties": {
        "format_version": {"const": FORMAT_VERSION},
        "type": {"const": "points"},
        "vertices": {"type": "array", "minItems": 1, "items": {
            "type": "array", "items": {"type": "number"}, "minItems": 4, "maxItems": 4}},
    },
}


def points_from_document(doc: dict) -> np.ndarray:
    """Vertices of a bare point list (no lattice), e.g. the base point alone."""
    errors = sorted(jsonschema.Draft202012Validator(POINTS_SCHEMA).iter_errors(doc),
                    key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise DocumentError("/" + "/".join(str(p) for p in e.absolute_path), e.message)
    pts = np.asarray(doc["vertices"], dtype=float)
    try:
        check_hpoint(pts)
    except H3FlatError as exc:
        raise DocumentError("/vertices", str(exc)) from None
    return pts


def _shape(domain):
    m_lo, m_hi, n_lo, n_hi = domain
    return m_hi - m_lo + 1, n_hi - n_lo + 1


# ---------------------------------------------------------------- surfaces

def surface_document(surface: DiscreteSurface, generator: dict | None = None) -> dict:
    dom = surface.domain
    doc = {
        "format_version": FORMAT_VERSION,
        "type": "surface",
        "generator": jsonable(generator or {}),
        "domain": [dom.m_lo, dom.m_hi, dom.n_lo, dom.n_hi],
        "kind": surface.kind,
        "lambda": surface.lam,
        "vertices": surface.f.tolist(),
        "normals": surface.N.tolist(),
        "meta": jsonable({"t": surface.t, "d": surface.d, **surface.meta}),
    }
    if surface.g is not None:
        doc["g"] = _c(surface.g.values)
        doc["alpha_h"] = surface.g.alpha_h.tolist()
        doc["alpha_v"] = surface.g.alpha_v.tolist()
        doc["rotated"] = bool(surface.g.rotated)
    if surface.frame is not None:
        doc["frame"] = _c(surface.frame.matrices)
        doc["frame_kind"] = surface.frame.kind
    return doc


def surface_from_document(doc: dict, validate: bool = True) -> DiscreteSurface:
    if validate:
        validate_document(doc)
    dom = build_domain(*doc["domain"])
    lam = float(doc["lambda"])
    meta = dict(doc.get("meta", {}))
    t, d = float(meta.pop("t", 0.0)), float(meta.pop("d", 1.0))
    g = None
    if doc.get("g") is not None:
        g = DiscreteHolomorphic(dom, _uc(doc["g"]), doc["alpha_h"], doc["alpha_v"], lam,
                                bool(doc.get("rotated", False)), meta=dict(doc.get("generator", {})))
    frame = None
    if doc.get("frame") is not None:
        kind = doc.get("frame_kind", "E")
        frame = MoebiusFrame(dom, _uc(doc["frame"]), kind, lam, t=t if kind == "W" else None,
                             meta={"d": d} if d != 1.0 else {})
    return DiscreteSurface(dom, np.asarray(doc["vertices"], dtype=float),
                           np.asarray(doc["normals"], dtype=float), doc["kind"], lam, t=t, d=d,
                           frame=frame, g=g, meta=meta)


def write_json(doc: dict, path) -> None:
    text = json.dumps(doc, allow_nan=True)
    if path in (None, "-"):
        print(text)
    else:
        Path(path).write_text(text)


def read_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise DocumentError("/", f"not valid JSON ({exc})") from None


# -------------------------------------------------------------------- OBJ

@dataclass
class Mesh:
    """Projected vertices and faces of one OBJ object.

    ``faces`` are quads or triangles (index tuples into ``vertices``);
    ``flags`` holds per-face labels such as ``degenerate``.
    """
    name: str
    vertices: np.ndarray
    faces: list = field(default_factory=list)
    flags: list = field(default_factory=list)
    diagonal: str = "p-r"

    def triangles(self):
        """Quads split along their first-third corner diagonal."""
        out = []
        for f in self.faces:
            if len(f) == 4:
                out += [(f[0], f[1], f[2]), (f[0], f[2], f[3])]
            else:
                out.append(tuple(f))
        return out


def project(points, model: str) -> np.ndarray:
    if model == "poincare":
        return poincare(points)
    if model == "klein":
        return klein(points)
    raise ValueError("model must be 'poincare' or 'klein'")


def surface_mesh(surface: DiscreteSurface, model: str = "poincare", name: str = "surface") -> Mesh:
    a, b = surface.domain.shape
    verts = project(surface.f.reshape(-1, 4), model)

    def idx(i, j):
        return i * b + j

    faces = [(idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1))
             for i in range(a - 1) for j in range(b - 1)]
    return Mesh(name, verts, faces, [[] for _ in faces])


def caustic_mesh(caustic, faces, model: str = "poincare", name: str = "caustic") -> Mesh:
    """Mesh of the caustic points; ``faces`` comes from :func:`caustic_faces`."""
    a, b = caustic.points.shape[:2]
    verts = project(caustic.points.reshape(-1, 4), model)
    dom = caustic.domain
    out, flags = [], []
    for face in faces:
        i, j = dom.index(face.edge[0])
        corners = [(i, j - 1), (i + 1, j - 1), (i + 1, j), (i, j)]
        ids = [u * b + v for u, v in corners]
        fl = []
        if face.degenerate:
            fl.append("degenerate")
            # drop collapsed corners
            keep = [k for k in range(4) if not any(k == v for _, v in face.coincident)]
            ids = [ids[k] for k in keep]
        if not face.embedded:
            fl.append("nonembedded")
        if len(ids) >= 3:
            out.append(tuple(ids))
            flags.append(fl)
    return Mesh(name, verts, out, flags)


def obj_text(meshes) -> str:
    """ASCII OBJ with one ``o`` block per mesh; ``%.17g`` coordinates."""
    lines = ["# quads split along the p-r diagonal"]
    offset = 1
    for mesh in meshes:
        lines.append(f"o {mesh.name}")
        for x, y, z in np.asarray(mesh.vertices, dtype=float).reshape(-1, 3):
            lines.append(f"v {x:.17g} {y:.17g} {z:.17g}")
        for tri in mesh.triangles():
            lines.append("f " + " ".join(str(k + offset) for k in tri))
        offset += len(mesh.vertices)
    return "\n".join(lines) + "\n"


def write_obj(meshes, path) -> None:
    Path(path).write_text(obj_text(meshes))


def read_obj_vertices(text: str) -> np.ndarray:
    rows = [ln.split()[1:4] for ln in text.splitlines() if ln.startswith("v ")]
    return np.array(rows, dtype=float).reshape(-1, 3)
