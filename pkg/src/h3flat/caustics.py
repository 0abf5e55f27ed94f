"""Focal points, the discrete caustic and the singular sets of parallel surfaces.

Focal points live on vertical edges, where ``lam*alpha < 0`` after
normalization.  Along such an edge the normal geodesics from both endpoints
meet at signed distance ``t = log(|dg| / sqrt(-lam*alpha))``, i.e. on the
parallel surface with ``d* = exp(-t)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dholo import DiscreteHolomorphic
from .errors import DomainError, ModelError, NoIntersectionError
from .frames import MoebiusFrame
from .halg import (ETA, det2, from_hermitian, from_klein, geodesic_point, hdist, hermitian,
                   in_geodesic_plane, klein, minkowski, mnorm2, sym, sym_normal)
from .lattice import HORIZONTAL, Edge, LatticeDomain, canonical_edge, edge_class
from .surfaces import (DiscreteSurface, chart_transfer, edge_lengths, local_view, parallel_surface,
                       relative_frames)

CAUSTIC_P = np.array([[1, 1j], [1j, 1]], dtype=complex) / np.sqrt(2)
COINCIDENCE_TOL = 1e-10
PREDICATE_TOL = 1e-12


def _need_g(surface: DiscreteSurface) -> DiscreteHolomorphic:
    if surface.g is None:
        raise ValueError("surface carries no holomorphic data")
    return surface.g


def _edge_data(surface, edge):
    g = _need_g(surface)
    p, q = canonical_edge(*edge)
    return g, p, q, g[q] - g[p], g.lam_alpha(p, q)


# ------------------------------------------------------------ focal points

def focal_parameter(dg_abs, lam_alpha):
    """Signed focal distance ``t`` with ``sinh t = (|dg|^2 + la) / (sqrt(-4 la) |dg|)``.

    Evaluated through the equivalent closed form ``log(|dg| / sqrt(-la))``.
    """
    dg_abs = np.asarray(dg_abs, dtype=float)
    lam_alpha = np.asarray(lam_alpha, dtype=float)
    if np.any(lam_alpha >= 0):
        raise NoIntersectionError("normal geodesics meet only where lam*alpha < 0")
    return np.log(dg_abs) - 0.5 * np.log(-lam_alpha)


def focal_point(surface: DiscreteSurface, edge: Edge):
    """``(point, t)``: where the normal geodesics of a vertical edge meet."""
    _, p, q, dg, la = _edge_data(surface, edge)
    if la >= 0:
        raise NoIntersectionError(f"edge {(p, q)} has lam*alpha = {la} >= 0")
    t = float(focal_parameter(abs(dg), la))
    return geodesic_point(surface.point(p), surface.normal(p), t), t


def focal_point_from_q(surface: DiscreteSurface, edge: Edge) -> np.ndarray:
    _, p, q, dg, la = _edge_data(surface, edge)
    t = float(focal_parameter(abs(dg), la))
    return geodesic_point(surface.point(q), surface.normal(q), t)


@dataclass
class FocalDistance:
    formula: float
    geometric: float
    parallel: bool


def focal_distance_R31(surface: DiscreteSurface, edge: Edge, tol: float = 1e-12) -> FocalDistance:
    """Distance in R^{3,1} from ``f_p`` to where the normal lines of an edge meet.

    The closed form ``|(|dg|^2 + la) / (|dg|^2 - la)|`` is compared with a
    least-squares intersection of the two lines ``f + s N``.
    """
    _, p, q, dg, la = _edge_data(surface, edge)
    dg2 = abs(dg) ** 2
    denom = dg2 - la
    parallel = abs(denom) <= tol * (dg2 + abs(la))
    formula = float("inf") if parallel else abs((dg2 + la) / denom)
    fp, Np, fq, Nq = surface.point(p), surface.normal(p), surface.point(q), surface.normal(q)
    A = np.column_stack([Np, -Nq])
    sv = np.linalg.svd(A, compute_uv=False)
    if parallel or sv[1] <= tol * sv[0]:
        return FocalDistance(formula, float("inf"), True)
    (s, _), *_ = np.linalg.lstsq(A, fq - fp, rcond=None)
    return FocalDistance(formula, abs(float(s)), False)


def coplanarity_defect(surface: DiscreteSurface, edge: Edge) -> float:
    """Relative smallest singular value of ``[f_p, N_p, f_q, N_q]``.

    Zero iff the two normal geodesics lie in one geodesic plane.
    """
    p, q = canonical_edge(*edge)
    M = np.array([surface.point(p), surface.normal(p), surface.point(q), surface.normal(q)])
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    s = np.linalg.svd(M, compute_uv=False)
    return float(s[3] / s[0])


def coplanarity_check(surface: DiscreteSurface, edge: Edge, tol: float = 1e-9) -> bool:
    return coplanarity_defect(surface, edge) <= tol


# ---------------------------------------------------------------- lifts

def _unimodular(M):
    return M / np.sqrt(det2(M).astype(complex))[..., None, None]


def caustic_scaling(dg, lam_alpha) -> np.ndarray:
    """``diag(sqrt(dg) / (la)^(1/4), (la)^(1/4) / sqrt(dg))`` with principal branches."""
    dg = np.asarray(dg, dtype=complex)
    root4 = np.asarray(lam_alpha, dtype=complex) ** 0.25
    sq = np.sqrt(dg)
    S = np.zeros(dg.shape + (2, 2), dtype=complex)
    S[..., 0, 0] = sq / root4
    S[..., 1, 1] = root4 / sq
    return S


def caustic_lift(E: MoebiusFrame, g: DiscreteHolomorphic, edge: Edge, a: float = 0.5) -> np.ndarray:
    """Frame of the caustic vertex over a vertical edge, weighted by ``(a, 1-a)``."""
    p, q = canonical_edge(*edge)
    la = g.lam_alpha(p, q)
    if not 0 <= a <= 1:
        raise ValueError("a must lie in [0, 1]")
    if la >= 0:
        raise NoIntersectionError(f"edge {(p, q)} has lam*alpha >= 0")
    if abs(la) >= 1:
        raise ValueError("|lam*alpha| must be < 1")
    Ep, Eq = _unimodular(E[p]), _unimodular(E[q])
    return (a * Ep + (1 - a) * Eq) @ caustic_scaling(g[q] - g[p], la) @ CAUSTIC_P


def caustic_lifts(E: MoebiusFrame, g: DiscreteHolomorphic, a: float = 0.5) -> np.ndarray:
    """:func:`caustic_lift` for every vertical edge, shape ``(A, B-1, 2, 2)``."""
    if not 0 <= a <= 1:
        raise ValueError("a must lie in [0, 1]")
    la = g.lam_alpha_v
    if np.any(la >= 0) or np.any(np.abs(la) >= 1):
        raise ValueError("vertical edges need -1 < lam*alpha < 0")
    Et = _unimodular(E.matrices)
    avg = a * Et[:, :-1] + (1 - a) * Et[:, 1:]
    return avg @ caustic_scaling(g.dg_v, la) @ CAUSTIC_P


def caustic_normal(lift: np.ndarray) -> np.ndarray:
    """Normal of the caustic carried by a lift; depends on the weights."""
    return sym_normal(_unimodular(lift))


# ---------------------------------------------------------------- caustic

@dataclass(frozen=True, eq=False)
class Caustic:
    """Caustic points indexed like vertical edges: ``points[i, j]`` sits on
    the edge from index ``(i, j)`` to ``(i, j+1)``."""
    domain: LatticeDomain
    points: np.ndarray
    t_focal: np.ndarray
    normals: np.ndarray | None = None
    a: float = 0.5
    meta: dict = field(default_factory=dict)

    @property
    def d_star(self) -> np.ndarray:
        return np.exp(-self.t_focal)

    def point(self, edge: Edge) -> np.ndarray:
        p, q = canonical_edge(*edge)
        if edge_class(p, q) == HORIZONTAL:
            raise DomainError("caustic points sit on vertical edges")
        return self.points[self.domain.index(p)]


def build_caustic(surface: DiscreteSurface, a: float = 0.5, with_normals: bool = True) -> Caustic:
    g = _need_g(surface)
    if surface.kind != "flat":
        raise ValueError("caustics are defined for flat surfaces")
    t = focal_parameter(np.abs(g.dg_v), g.lam_alpha_v)
    pts = np.cosh(t)[..., None] * surface.f[:, :-1] + np.sinh(t)[..., None] * surface.N[:, :-1]
    normals = None
    if with_normals and surface.frame is not None and np.all(np.abs(g.lam_alpha_v) < 1):
        normals = caustic_normal(caustic_lifts(surface.frame, g, a))
    return Caustic(surface.domain, pts, t, normals, a)


def lift_points(surface: DiscreteSurface, a: float = 0.5) -> np.ndarray:
    """Caustic points as ``sym`` of the lifts (independent of ``a``)."""
    return sym(caustic_lifts(surface.frame, _need_g(surface), a))


# ------------------------------------------------------- local checks

@dataclass
class FocalCheck:
    p_vs_q: float
    equidistance: float
    lift_vs_focal: dict
    tanh_vs_R31: float


def focal_checks(surface: DiscreteSurface, weights=(0.0, 0.5, 1.0)) -> FocalCheck:
    """Worst residuals of the focal-point identities over all vertical edges.

    Every edge is examined in the chart at its lower vertex recentred by the
    focal distance, so the focal point sits near the base point even when
    it is far out along the normal.  The caustic lift is rewritten there as
    ``B(-t) (a I + b E~_p^-1 E~_q) S P``.
    """
    g = _need_g(surface)
    dom = surface.domain
    t = focal_parameter(np.abs(g.dg_v), g.lam_alpha_v)
    pq, eq, r31 = 0.0, 0.0, 0.0
    lifts = {a: 0.0 for a in weights}
    for (i, j) in np.ndindex(t.shape):
        p, q = dom.vertex(i, j), dom.vertex(i, j + 1)
        tp = float(t[i, j])
        (fp, fq), _ = local_view(surface, p, [p, q], anchor_shift=tp)
        (Cp, Cq), _ = local_view(surface, p, [p, q], shifts=tp, anchor_shift=tp)
        pq = max(pq, float(hdist(Cp, Cq)))
        eq = max(eq, abs(float(hdist(Cp, fp)) - abs(tp)), abs(float(hdist(Cp, fq)) - abs(tp)))
        dg = g.dg_v[i, j]
        la = float(g.lam_alpha_v[i, j])
        dg2 = abs(dg) ** 2
        r31 = max(r31, abs(np.tanh(abs(tp)) - abs((dg2 + la) / (dg2 - la))))
        if surface.frame is not None and abs(la) < 1:
            R = relative_frames(surface.frame.matrices, np.array([[i, j]]), np.array([[i, j + 1]]))[0]
            dp, dq = complex(det2(surface.frame[p])), complex(det2(surface.frame[q]))
            R = R * (np.sqrt(dp) / np.sqrt(dq) * np.sqrt(abs(dq / dp)))
            SP = caustic_scaling(dg, la) @ CAUSTIC_P
            back = np.diag([np.exp(-tp / 2), np.exp(tp / 2)])
            for a in weights:
                L = back @ (a * np.eye(2) + (1 - a) * R) @ SP
                lifts[a] = max(lifts[a], float(hdist(sym(L), Cp)))
    return FocalCheck(pq, eq, lifts, r31)


# ------------------------------------------------------------ faces

def _orient(a, b, c):
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def _segments_cross(a, b, c, d, tol):
    """Proper or touching intersection of closed 2D segments ``ab`` and ``cd``."""
    scale = max(np.ptp(np.array([a, b, c, d]), axis=0).max(), 1e-300)
    t = tol * scale ** 2
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if ((o1 > t and o2 < -t) or (o1 < -t and o2 > t)) and ((o3 > t and o4 < -t) or (o3 < -t and o4 > t)):
        return True
    e = tol * scale
    for o, x, (u, v) in ((o1, c, (a, b)), (o2, d, (a, b)), (o3, a, (c, d)), (o4, b, (c, d))):
        if abs(o) <= t and min(u[0], v[0]) - e <= x[0] <= max(u[0], v[0]) + e \
                and min(u[1], v[1]) - e <= x[1] <= max(u[1], v[1]) + e:
            return True
    return False


def plane_frame(k0, k1, k2):
    """Orthonormal 2D frame of the Klein plane through ``k0, k1, k2``."""
    e1 = k1 - k0
    e1 = e1 / np.linalg.norm(e1)
    e2 = k2 - k0 - np.dot(k2 - k0, e1) * e1
    n2 = np.linalg.norm(e2)
    if n2 == 0:
        raise ModelError("points do not span a plane")
    return k0, np.array([e1, e2 / n2])


def plane_coords(points3, origin, basis):
    return (np.asarray(points3) - origin) @ basis.T


def _face_embedded(uv, tol):
    """Simple quadrilateral: no two opposite sides meet."""
    A, B, C, D = (np.asarray(p) for p in uv)
    return not (_segments_cross(A, B, C, D, tol) or _segments_cross(B, C, D, A, tol))


@dataclass
class CausticFace:
    edge: Edge
    vertices: np.ndarray  # (4, 4), in the local chart when a frame is known
    plane_defect: float
    klein_defect: float
    coincident: list
    degenerate: bool
    embedded: bool
    uv: np.ndarray  # 2D coordinates inside the face plane
    plane: tuple = ()  # (origin, basis) of the 2D coordinates in Klein space
    chart: tuple | None = None  # (anchor vertex, shift) of the local chart


def _face_local(surface, t, i, j, d: float | None = None):
    """Face over the horizontal edge at index ``(i, j)``.

    Assembled in the chart at its left vertex ``p``, recentred at the corner
    over the edge above ``p`` so the face sits near the origin.  Returns the
    edge, the chart, the four corners, two auxiliary points spanning the
    plane with corner 3 and, given ``d``, the ends of the edge of ``f^d``.
    """
    dom = surface.domain
    p, q = dom.vertex(i, j), dom.vertex(i + 1, j)
    t0 = float(t[i, j])
    shifts = [t[i, j - 1], t[i + 1, j - 1], t[i + 1, j], t0, t0 + 1.0, t0]
    extra = [] if d is None else [-np.log(d), -np.log(d)]
    pts, _ = local_view(surface, p, [p, q, q, p, p, q] + [p, q][:len(extra)],
                        np.array(shifts + extra, dtype=float), anchor_shift=t0)
    return (p, q), (p, t0), pts[:4], pts[4:6], pts[6:]


def _make_face(edge, verts, aux, chart=None, tol=1e-9):
    K = klein(verts)
    coinc = [(u, v) for u in range(4) for v in range(u + 1, 4)
             if hdist(verts[u], verts[v], tol=1e-6) < COINCIDENCE_TOL]
    sv = np.linalg.svd(K - K.mean(axis=0), compute_uv=False)
    kdef = float(sv[2] / sv[0]) if sv[0] > 0 else 0.0
    if aux is not None:
        origin, basis = plane_frame(K[3], klein(aux[0]), klein(aux[1]))
    else:
        origin = K.mean(axis=0)
        basis = np.linalg.svd(K - origin)[2][:2]
    uv = plane_coords(K, origin, basis)
    embedded = not coinc and _face_embedded(uv, tol)
    return CausticFace(edge, verts, in_geodesic_plane(verts), kdef, coinc, bool(coinc), embedded,
                       uv, (origin, basis), chart)


def caustic_faces(caustic: Caustic, surface: DiscreteSurface | None = None) -> list[CausticFace]:
    """Faces over every interior horizontal edge ``(m, n)-(m+1, n)``.

    Corners: the caustic points over the vertical edges below and above
    ``p`` and ``q``.  Each face carries a geodesic-plane certificate (linear
    rank in R^{3,1} and coplanarity of its Klein images) and an embeddedness
    flag; a collapsed side (triangle) is flagged degenerate and not embedded.
    With ``surface`` the faces are assembled in local charts.
    """
    A, B = caustic.domain.shape
    out = []
    for j in range(1, B - 1):
        for i in range(A - 1):
            if surface is not None:
                edge, chart, verts, aux, _ = _face_local(surface, caustic.t_focal, i, j)
                out.append(_make_face(edge, verts, aux, chart))
            else:
                C = caustic.points
                verts = np.array([C[i, j - 1], C[i + 1, j - 1], C[i + 1, j], C[i, j]])
                edge = (caustic.domain.vertex(i, j), caustic.domain.vertex(i + 1, j))
                out.append(_make_face(edge, verts, None))
    return out


# -------------------------------------------------------------- singular set

def _point_segment(pt, a, b):
    ab = b - a
    L = np.dot(ab, ab)
    s = 0.0 if L == 0 else float(np.clip(np.dot(pt - a, ab) / L, 0, 1))
    return float(np.linalg.norm(pt - (a + s * ab))), s


def _inside_polygon(pt, poly, tol):
    """Nonzero winding test; points within ``tol`` of the boundary count as inside."""
    n = len(poly)
    if any(_point_segment(pt, poly[k], poly[(k + 1) % n])[0] <= tol for k in range(n)):
        return True
    wn = 0
    for k in range(n):
        a, b = poly[k], poly[(k + 1) % n]
        if a[1] <= pt[1]:
            if b[1] > pt[1] and _orient(a, b, pt) > 0:
                wn += 1
        elif b[1] <= pt[1] and _orient(a, b, pt) < 0:
            wn -= 1
    return wn != 0


def _segment_params(A, B, poly, tol):
    """Parameters along ``A + s (B - A)`` where the segment meets polygon sides."""
    out = [0.0, 1.0]
    d = B - A
    n = len(poly)
    for k in range(n):
        c, e = poly[k], poly[(k + 1) % n]
        f = e - c
        den = d[0] * f[1] - d[1] * f[0]
        w = c - A
        if abs(den) > tol * (np.linalg.norm(d) * np.linalg.norm(f) + 1e-300):
            s = (w[0] * f[1] - w[1] * f[0]) / den
            u = (w[0] * d[1] - w[1] * d[0]) / den
            if -tol <= s <= 1 + tol and -tol <= u <= 1 + tol:
                out.append(float(np.clip(s, 0, 1)))
        L = np.dot(d, d)
        for x in (c, e):
            s = np.dot(x - A, d) / L if L > 0 else 0.0
            if -tol <= s <= 1 + tol and np.linalg.norm(A + s * d - x) <= tol * max(1.0, np.sqrt(L)):
                out.append(float(np.clip(s, 0, 1)))
    return sorted(out)


def segment_polygon_pieces(A, B, poly, tol: float = PREDICATE_TOL, min_length: float = 1e-9):
    """Intersection of the closed segment ``AB`` with a closed polygon region.

    Returns ``(intervals, points)`` in the segment parameter: maximal
    parameter intervals inside the region and isolated touching points.
    Intervals shorter than ``min_length`` are reported as points.
    """
    A, B = np.asarray(A, float), np.asarray(B, float)
    poly = [np.asarray(p, float) for p in poly]
    scale = max(np.ptp(np.array(poly + [A, B]), axis=0).max(), 1e-300)
    ptol = tol * scale
    merged = []
    for s in _segment_params(A, B, poly, tol):
        if not merged or s - merged[-1] > 1e-12:
            merged.append(s)
    inside_pt = [_inside_polygon(A + s * (B - A), poly, ptol) for s in merged]
    inside_mid = [_inside_polygon(A + 0.5 * (s0 + s1) * (B - A), poly, ptol)
                  for s0, s1 in zip(merged[:-1], merged[1:])]
    intervals, points = [], []
    cur = None
    for k, s in enumerate(merged):
        if k < len(inside_mid) and inside_mid[k]:
            if cur is None:
                cur = s
            continue
        if cur is not None:
            intervals.append((cur, s))
            cur = None
        elif inside_pt[k]:
            points.append(s)
    short = [iv for iv in intervals if iv[1] - iv[0] < min_length]
    intervals = [iv for iv in intervals if iv[1] - iv[0] >= min_length]
    points += [0.5 * (a + b) for a, b in short]
    return intervals, sorted(points)


@dataclass
class SingularPiece:
    edge: Edge
    s0: float
    s1: float
    local: tuple  # endpoints in the local chart
    points: tuple  # endpoints as raw points of H^3
    chart: tuple | None = None

    @property
    def is_point(self) -> bool:
        return self.s0 == self.s1


@dataclass
class SingularNode:
    point: np.ndarray
    valence: int
    boundary: bool
    chart: tuple | None
    local: np.ndarray


@dataclass
class SingularGraph:
    d: float
    pieces: list[SingularPiece]
    nodes: list[SingularNode]
    coincident_vertices: list
    nonembedded_faces: list
    d_star: np.ndarray

    @property
    def segments(self) -> list[SingularPiece]:
        return [p for p in self.pieces if not p.is_point]

    @property
    def points(self) -> list[SingularPiece]:
        return [p for p in self.pieces if p.is_point]

    @property
    def hypotheses_ok(self) -> bool:
        return not self.coincident_vertices and not self.nonembedded_faces

    @property
    def is_empty(self) -> bool:
        return not self.pieces

    @property
    def is_single_point(self) -> bool:
        return not self.segments and len(self.nodes) == 1

    @property
    def min_valence(self) -> int | None:
        inner = [n.valence for n in self.nodes if not n.boundary]
        return min(inner) if inner else None

    @property
    def valence_status(self) -> str:
        if not self.hypotheses_ok:
            return "skipped: hypotheses violated"
        mv = self.min_valence
        return "pass" if mv is None or mv >= 2 else "fail"


def coincident_adjacent(surface: DiscreteSurface, tol: float = COINCIDENCE_TOL) -> list:
    """Edges whose endpoints coincide (hyperbolic length below ``tol``)."""
    out = []
    dom = surface.domain
    for lengths, step in zip(edge_lengths(surface), ((1, 0), (0, 1))):
        for i, j in np.argwhere(lengths < tol):
            p = dom.vertex(int(i), int(j))
            out.append((p, (p[0] + step[0], p[1] + step[1])))
    return out


class _UnionFind:
    def __init__(self, n):
        self.parent = list(range(n))

    def find(self, a):
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a, b):
        self.parent[self.find(a)] = self.find(b)


def singular_set(surface: DiscreteSurface, caustic: Caustic, d: float,
                 node_tol: float = 1e-8) -> SingularGraph:
    """Singular set ``S_d``: where horizontal edges of ``f^d`` meet caustic faces.

    Each horizontal edge that carries a face is intersected with it inside
    their common geodesic plane, in Klein coordinates of the chart at the
    edge's left vertex (straight geodesics, order-one coordinates).  Piece
    endpoints become nodes, merged across neighbouring faces within
    ``node_tol``; a piece passing through a node adds 2 to its valence.
    Nodes on the outer columns or the outermost caustic edges are marked as
    boundary and left out of the valence statement.
    """
    if not d > 0:
        raise ValueError("d must be positive")
    if surface.kind != "flat":
        raise ValueError("singular sets are defined for flat surfaces")
    dom = surface.domain
    A, B = dom.shape
    fd = parallel_surface(surface, d)
    t = caustic.t_focal
    pieces, cands, nonembedded = [], [], []
    charts = {}
    # candidate: (face index, local point, piece id, boundary flag)
    for j in range(1, B - 1):
        for i in range(A - 1):
            edge, chart, verts, aux, ends_d = _face_local(surface, t, i, j, d)
            charts[(i, j)] = chart
            face = _make_face(edge, verts, aux, chart)
            if not face.embedded:
                nonembedded.append(edge)
            origin, basis = face.plane
            kA, kB = klein(ends_d[0]), klein(ends_d[1])
            a2, b2 = plane_coords([kA, kB], origin, basis)
            intervals, touch = segment_polygon_pieces(a2, b2, face.uv)
            scale = max(np.ptp(face.uv, axis=0).max(), 1e-300)
            for s0, s1 in intervals + [(s, s) for s in touch]:
                ends = []
                for s in (s0, s1):
                    X = from_klein(kA + s * (kB - kA))
                    uv = a2 + s * (b2 - a2)
                    bnd = (s <= 1e-12 and i == 0) or (s >= 1 - 1e-12 and i + 1 == A - 1)
                    if j == 1:
                        bnd |= _point_segment(uv, face.uv[0], face.uv[1])[0] <= 1e-9 * scale
                    if j == B - 2:
                        bnd |= _point_segment(uv, face.uv[2], face.uv[3])[0] <= 1e-9 * scale
                    ends.append((X, bool(bnd)))
                pid = len(pieces)
                raw = tuple(chart_transfer_raw(surface, chart, X) for X, _ in ends)
                pieces.append(SingularPiece(edge, float(s0), float(s1), (ends[0][0], ends[1][0]), raw, chart))
                for X, bnd in (ends if s0 != s1 else ends[:1]):
                    cands.append(((i, j), X, pid, bnd))

    def transfer(src, dst, x):
        if src == dst:
            return x
        (vs, ts), (vd, td) = charts[src], charts[dst]
        return chart_transfer(surface, vs, vd, x, ts, td)

    # merge candidates from the same or neighbouring faces
    uf = _UnionFind(len(cands))
    by_face = {}
    for k, c in enumerate(cands):
        by_face.setdefault(c[0], []).append(k)
    for k, (fi, X, _, _) in enumerate(cands):
        for di in (-1, 0, 1):
            for dj in (-1, 0, 1):
                for l in by_face.get((fi[0] + di, fi[1] + dj), []):
                    if l <= k:
                        continue
                    Y = transfer(cands[l][0], fi, cands[l][1])
                    if hdist(X, Y, tol=1e-6) <= node_tol:
                        uf.union(k, l)
    clusters = {}
    for k in range(len(cands)):
        clusters.setdefault(uf.find(k), []).append(k)

    nodes = []
    for members in clusters.values():
        fi, X = cands[members[0]][0], cands[members[0]][1]
        ends_of = [cands[k][2] for k in members]
        val = 0
        for pid, piece in enumerate(pieces):
            if piece.is_point:
                continue
            val += ends_of.count(pid)
            if pid in ends_of:
                continue
            pi = dom.index(piece.edge[0])
            if abs(pi[0] - fi[0]) > 1 or abs(pi[1] - fi[1]) > 1:
                continue
            Y = transfer(fi, pi, X)
            dist, s = _point_segment(klein(Y), klein(piece.local[0]), klein(piece.local[1]))
            if dist <= node_tol and 0 < s < 1:
                val += 2
        boundary = any(cands[k][3] for k in members)
        nodes.append(SingularNode(chart_transfer_raw(surface, charts[fi], X), val, boundary,
                                  charts[fi], X))
    return SingularGraph(float(d), pieces, nodes, coincident_adjacent(fd), nonembedded, caustic.d_star)


def chart_transfer_raw(surface: DiscreteSurface, chart, x) -> np.ndarray:
    """Point given in a local chart ``(anchor, shift)`` back in raw coordinates."""
    if surface.frame is None or chart is None:
        return np.asarray(x, dtype=float)
    anchor, shift = chart
    M = surface.frame[anchor] @ np.diag([np.exp(shift / 2), np.exp(-shift / 2)])
    return from_hermitian(M @ hermitian(x) @ np.conj(M.T)) / abs(det2(M).real)


# ------------------------------------------------------------ nontangency

@dataclass
class NontangencyReport:
    min_margin: float
    worst_vertex: tuple | None
    margins: dict


def _unit_plane_normal(x, y, z):
    """Spacelike unit vector Minkowski-orthogonal to ``x, y, z``."""
    M = np.array([x, y, z]) * ETA
    M = M / np.linalg.norm(M, axis=1, keepdims=True)
    _, s, vt = np.linalg.svd(M)
    n = vt[3]
    n2 = mnorm2(n)
    if n2 <= 0:
        return None
    return n / np.sqrt(n2)


def normal_nontangency_check(surface: DiscreteSurface) -> NontangencyReport:
    """``|<N_p, n>|`` for every vertex and incident quad, with ``n`` the unit
    normal of the geodesic plane through ``f_p`` and its two quad neighbours."""
    dom = surface.domain
    margins = {}
    for quad in dom.quads:
        for k in range(4):
            p, q, s = quad[k], quad[(k + 1) % 4], quad[(k - 1) % 4]
            (fp, fq, fs), (Np, _, _) = local_view(surface, p, [p, q, s])
            n = _unit_plane_normal(fp, fq, fs)
            m = 0.0 if n is None else abs(float(minkowski(Np, n)))
            margins[(p, quad)] = m
    worst = min(margins, key=margins.get) if margins else None
    return NontangencyReport(margins[worst] if worst else float("nan"),
                             worst, margins)
