"""Discrete surfaces assembled from frames, and the checks run on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dholo import DiscreteHolomorphic
from .errors import CoincidentVerticesError, ModelError
from .frames import MoebiusFrame, parallel_frame
from .halg import (BASE_POINT, ETA, common_basis, from_hermitian, hdist, minkowski,
                   mnorm2, plane_basis, poincare, signed_area, sym, sym_normal)
from .lattice import LatticeDomain, Quad, Vertex

KIND_BY_FRAME = {"E": "flat", "F": "cmc1", "W": "weingarten"}
# floor for quad sizes near the origin of the power function
ABS_FLOOR = 1e-13


@dataclass(frozen=True, eq=False)
class DiscreteSurface:
    domain: LatticeDomain
    f: np.ndarray
    N: np.ndarray
    kind: str
    lam: float
    t: float = 0.0
    d: float = 1.0
    frame: MoebiusFrame | None = None
    g: DiscreteHolomorphic | None = None
    meta: dict = field(default_factory=dict)

    def point(self, v: Vertex) -> np.ndarray:
        return self.f[self.domain.index(v)]

    def normal(self, v: Vertex) -> np.ndarray:
        return self.N[self.domain.index(v)]

    def quad_points(self, quad: Quad, which: str = "f") -> np.ndarray:
        arr = self.f if which == "f" else self.N
        return np.array([arr[self.domain.index(v)] for v in quad])

    def model_residual(self) -> float:
        """Worst violation of <f,f>=-1, <N,N>=1, <f,N>=0 relative to |f|^2."""
        scale = np.sum(self.f ** 2, axis=-1)
        res = np.maximum.reduce([np.abs(mnorm2(self.f) + 1), np.abs(mnorm2(self.N) - 1),
                                 np.abs(minkowski(self.f, self.N))])
        return float(np.max(res / scale))


def build_surface(frame: MoebiusFrame, g: DiscreteHolomorphic | None = None, **meta) -> DiscreteSurface:
    """``f = M M^dagger / det M`` and ``N = M diag(1,-1) M^dagger / det M`` vertexwise.

    ``g`` is kept for the caustic computations, which need ``dg`` and the weights.
    """
    M = frame.matrices
    t = {"E": 0.0, "F": 1.0}.get(frame.kind, frame.t)
    return DiscreteSurface(frame.domain, sym(M), sym_normal(M), KIND_BY_FRAME[frame.kind],
                           frame.lam, t=t, d=frame.meta.get("d", 1.0), frame=frame, g=g,
                           meta={**frame.meta, **meta})


def parallel_surface(surface: DiscreteSurface, d: float) -> DiscreteSurface:
    """Parallel surface at signed distance ``-log d`` along the normal."""
    if surface.kind != "flat":
        raise ValueError("parallel surfaces are defined for flat surfaces")
    if not d > 0:
        raise ValueError("d must be positive")
    ch, sh = np.cosh(np.log(d)), np.sinh(np.log(d))
    g = surface.g.scaled(d) if surface.g is not None else None
    frame = parallel_frame(surface.frame, d) if surface.frame is not None else None
    return DiscreteSurface(surface.domain, ch * surface.f - sh * surface.N,
                           ch * surface.N - sh * surface.f, "flat", surface.lam,
                           d=surface.d * d, frame=frame, g=g, meta={**surface.meta, "d": surface.d * d})


# ------------------------------------------------------------ local charts
#
# Far from the base point the coordinates of f grow like exp(distance) and
# differences of nearby points cancel badly.  A chart anchored at a vertex
# applies the inverse frame there, so the anchor sits at the base point and
# its normal at the base normal; everything nearby has coordinates of order
# one.  Relative frames are formed in extended precision.

def _boost(t):
    # diag(e^{t/2}, e^{-t/2}) moves the base point a distance t along the base normal
    t = np.asarray(t, dtype=np.longdouble)
    out = np.zeros(t.shape + (2, 2), dtype=np.clongdouble)
    out[..., 0, 0], out[..., 1, 1] = np.exp(t / 2), np.exp(-t / 2)
    return out


def _relative_ext(M, anchors, targets, anchor_shift=0.0, shifts=0.0):
    """``B(-anchor_shift) M[anchor]^-1 M[target] B(shift)`` in extended precision,
    scaled to ``|det| = 1``."""
    M = np.asarray(M)
    A = M[tuple(np.moveaxis(np.asarray(anchors), -1, 0))].astype(np.clongdouble)
    B = M[tuple(np.moveaxis(np.asarray(targets), -1, 0))].astype(np.clongdouble)
    R = _boost(-np.asarray(anchor_shift)) @ _inv2(A) @ B @ _boost(shifts)
    scale = np.sqrt(np.abs(R[..., 0, 0] * R[..., 1, 1] - R[..., 0, 1] * R[..., 1, 0]))
    return R / scale[..., None, None]


def relative_frames(M, anchors, targets) -> np.ndarray:
    """``M[anchor]^-1 M[target]`` for index arrays of shape ``(..., 2)``."""
    return _relative_ext(M, anchors, targets).astype(complex)


def _sym_ext(R, sign: int = 1) -> np.ndarray:
    # M diag(1, sign) M^dagger for unimodular M, kept in long double until the end
    a = np.abs(R[..., 0, 0]) ** 2 + sign * np.abs(R[..., 0, 1]) ** 2
    d = np.abs(R[..., 1, 0]) ** 2 + sign * np.abs(R[..., 1, 1]) ** 2
    off = R[..., 0, 0] * np.conj(R[..., 1, 0]) + sign * R[..., 0, 1] * np.conj(R[..., 1, 1])
    x = np.stack([(a + d) / 2, off.real, off.imag, (a - d) / 2], axis=-1)
    return x.astype(float)


def local_view(surface: DiscreteSurface, anchor: Vertex, vertices, shifts=0.0,
               anchor_shift: float = 0.0):
    """``(f, N)`` of ``vertices`` in the chart anchored at ``anchor``.

    With ``shifts`` the points are moved that far along their normals,
    ``cosh(s) f + sinh(s) N``; ``anchor_shift`` recentres the chart at the
    point that far along the anchor's normal.  Without a frame the raw
    coordinates are returned.
    """
    idx = np.array([surface.domain.index(v) for v in vertices])
    shifts = np.broadcast_to(np.asarray(shifts, dtype=float), (len(idx),))
    if surface.frame is None:
        f, N = surface.f[idx[:, 0], idx[:, 1]], surface.N[idx[:, 0], idx[:, 1]]
        ch, sh = np.cosh(shifts)[:, None], np.sinh(shifts)[:, None]
        return ch * f + sh * N, ch * N + sh * f
    a = np.broadcast_to(np.array(surface.domain.index(anchor)), idx.shape)
    R = _relative_ext(surface.frame.matrices, a, idx, anchor_shift, shifts)
    return _sym_ext(R), _sym_ext(R, -1)


def chart_transfer(surface: DiscreteSurface, src: Vertex, dst: Vertex, x,
                   src_shift: float = 0.0, dst_shift: float = 0.0) -> np.ndarray:
    """Re-express points ``x`` given in the chart at ``src`` in the chart at ``dst``."""
    x = np.asarray(x, dtype=float)
    if surface.frame is None:
        return x
    i = np.array([surface.domain.index(dst)])
    j = np.array([surface.domain.index(src)])
    R = _relative_ext(surface.frame.matrices, i, j, dst_shift, src_shift)[0]
    X = R @ _ext_hermitian(x) @ np.conj(np.swapaxes(R, -1, -2))
    return from_hermitian(X.astype(complex))


def edge_lengths(surface: DiscreteSurface):
    """Hyperbolic lengths of all horizontal and vertical edges, via local charts."""
    if surface.frame is None:
        return hdist(surface.f[:-1], surface.f[1:]), hdist(surface.f[:, :-1], surface.f[:, 1:])
    a, b = surface.domain.shape
    I, J = np.meshgrid(np.arange(a), np.arange(b), indexing="ij")
    idx = np.stack([I, J], axis=-1)
    out = []
    for sl0, sl1 in (((slice(None, -1), slice(None)), (slice(1, None), slice(None))),
                     ((slice(None), slice(None, -1)), (slice(None), slice(1, None)))):
        R = relative_frames(surface.frame.matrices, idx[sl0], idx[sl1])
        x = sym(R)
        out.append(2 * np.arcsinh(np.sqrt(np.maximum(mnorm2(x - np.array([1.0, 0, 0, 0])), 0)) / 2))
    return tuple(out)


def frame_distance(frame_a: MoebiusFrame, frame_b: MoebiusFrame) -> np.ndarray:
    """Vertexwise distance between the points of two frames on one domain.

    Uses ``frame_a^-1 frame_b`` so the result keeps full accuracy far from
    the base point, where the raw coordinates have cancelled.
    """
    A = frame_a.matrices.astype(np.clongdouble)
    R = _inv2(A) @ frame_b.matrices.astype(np.clongdouble)
    R = R / np.sqrt(np.abs(R[..., 0, 0] * R[..., 1, 1] - R[..., 0, 1] * R[..., 1, 0]))[..., None, None]
    x = _sym_ext(R)
    return 2 * np.arcsinh(np.sqrt(np.maximum(mnorm2(x - BASE_POINT), 0)) / 2)


# ----------------------------------------------------------- concircularity

def _quad_arrays(arr):
    return arr[:-1, :-1], arr[1:, :-1], arr[1:, 1:], arr[:-1, 1:]


def _inv2(A):
    B = np.empty_like(A)
    B[..., 0, 0], B[..., 1, 1] = A[..., 1, 1], A[..., 0, 0]
    B[..., 0, 1], B[..., 1, 0] = -A[..., 0, 1], -A[..., 1, 0]
    return B / (A[..., 0, 0] * A[..., 1, 1] - A[..., 0, 1] * A[..., 1, 0])[..., None, None]


def _ext_hermitian(x):
    # hermitian() in extended precision so that nearly cancelling
    # differences of far-away points keep a few more digits
    x = np.asarray(x).astype(np.longdouble)
    out = np.empty(x.shape[:-1] + (2, 2), dtype=np.clongdouble)
    out[..., 0, 0] = x[..., 0] + x[..., 3]
    out[..., 1, 1] = x[..., 0] - x[..., 3]
    out[..., 0, 1] = x[..., 1] + 1j * x[..., 2]
    out[..., 1, 0] = x[..., 1] - 1j * x[..., 2]
    return out


def hermitian_cross_ratio(HP, HQ, HR, HS) -> np.ndarray:
    """``(Q-P)(R-Q)^-1(S-R)(P-S)^-1`` for Hermitian matrices."""
    return (HQ - HP) @ _inv2(HR - HQ) @ (HS - HR) @ _inv2(HP - HS)


def matrix_cross_ratio(P, Q, R, S) -> np.ndarray:
    """Matrix cross ratio of four points given as Minkowski 4-vectors."""
    return hermitian_cross_ratio(*(_ext_hermitian(x) for x in (P, Q, R, S))).astype(complex)


def _real_multiple_defect(C):
    mu = (C[..., 0, 0] + C[..., 1, 1]) / 2
    off = (C - mu[..., None, None] * np.eye(2)).astype(complex)
    mu = mu.astype(complex)
    return np.linalg.norm(off, axis=(-2, -1)) / np.abs(mu) + np.abs(mu.imag) / np.abs(mu)


def _coincidence_mask(P, Q, R, S):
    pts = (P, Q, R, S)
    pairs = [(a, b) for i, a in enumerate(pts) for b in pts[i + 1:]]
    diam = np.max([np.linalg.norm(a - b, axis=-1) for a, b in pairs], axis=0)
    gaps = np.min([np.linalg.norm(a - b, axis=-1) for a, b in pairs], axis=0)
    return gaps <= np.maximum(1e-10 * diam, ABS_FLOOR), diam


def cross_ratio_defect_array(P, Q, R, S) -> np.ndarray:
    """Deviation of the matrix cross ratio from a real multiple of I.

    NaN marks quads with coincident vertices.
    """
    bad, _ = _coincidence_mask(P, Q, R, S)
    with np.errstate(all="ignore"):
        out = _real_multiple_defect(hermitian_cross_ratio(*(_ext_hermitian(x) for x in (P, Q, R, S))))
    return np.where(bad, np.nan, out)


def frame_cross_ratio_defect_array(M) -> np.ndarray:
    """Cross-ratio defect of every quad, evaluated after moving each quad's
    first vertex to the base point with its own frame.

    Distances to the origin no longer inflate the cancellation, so this is
    the accurate variant for large grids.
    """
    M = np.asarray(M).astype(np.clongdouble)
    to_local = _inv2(M[:-1, :-1])
    H = []
    for X in _quad_arrays(M):
        L = to_local @ X
        d = (L[..., 0, 0] * L[..., 1, 1] - L[..., 0, 1] * L[..., 1, 0]).real
        H.append(L @ np.conj(np.swapaxes(L, -1, -2)) / np.abs(d)[..., None, None])
    pts = [from_hermitian(h.astype(complex)) for h in H]
    bad, _ = _coincidence_mask(*pts)
    with np.errstate(all="ignore"):
        out = _real_multiple_defect(hermitian_cross_ratio(*H))
    return np.where(bad, np.nan, out)


def planarity_defect_array(P, Q, R, S) -> np.ndarray:
    """Third singular value of the edge-difference matrix over the first."""
    D = np.stack([Q - P, R - P, S - P], axis=-2)
    s = np.linalg.svd(D, compute_uv=False)
    bad, _ = _coincidence_mask(P, Q, R, S)
    with np.errstate(all="ignore"):
        return np.where(bad, np.nan, s[..., 2] / s[..., 0])


@dataclass
class ConcircularityReport:
    cross_ratio: np.ndarray
    planarity: np.ndarray

    @property
    def worst(self) -> float:
        vals = np.concatenate([self.cross_ratio.ravel(), self.planarity.ravel()])
        vals = vals[~np.isnan(vals)]
        return float(vals.max()) if len(vals) else 0.0

    @property
    def degenerate(self) -> list[tuple[int, int]]:
        return [tuple(int(i) for i in ij) for ij in np.argwhere(np.isnan(self.cross_ratio))]


def concircularity_report(surface: DiscreteSurface) -> ConcircularityReport:
    quads = _quad_arrays(surface.f)
    if surface.frame is not None:
        cr = frame_cross_ratio_defect_array(surface.frame.matrices)
    else:
        cr = cross_ratio_defect_array(*quads)
    return ConcircularityReport(cr, planarity_defect_array(*quads))


def circle_center(points):
    """Equidistant centre of points in an affine 2-plane of R^{3,1}.

    The Minkowski-orthogonal foot of the origin on the plane is fixed by
    every isometry preserving the circle; normalized, it is the centre (a
    timelike foot) or the pole of the circle's plane otherwise.  Returns
    ``(centre, spread)`` with ``spread`` the relative variation of
    ``<x_i, centre>``.
    """
    P = np.asarray(points, dtype=float)
    _, basis, _ = plane_basis(P)
    G = (basis * ETA) @ basis.T
    x0 = P[0]
    coef = np.linalg.solve(G, (basis * ETA) @ x0)
    foot = x0 - coef @ basis
    n2 = mnorm2(foot)
    centre = foot / np.sqrt(abs(n2))
    if centre[0] < 0:
        centre = -centre
    ip = minkowski(P, centre)
    spread = float(np.ptp(ip) / max(np.max(np.abs(ip)), ABS_FLOOR))
    return centre, spread


def concircularity_defect(surface: DiscreteSurface, quad: Quad, method: str = "cross_ratio") -> float:
    """0 (within rounding) iff the quad's four points lie on a circle of H^3.

    ``method="cross_ratio"`` measures how far the matrix cross ratio is from
    a real multiple of I; ``method="plane"`` checks coplanarity in R^{3,1}
    plus equidistance from the centre.  ``method="both"`` returns the max.
    """
    P, Q, R, S = surface.quad_points(quad)
    if surface.frame is not None:
        i, j = surface.domain.index(quad[0])
        cr = float(frame_cross_ratio_defect_array(surface.frame.matrices[i:i + 2, j:j + 2])[0, 0])
    else:
        cr = float(cross_ratio_defect_array(P, Q, R, S))
    if np.isnan(cr):
        raise CoincidentVerticesError(quad)
    if method == "cross_ratio":
        return cr
    planar = float(planarity_defect_array(P, Q, R, S))
    _, spread = circle_center([P, Q, R, S])
    if method == "plane":
        return max(planar, spread)
    if method == "both":
        return max(planar, spread, cr)
    raise ValueError("method must be 'cross_ratio', 'plane' or 'both'")


def surface_cross_ratio_factorization(surface: DiscreteSurface) -> float:
    """Informational: how far the surface quads' cross ratios are from a
    product ``a(m) / b(n)``.  Flat surfaces are not expected to pass."""
    C = matrix_cross_ratio(*_quad_arrays(surface.f))
    mu = np.log(np.abs((C[..., 0, 0] + C[..., 1, 1]) / 2))
    mixed = mu - mu[:, :1] - mu[:1, :] + mu[:1, :1]
    return float(np.max(np.abs(mixed)))


# ---------------------------------------------------- curvature certificates

def _arctanh_parts(dg2, la, vertical):
    """``(x, term)`` for one edge of the curvature sum.

    ``x = (|dg|^2 - c) / (|dg|^2 + c)`` with ``c = lam*alpha`` on horizontal
    and ``c = -lam*alpha`` on vertical edges.  The term is evaluated as
    ``log((1 + x) / (1 - x)) / 2`` with ``1 +- x`` formed from the numerators,
    since ``x`` itself sits close to -1 on short edges.  NaN outside (-1, 1).
    """
    dg2 = np.asarray(dg2, dtype=float)
    c = -np.asarray(la, dtype=float) if vertical else np.asarray(la, dtype=float)
    with np.errstate(all="ignore"):
        s = dg2 + c
        onep, onem = 2 * dg2 / s, 2 * c / s
        ok = (onep > 0) & (onem > 0)
        term = np.where(ok, 0.5 * (np.log(np.where(ok, dg2, 1.0)) - np.log(np.where(ok, np.abs(c), 1.0))), np.nan)
        return (dg2 - c) / s, term


@dataclass
class ArctanhSum:
    value: float
    terms: tuple
    arguments: tuple
    flagged: list


def arctanh_curvature_sum(g: DiscreteHolomorphic, quad: Quad) -> ArctanhSum:
    """Signed four-term arctanh sum about a quad; vanishes identically.

    Edges whose argument has magnitude >= 1 (normal lines parallel or
    meeting at infinity) are flagged and the value is NaN.
    """
    p, q, r, s = quad
    terms, args, flagged = [], [], []
    for a, b, sign, vertical in ((p, q, 1, False), (q, r, -1, True), (r, s, 1, False), (s, p, -1, True)):
        x, term = _arctanh_parts(abs(g[b] - g[a]) ** 2, g.lam_alpha(a, b), vertical)
        args.append(float(x))
        if np.isnan(term):
            flagged.append((a, b))
        terms.append(sign * float(term))
    value = float("nan") if flagged else float(sum(terms))
    return ArctanhSum(value, tuple(terms), tuple(args), flagged)


def arctanh_sums(g: DiscreteHolomorphic) -> np.ndarray:
    """Vectorized :func:`arctanh_curvature_sum` over all quads (NaN where flagged)."""
    _, th = _arctanh_parts(np.abs(g.dg_h) ** 2, g.lam_alpha_h, False)
    _, tv = _arctanh_parts(np.abs(g.dg_v) ** 2, g.lam_alpha_v, True)
    return th[:, :-1] - tv[1:, :] + th[:, 1:] - tv[:-1, :]


@dataclass
class GaussAreaCheck:
    area_f: float
    area_N: float
    mixed: float
    light_cone: float
    plane_defect: float
    spacelike: bool


def gauss_area_check(surface: DiscreteSurface, quad: Quad, tol: float = 1e-9) -> GaussAreaCheck:
    """Signed areas of the surface quad and its normal quad in a common
    orientation, the mixed area of ``(f+N)/2`` and ``(f-N)/2``, and the
    light-cone residual of those two quads."""
    F = surface.quad_points(quad, "f")
    N = surface.quad_points(quad, "N")
    G1, G2 = (F + N) / 2, (F - N) / 2
    _, diff_basis, _ = plane_basis(np.concatenate([F - F[0], N - N[0]]))
    defect = plane_basis(np.concatenate([F - F[0], N - N[0], [np.zeros(4)]]))[2]
    if defect > tol:
        raise ModelError(f"surface and normal quads are not in parallel planes ({defect:.2e})")
    basis = common_basis(F, N, tol=tol)
    A_f, A_N = signed_area(F, basis), signed_area(N, basis)
    MA = 0.5 * (signed_area(G1 + G2, basis) - signed_area(G1, basis) - signed_area(G2, basis))
    scale = np.max(np.sum(F ** 2, axis=-1))
    cone = float(max(np.max(np.abs(mnorm2(G1))), np.max(np.abs(mnorm2(G2)))) / scale)
    gram = (basis * ETA) @ basis.T
    spacelike = bool(np.all(np.linalg.eigvalsh(gram) > 0))
    return GaussAreaCheck(A_f, A_N, MA, cone, float(defect), spacelike)


# ------------------------------------------------------- revolution / Stokes

def distance_to_geodesic(x, W) -> np.ndarray:
    """Hyperbolic distance from points ``x`` to the geodesic ``H^3 ∩ span(W)``.

    ``W`` is a ``2 x 4`` basis of a timelike plane; ``cosh d = sqrt(-<x_W, x_W>)``.
    """
    W = np.asarray(W, dtype=float)
    G = (W * ETA) @ W.T
    if np.linalg.det(G) >= 0:
        raise ModelError("axis plane is not timelike")
    coef = np.linalg.solve(G, (W * ETA) @ np.asarray(x, dtype=float).T).T
    xw = coef @ W
    return np.arccosh(np.sqrt(np.maximum(-mnorm2(xw), 1.0)))


def row_rotation_axis(points) -> np.ndarray:
    """Axis plane of a circle: Minkowski complement of the circle's plane direction."""
    _, basis, _ = plane_basis(points)
    A = basis * ETA
    _, _, vt = np.linalg.svd(A)
    return vt[2:]


def revolution_defect(surface: DiscreteSurface, ref_row: int | None = None) -> tuple[float, float]:
    """Check that every row (fixed ``n``) is a circle about one common axis.

    The axis is taken from ``ref_row``; returns ``(worst relative spread of
    the distance to the axis within a row, worst axis mismatch between rows)``.
    """
    a, b = surface.domain.shape
    j0 = b // 2 if ref_row is None else ref_row
    W = row_rotation_axis(surface.f[:, j0])
    spread, mismatch = 0.0, 0.0
    for j in range(b):
        try:
            dist = distance_to_geodesic(surface.f[:, j], W)
            spread = max(spread, float(np.ptp(dist) / max(np.mean(dist), ABS_FLOOR)))
        except ModelError:
            spread = float("inf")
        Wj = row_rotation_axis(surface.f[:, j])
        s = np.linalg.svd(np.vstack([W, Wj]), compute_uv=False)
        mismatch = max(mismatch, float(s[2] / s[0]))
    return spread, mismatch


def fit_circle_3d(points):
    """Least-squares plane through 3D points, then an algebraic circle fit in it.

    Returns ``(centre, normal, radius, residual)``.
    """
    P = np.asarray(points, dtype=float)
    c = P.mean(axis=0)
    _, _, vt = np.linalg.svd(P - c)
    e1, e2, normal = vt
    uv = np.stack([(P - c) @ e1, (P - c) @ e2], axis=1)
    A = np.column_stack([uv, np.ones(len(uv))])
    rhs = -(uv ** 2).sum(axis=1)
    (D, E, F), *_ = np.linalg.lstsq(A, rhs, rcond=None)
    cu, cv = -D / 2, -E / 2
    radius = float(np.sqrt(max(cu * cu + cv * cv - F, 0.0)))
    centre = c + cu * e1 + cv * e2
    resid = float(np.max(np.abs(np.hypot(uv[:, 0] - cu, uv[:, 1] - cv) - radius)))
    return centre, normal, radius, resid


@dataclass
class StokesReport:
    points: np.ndarray
    increments: np.ndarray
    monotone_from: int | None
    winding: float
    circle_radius: float
    circle_residual: float
    radii: np.ndarray
    inconclusive: bool = False
    reason: str = ""


MIN_RAY_LENGTH = 30


def stokes_diagnostic(surface: DiscreteSurface, ray, tail_fraction: float = 1 / 3) -> StokesReport:
    """Boundary behaviour of a surface along a lattice ray.

    ``ray`` is a sequence of vertices.  Reports the Poincaré-ball images,
    their successive increments, the first index after which increments
    decrease monotonically, and the total unwrapped angle swept about the
    circle fitted to the last ``tail_fraction`` of the ray.
    """
    ray = list(ray)
    pts = poincare(np.array([surface.point(v) for v in ray]))
    inc = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    if len(ray) < MIN_RAY_LENGTH:
        return StokesReport(pts, inc, None, 0.0, float("nan"), float("nan"),
                            np.linalg.norm(pts, axis=1), True,
                            f"ray has {len(ray)} < {MIN_RAY_LENGTH} vertices")
    rising = np.nonzero(np.diff(inc) >= 0)[0]
    monotone_from = int(rising[-1] + 1) if len(rising) else 0
    if monotone_from >= len(inc) - 1:
        monotone_from = None
    tail = pts[-max(3, int(len(pts) * tail_fraction)):]
    centre, normal, radius, resid = fit_circle_3d(tail)
    _, _, vt = np.linalg.svd(tail - tail.mean(axis=0))
    e1, e2 = vt[0], vt[1]
    rel = pts - centre
    ang = np.unwrap(np.arctan2(rel @ e2, rel @ e1))
    winding = float(abs(ang[-1] - ang[0]))
    return StokesReport(pts, inc, monotone_from, winding, radius, resid, np.linalg.norm(pts, axis=1))


def hausdorff_like(points_a, points_b) -> float:
    """Max over ``a`` of the hyperbolic distance to the nearest point of ``b``."""
    A, B = np.asarray(points_a), np.asarray(points_b)
    return float(max(np.min(hdist(a[None, :], B)) for a in A))
