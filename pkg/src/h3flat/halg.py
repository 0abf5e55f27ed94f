"""Hermitian-matrix model of hyperbolic 3-space and Minkowski 4-space.

Points and vectors are stored as real arrays with trailing axis
``(x0, x1, x2, x3)``; the matching Hermitian matrix is

    [[x0 + x3, x1 + i x2],
     [x1 - i x2, x0 - x3]]

so ``det X = -<x, x>`` for the Minkowski product
``<x, y> = -x0 y0 + x1 y1 + x2 y2 + x3 y3``.  H^3 is the sheet
``<x, x> = -1, x0 > 0``.  Every function broadcasts over leading axes.
"""

from __future__ import annotations

import numpy as np

from .errors import ModelError

DET_REAL_RTOL = 1e-10
ETA = np.array([-1.0, 1.0, 1.0, 1.0])
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
BASE_POINT = np.array([1.0, 0.0, 0.0, 0.0])
BASE_NORMAL = np.array([0.0, 0.0, 0.0, 1.0])


def hermitian(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    out = np.empty(x.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = x[..., 0] + x[..., 3]
    out[..., 1, 1] = x[..., 0] - x[..., 3]
    out[..., 0, 1] = x[..., 1] + 1j * x[..., 2]
    out[..., 1, 0] = x[..., 1] - 1j * x[..., 2]
    return out


def from_hermitian(X) -> np.ndarray:
    """Minkowski coordinates of a Hermitian matrix; the anti-Hermitian part is dropped."""
    X = np.asarray(X, dtype=complex)
    a, d = X[..., 0, 0].real, X[..., 1, 1].real
    off = (X[..., 0, 1] + np.conj(X[..., 1, 0])) / 2
    return np.stack([(a + d) / 2, off.real, off.imag, (a - d) / 2], axis=-1)


def minkowski(x, y) -> np.ndarray:
    return np.sum(ETA * np.asarray(x) * np.asarray(y), axis=-1)


def mnorm2(x) -> np.ndarray:
    return minkowski(x, x)


def det2(M) -> np.ndarray:
    M = np.asarray(M)
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def adjugate(M) -> np.ndarray:
    M = np.asarray(M)
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out


def inv2(M) -> np.ndarray:
    return adjugate(M) / det2(M)[..., None, None]


def dagger(M) -> np.ndarray:
    return np.conj(np.swapaxes(np.asarray(M), -1, -2))


def real_det(M, rtol: float = DET_REAL_RTOL) -> np.ndarray:
    """``det M`` as a real array; raises if it is zero or not real."""
    d = det2(M)
    absd = np.abs(d)
    if np.any(absd == 0):
        raise ModelError("determinant is zero")
    if np.any(np.abs(d.imag) > rtol * absd):
        worst = float(np.max(np.abs(d.imag) / absd))
        raise ModelError(f"determinant is not real (|Im det|/|det| = {worst:.2e})")
    return d.real


def sym(M) -> np.ndarray:
    """``M M^dagger / |det M|`` as a point of H^3.

    Dividing by the absolute value fixes ``x0 > 0`` and makes the result
    invariant under ``M -> c M`` for every real ``c != 0``.
    """
    M = np.asarray(M, dtype=complex)
    d = np.abs(real_det(M))
    return from_hermitian(M @ dagger(M)) / d[..., None]


def sym_normal(M) -> np.ndarray:
    """``M diag(1, -1) M^dagger / |det M|``: the normal carried by a frame."""
    M = np.asarray(M, dtype=complex)
    d = np.abs(real_det(M))
    return from_hermitian(M @ SIGMA3 @ dagger(M)) / d[..., None]


def check_hpoint(x, tol: float = 1e-9) -> None:
    x = np.asarray(x)
    scale = np.maximum(1.0, np.sum(x * x, axis=-1))
    if np.any(np.abs(mnorm2(x) + 1) > tol * scale) or np.any(x[..., 0] <= 0):
        raise ModelError("not a point of H^3")


def hdist(x, y, tol: float = 1e-9) -> np.ndarray:
    """Hyperbolic distance ``arccosh(-<x, y>)``.

    Evaluated as ``2 asinh(|x - y|_M / 2)``, which is the same function but
    keeps full relative accuracy for nearby points.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    c = -minkowski(x, y)
    scale = np.maximum(1.0, np.abs(x[..., 0] * y[..., 0]))
    if np.any(c < 1 - tol * scale):
        raise ModelError("-<x, y> < 1: inputs are not points of H^3")
    diff = x - y
    s = np.maximum(mnorm2(diff), 0.0)
    return 2 * np.arcsinh(np.sqrt(s) / 2)


def geodesic_point(x, n, t, tol: float = 1e-9) -> np.ndarray:
    """``cosh(t) x + sinh(t) n`` for a unit tangent vector ``n`` at ``x``."""
    x, n = np.asarray(x, dtype=float), np.asarray(n, dtype=float)
    scale = np.maximum(1.0, np.sum(x * x, axis=-1))
    if np.any(np.abs(mnorm2(n) - 1) > tol * scale) or np.any(np.abs(minkowski(x, n)) > tol * scale):
        raise ModelError("n must be a unit spacelike vector orthogonal to x")
    t = np.asarray(t, dtype=float)[..., None]
    return np.cosh(t) * x + np.sinh(t) * n


def poincare(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / (1 + x[..., :1])


def klein(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return x[..., 1:] / x[..., :1]


def from_klein(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    w = 1 / np.sqrt(1 - np.sum(k * k, axis=-1))
    return np.concatenate([w[..., None], w[..., None] * k], axis=-1)


def poincare_from_F_entries(A, B, C, D, variant: int = 2) -> np.ndarray:
    """Poincare-ball image computed directly from the entries of a frame.

    ``variant=1`` is the projection coming from the light-cone description,
    ``variant=2`` the projection of ``F F^dagger / det F``.  The two agree up
    to an isometry fixing the origin.
    """
    A, B, C, D = (np.asarray(z, dtype=complex) for z in (A, B, C, D))
    det = A * D - B * C
    if np.any(np.abs(det.imag) > DET_REAL_RTOL * np.abs(det)) or np.any(det == 0):
        raise ModelError("AD - BC must be real and nonzero")
    sq = (np.abs(A) ** 2 + np.abs(B) ** 2, np.abs(C) ** 2 + np.abs(D) ** 2)
    denom = det.real + (sq[0] + sq[1]) / 2
    if variant == 1:
        w = -np.conj(A) * C - np.conj(B) * D
        num = (w.real, w.imag, (sq[1] - sq[0]) / 2)
    elif variant == 2:
        w = A * np.conj(C) + B * np.conj(D)
        num = (w.real, w.imag, (sq[0] - sq[1]) / 2)
    else:
        raise ValueError("variant must be 1 or 2")
    return np.stack(num, axis=-1) / denom[..., None]


# ------------------------------------------------------- planes and areas

def plane_basis(points, rank: int = 2):
    """Orthonormal (Euclidean) basis of the affine span of ``points``.

    Returns ``(origin, basis, residual)`` where ``residual`` is the
    ``rank+1``-th singular value of the centred difference matrix relative
    to its largest one.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 4)
    origin = P.mean(axis=0)
    _, s, vt = np.linalg.svd(P - origin)
    resid = s[rank] / s[0] if len(s) > rank and s[0] > 0 else 0.0
    return origin, vt[:rank], float(resid)


def coplanar_in_R31(points, tol: float = 1e-10) -> bool:
    """Do the points lie in a common affine 2-plane of R^{3,1}?"""
    return plane_basis(points)[2] <= tol


def in_geodesic_plane(points, tol: float = 1e-10) -> float:
    """Relative deviation of the points from a common 3-dim linear subspace
    (a geodesic plane of H^3 is such a subspace intersected with H^3)."""
    P = np.asarray(points, dtype=float).reshape(-1, 4)
    P = P / np.linalg.norm(P, axis=1, keepdims=True)
    s = np.linalg.svd(P, compute_uv=False)
    return float(s[3] / s[0]) if len(s) > 3 else 0.0


def _signed_area_2d(uv):
    x, y = uv[:, 0], uv[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def signed_area(vertices, basis) -> float:
    """Shoelace area of a polygon, measured in the oriented plane ``basis``."""
    V = np.asarray(vertices, dtype=float)
    return _signed_area_2d((V - V[0]) @ np.asarray(basis).T)


def planar_quad_area(vertices, tol: float = 1e-9, basis=None) -> float:
    """Euclidean area of a planar quad in R^4 coordinates.

    Without ``basis`` the unsigned area is returned; with an oriented
    ``basis`` of the plane's direction the signed area.
    """
    V = np.asarray(vertices, dtype=float)
    _, own, resid = plane_basis(V)
    if resid > tol:
        raise ModelError(f"quad is not planar (relative deviation {resid:.2e})")
    if basis is None:
        return abs(signed_area(V, own))
    return signed_area(V, basis)


def common_basis(*polygons, tol: float = 1e-9):
    """Oriented basis of a direction plane shared by all given polygons."""
    diffs = np.concatenate([np.asarray(P, dtype=float) - np.asarray(P, dtype=float)[0]
                            for P in polygons])
    _, s, vt = np.linalg.svd(diffs)
    resid = s[2] / s[0] if len(s) > 2 and s[0] > 0 else 0.0
    if resid > tol:
        raise ModelError(f"polygons do not lie in parallel planes ({resid:.2e})")
    return vt[:2]


def mixed_area(P, Q, basis=None) -> float:
    """``(A(P + Q) - A(P) - A(Q)) / 2`` with signed areas in a common plane."""
    P, Q = np.asarray(P, dtype=float), np.asarray(Q, dtype=float)
    if basis is None:
        basis = common_basis(P, Q)
    return 0.5 * (signed_area(P + Q, basis) - signed_area(P, basis) - signed_area(Q, basis))
