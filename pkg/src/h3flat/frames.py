"""Frame integration over a lattice domain.

Three frame kinds are supported:

* ``"E"``: flat frames, ``E_q = E_p [[1, dg], [lam*alpha/dg, 1]]``;
* ``"F"``: CMC-1 (Bryant) frames,
  ``F_q = F_p (I + lam*alpha/dg [[g_p, -g_p g_q], [1, -g_q]])``;
* ``"W"``: dressed frames ``E_p L_p(t)`` interpolating the two.

Every transition satisfies ``T(p, q) T(q, p) = (1 - lam*alpha) I``, so a frame
read along two paths differs by a real scalar only; the induced surface
does not see this.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dholo import DiscreteHolomorphic, check_edges
from .errors import DomainError, SingularTransitionError
from .halg import adjugate, det2, real_det
from .lattice import LatticeDomain, Vertex

ORDERS = ("row", "column", "diagonal")


@dataclass(frozen=True, eq=False)
class MoebiusFrame:
    domain: LatticeDomain
    matrices: np.ndarray  # shape (*domain.shape, 2, 2)
    kind: str
    lam: float
    t: float | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("E", "F", "W"):
            raise ValueError(f"unknown frame kind {self.kind!r}")
        if self.matrices.shape != self.domain.shape + (2, 2):
            raise DomainError("frame array does not match the domain")

    def __getitem__(self, v: Vertex) -> np.ndarray:
        return self.matrices[self.domain.index(v)]

    @property
    def det(self) -> np.ndarray:
        return det2(self.matrices)

    def det_real_defect(self) -> float:
        d = self.det
        return float(np.max(np.abs(d.imag) / np.abs(d)))

    def replace_matrices(self, matrices, kind=None, t=None, **meta) -> "MoebiusFrame":
        return MoebiusFrame(self.domain, np.asarray(matrices, dtype=complex), kind or self.kind,
                            self.lam, self.t if t is None else t, {**self.meta, **meta})


# ---------------------------------------------------------------- transitions

def _flat_transitions(dg, lam_alpha):
    T = np.empty(dg.shape + (2, 2), dtype=complex)
    T[..., 0, 0] = 1
    T[..., 1, 1] = 1
    T[..., 0, 1] = dg
    T[..., 1, 0] = lam_alpha / dg
    return T


def _bryant_transitions(gp, gq, lam_alpha):
    s = lam_alpha / (gq - gp)
    T = np.empty(gp.shape + (2, 2), dtype=complex)
    T[..., 0, 0] = 1 + s * gp
    T[..., 0, 1] = -s * gp * gq
    T[..., 1, 0] = s
    T[..., 1, 1] = 1 - s * gq
    return T


def edge_transitions(g: DiscreteHolomorphic, kind: str = "E"):
    """Forward transitions ``(T_h, T_v)`` for every horizontal/vertical edge.

    ``T_h[i, j]`` maps the frame at index ``(i, j)`` to ``(i+1, j)``.
    """
    check_edges(g)
    la_h, la_v = g.lam_alpha_h, g.lam_alpha_v
    for la, step in ((la_h, (1, 0)), (la_v, (0, 1))):
        bad = np.argwhere(np.abs(1 - la) == 0)
        if len(bad):
            p = g.domain.vertex(*bad[0])
            raise SingularTransitionError((p, (p[0] + step[0], p[1] + step[1])))
    v = g.values
    if kind == "E":
        return _flat_transitions(g.dg_h, la_h), _flat_transitions(g.dg_v, la_v)
    if kind == "F":
        return (_bryant_transitions(v[:-1, :], v[1:, :], la_h),
                _bryant_transitions(v[:, :-1], v[:, 1:], la_v))
    raise ValueError("transitions exist for kinds 'E' and 'F'")


def compatibility_residual(g: DiscreteHolomorphic, kind: str = "E") -> np.ndarray:
    """``|U V1 - V U1| / |U V1|`` per quad (U, V from p; V1 from q; U1 from s)."""
    T_h, T_v = edge_transitions(g, kind)
    lhs = T_h[:, :-1] @ T_v[1:, :]
    rhs = T_v[:-1, :] @ T_h[:, 1:]
    return np.linalg.norm(lhs - rhs, axis=(-2, -1)) / np.linalg.norm(lhs, axis=(-2, -1))


def reverse_product_residual(g: DiscreteHolomorphic, kind: str = "E") -> float:
    """Worst deviation of ``T(p, q) T(q, p)`` from ``(1 - lam*alpha) I``."""
    worst = 0.0
    for T, la in zip(edge_transitions(g, kind), (g.lam_alpha_h, g.lam_alpha_v)):
        prod = T @ adjugate(T)
        target = (1 - la)[..., None, None] * np.eye(2)
        worst = max(worst, float(np.max(np.abs(prod - target))))
    return worst


# ---------------------------------------------------------------- propagation

def _parent(v, base, order):
    (m, n), (mb, nb) = v, base
    step_m = (m - int(np.sign(m - mb)), n)
    step_n = (m, n - int(np.sign(n - nb)))
    if m == mb:
        return step_n
    if n == nb:
        return step_m
    if order == "row":
        return step_n
    if order == "column":
        return step_m
    return step_m if (m + n) % 2 == 0 else step_n


def spanning_order(domain: LatticeDomain, base: Vertex, order: str):
    """Vertices in breadth-first order from ``base`` with their tree parent."""
    if order not in ORDERS:
        raise ValueError(f"order must be one of {ORDERS}")
    verts = sorted(domain.vertices, key=lambda v: (abs(v[0] - base[0]) + abs(v[1] - base[1]), v[1], v[0]))
    return [(v, None if v == base else _parent(v, base, order)) for v in verts]


def _step(T_h, T_v, domain, u, v, reverse):
    """Transition matrix used when walking from ``u`` to neighbour ``v``."""
    (iu, ju), (iv, jv) = domain.index(u), domain.index(v)
    if iv == iu + 1 and jv == ju:
        return T_h[iu, ju]
    if iv == iu and jv == ju + 1:
        return T_v[iu, ju]
    if iv == iu - 1 and jv == ju:
        T = T_h[iv, jv]
    elif iv == iu and jv == ju - 1:
        T = T_v[iv, jv]
    else:
        raise DomainError(f"{u} and {v} are not neighbours")
    A = adjugate(T)
    return A if reverse == "formula" else A / det2(T)


def _integrate(g, kind, M0, order, base, normalize, reverse="formula"):
    domain = g.domain
    base = (domain.m_lo, domain.n_lo) if base is None else tuple(base)
    if base not in domain:
        raise DomainError(f"base vertex {base} is outside the domain")
    M0 = np.eye(2, dtype=complex) if M0 is None else np.asarray(M0, dtype=complex)
    real_det(M0)
    T_h, T_v = edge_transitions(g, kind)
    out = np.empty(domain.shape + (2, 2), dtype=complex)
    for v, par in spanning_order(domain, base, order):
        if par is None:
            out[domain.index(v)] = M0
            continue
        T = _step(T_h, T_v, domain, par, v, reverse)
        if normalize:
            T = T / np.sqrt(complex(det2(T)))
        out[domain.index(v)] = out[domain.index(par)] @ T
    return out, base


def integrate_E(g: DiscreteHolomorphic, E0=None, order: str = "row", base=None,
                normalize: bool = False) -> MoebiusFrame:
    """Flat frame of ``g`` with ``E = E0`` at ``base`` (default lower-left corner).

    ``normalize`` divides every step by ``sqrt(1 - lam*alpha)`` to keep
    ``|det E|`` near one on large grids.
    """
    mats, base = _integrate(g, "E", E0, order, base, normalize)
    return MoebiusFrame(g.domain, mats, "E", g.lam, meta={"base": base, "order": order})


def integrate_F(g: DiscreteHolomorphic, F0=None, order: str = "row", base=None,
                normalize: bool = False) -> MoebiusFrame:
    """CMC-1 frame of ``g``; same conventions as :func:`integrate_E`."""
    mats, base = _integrate(g, "F", F0, order, base, normalize)
    return MoebiusFrame(g.domain, mats, "F", g.lam, t=1.0, meta={"base": base, "order": order})


def integrate_path(g: DiscreteHolomorphic, path, kind: str = "E", M0=None,
                   reverse: str = "formula") -> np.ndarray:
    """Frame values along an arbitrary nearest-neighbour path, shape ``(len, 2, 2)``.

    Walking an edge against its orientation uses the edge formula with the
    endpoints swapped (``reverse="formula"``), or the exact inverse
    (``reverse="inverse"``).
    """
    for v in path:
        if v not in g.domain:
            raise DomainError(f"path leaves the domain at {v}")
    T_h, T_v = edge_transitions(g, kind)
    M = np.eye(2, dtype=complex) if M0 is None else np.asarray(M0, dtype=complex)
    out = [M]
    for u, v in zip(path[:-1], path[1:]):
        M = M @ _step(T_h, T_v, g.domain, u, v, reverse)
        out.append(M)
    return np.array(out)


def transition_residual(frame: MoebiusFrame, g: DiscreteHolomorphic) -> float:
    """Worst projective deviation of ``M_p^-1 M_q`` from the edge transition.

    Each ratio is compared with the transition up to the best real scalar.
    """
    kind = "E" if frame.kind == "E" else "F"
    if frame.kind == "W":
        raise ValueError("dressed frames have no edge transition")
    T_h, T_v = edge_transitions(g, kind)
    M = frame.matrices
    worst = 0.0
    for T, A, B in ((T_h, M[:-1, :], M[1:, :]), (T_v, M[:, :-1], M[:, 1:])):
        R = adjugate(A) @ B
        c = np.sum(R * np.conj(T), axis=(-2, -1)) / np.sum(np.abs(T) ** 2, axis=(-2, -1))
        dev = np.linalg.norm(R - c[..., None, None] * T, axis=(-2, -1)) / np.linalg.norm(R, axis=(-2, -1))
        worst = max(worst, float(np.max(dev + np.abs(c.imag) / np.abs(c))))
    return worst


# ------------------------------------------------------------- conversions

def _unipotent(g_values, sign):
    U = np.zeros(g_values.shape + (2, 2), dtype=complex)
    U[..., 0, 0] = 1
    U[..., 1, 1] = 1
    U[..., 0, 1] = sign * g_values
    return U


def E_from_F(F: MoebiusFrame, g: DiscreteHolomorphic) -> MoebiusFrame:
    if F.domain != g.domain:
        raise DomainError("frame and function live on different domains")
    return MoebiusFrame(F.domain, F.matrices @ _unipotent(g.values, 1), "E", F.lam, meta=dict(F.meta))


def F_from_E(E: MoebiusFrame, g: DiscreteHolomorphic) -> MoebiusFrame:
    if E.domain != g.domain:
        raise DomainError("frame and function live on different domains")
    return MoebiusFrame(E.domain, E.matrices @ _unipotent(g.values, -1), "F", E.lam, t=1.0,
                        meta=dict(E.meta))


def weingarten_matrices(g_values, t: float) -> np.ndarray:
    """Upper-triangular dressing ``[[b, -t g b], [0, 1/b]]``,
    ``b = sqrt((1 + t|g|^2) / (1 + t^2 |g|^2))``."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    g_values = np.asarray(g_values, dtype=complex)
    r = np.abs(g_values) ** 2
    beta = np.sqrt((1 + t * r) / (1 + t * t * r))
    L = np.zeros(g_values.shape + (2, 2), dtype=complex)
    L[..., 0, 0] = beta
    L[..., 0, 1] = -t * g_values * beta
    L[..., 1, 1] = 1 / beta
    return L


def dress_weingarten(E: MoebiusFrame, g: DiscreteHolomorphic, t: float) -> MoebiusFrame:
    if E.kind != "E":
        raise ValueError("dressing applies to flat frames")
    L = weingarten_matrices(g.values, t)
    return MoebiusFrame(E.domain, E.matrices @ L, "W", E.lam, t=float(t), meta=dict(E.meta))


def parallel_frame(E: MoebiusFrame, d: float) -> MoebiusFrame:
    """``E diag(1/sqrt d, sqrt d)``: the frame of the parallel surface at distance ``log d``."""
    if not d > 0:
        raise ValueError("d must be positive")
    D = np.diag([1 / np.sqrt(d), np.sqrt(d)]).astype(complex)
    return MoebiusFrame(E.domain, E.matrices @ D, "E", E.lam, meta={**E.meta, "d": float(d)})


def dual_rotation(lam: float) -> np.ndarray:
    r = np.sqrt(abs(lam))
    return np.array([[0, 1 / r], [-r, 0]], dtype=complex)


def dual_flat_frame(E: MoebiusFrame) -> MoebiusFrame:
    """``E J`` with ``J = [[0, 1/sqrt|lam|], [-sqrt|lam|, 0]]``.

    Its transitions are flat transitions of the dual function (increments
    ``-sign(lam) alpha / dg``, same weights).  For ``lam < 0`` the sign
    reverses the orientation of the dual increments.
    """
    if E.kind != "E":
        raise ValueError("duality applies to flat frames")
    J = dual_rotation(E.lam)
    flipped = E.lam < 0
    return MoebiusFrame(E.domain, E.matrices @ J, "E", E.lam,
                        meta={**E.meta, "dual": True, "orientation_flip": flipped})
