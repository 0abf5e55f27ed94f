"""Discrete holomorphic functions on lattice domains.

A function ``g`` is stored as a complex array over the domain together with
its cross ratio factorizing function, which is itself stored by edge class:
``alpha_h[i]`` is the weight of every horizontal edge ``(m, n)-(m+1, n)``
with ``m = m_lo + i`` (independent of ``n``) and ``alpha_v[j]`` the weight of
every vertical edge ``(m, n)-(m, n+1)`` with ``n = n_lo + j``.  This layout
makes the row/column constancy of the weights structural.

The free global factor ``lam`` multiplies every weight wherever the frame
equations use them.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction

import mpmath as mp
import numpy as np

from .errors import ClosureError, DegenerateEdgeError, DomainError, PropagationError
from .lattice import HORIZONTAL, LatticeDomain, Quad, Vertex, build_domain, edge_class

DEFAULT_LAMBDA = 0.01
DEGENERACY_RTOL = 1e-13


@dataclass(frozen=True, eq=False)
class DiscreteHolomorphic:
    domain: LatticeDomain
    values: np.ndarray
    alpha_h: np.ndarray
    alpha_v: np.ndarray
    lam: float = DEFAULT_LAMBDA
    rotated: bool = False
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        a, b = self.domain.shape
        values = np.asarray(self.values, dtype=complex)
        alpha_h = np.asarray(self.alpha_h, dtype=float)
        alpha_v = np.asarray(self.alpha_v, dtype=float)
        if values.shape != (a, b):
            raise DomainError(f"values shape {values.shape} != domain shape {(a, b)}")
        if alpha_h.shape != (a - 1,) or alpha_v.shape != (b - 1,):
            raise DomainError("alpha arrays do not match the domain")
        if self.lam == 0:
            raise ValueError("lambda must be nonzero")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "alpha_h", alpha_h)
        object.__setattr__(self, "alpha_v", alpha_v)
        object.__setattr__(self, "lam", float(self.lam))

    def __getitem__(self, v: Vertex) -> complex:
        return complex(self.values[self.domain.index(v)])

    def alpha(self, p: Vertex, q: Vertex) -> float:
        """Weight of the edge ``pq`` (orientation symmetric)."""
        if not self.domain.has_edge(p, q):
            raise DomainError(f"edge {p}-{q} not in domain")
        if edge_class(p, q) == HORIZONTAL:
            return float(self.alpha_h[min(p[0], q[0]) - self.domain.m_lo])
        return float(self.alpha_v[min(p[1], q[1]) - self.domain.n_lo])

    def lam_alpha(self, p: Vertex, q: Vertex) -> float:
        return self.lam * self.alpha(p, q)

    def dg(self, p: Vertex, q: Vertex) -> complex:
        return self[q] - self[p]

    def with_lambda(self, lam: float) -> "DiscreteHolomorphic":
        return replace(self, lam=lam)

    def scaled(self, d: float) -> "DiscreteHolomorphic":
        """``d * g`` with unchanged weights (the parallel-surface deformation)."""
        return replace(self, values=d * self.values)

    def shifted(self, a: complex) -> "DiscreteHolomorphic":
        return replace(self, values=self.values + a)

    @property
    def dg_h(self) -> np.ndarray:
        """Differences along horizontal edges, shape ``(a-1, b)``."""
        return np.diff(self.values, axis=0)

    @property
    def dg_v(self) -> np.ndarray:
        """Differences along vertical edges, shape ``(a, b-1)``."""
        return np.diff(self.values, axis=1)

    @property
    def lam_alpha_h(self) -> np.ndarray:
        a, b = self.domain.shape
        return np.broadcast_to((self.lam * self.alpha_h)[:, None], (a - 1, b))

    @property
    def lam_alpha_v(self) -> np.ndarray:
        a, b = self.domain.shape
        return np.broadcast_to((self.lam * self.alpha_v)[None, :], (a, b - 1))


# ---------------------------------------------------------------- cross ratios

def _cr(gp, gq, gr, gs):
    # ordered product (g_q-g_p)(g_r-g_q)^-1 (g_s-g_r)(g_p-g_s)^-1
    return (gq - gp) / (gr - gq) * (gs - gr) / (gp - gs)


def check_edges(g: DiscreteHolomorphic, rtol: float = DEGENERACY_RTOL) -> None:
    """Raise :class:`DegenerateEdgeError` on the first (near-)degenerate edge."""
    v = g.values
    scale = max(float(np.max(np.abs(v))), 1e-300)
    for diffs, step in ((g.dg_h, (1, 0)), (g.dg_v, (0, 1))):
        gaps = np.abs(diffs)
        i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
        if gaps[i, j] < rtol * scale:
            p = g.domain.vertex(i, j)
            raise DegenerateEdgeError((p, (p[0] + step[0], p[1] + step[1])), float(gaps[i, j]))


def cross_ratio(g: DiscreteHolomorphic, quad: Quad) -> complex:
    p, q, r, s = quad
    vals = [g[v] for v in quad]
    for a, b in ((p, q), (q, r), (r, s), (s, p)):
        gap = abs(g[b] - g[a])
        if gap < DEGENERACY_RTOL * max(abs(x) for x in vals) or gap == 0:
            raise DegenerateEdgeError((a, b), gap)
    return complex(_cr(*vals))


def cross_ratios(values: np.ndarray) -> np.ndarray:
    """Cross ratios of all quads at once, shape ``(a-1, b-1)``."""
    v = values
    with np.errstate(divide="ignore", invalid="ignore"):
        return _cr(v[:-1, :-1], v[1:, :-1], v[1:, 1:], v[:-1, 1:])


@dataclass
class ValidationReport:
    ok: bool
    worst_residual: float
    worst_quad: Quad | None
    failures: list = field(default_factory=list)
    alpha_sign_ok: bool = True

    def __bool__(self):
        return self.ok


def validate(g: DiscreteHolomorphic, tol: float = 1e-12) -> ValidationReport:
    """Check ``cr = alpha_h / alpha_v < 0`` on every quad (relative residual)."""
    check_edges(g)
    cr = cross_ratios(g.values)
    target = g.alpha_h[:, None] / g.alpha_v[None, :]
    sign_ok = bool(np.all(target < 0))
    resid = np.abs(cr - target) / np.abs(target)
    i, j = np.unravel_index(np.argmax(resid), resid.shape)
    quads = g.domain.quads
    a = g.domain.shape[0] - 1

    failures = [(quads[jj * a + ii], float(resid[ii, jj]))
                for ii, jj in zip(*np.nonzero(resid > tol))]
    failures.sort(key=lambda x: -x[1])
    return ValidationReport(
        ok=sign_ok and not failures,
        worst_residual=float(resid[i, j]),
        worst_quad=quads[j * a + i],
        failures=failures,
        alpha_sign_ok=sign_ok,
    )


def _segments_cross(a, b, c, d) -> bool:
    def orient(p, q, r):
        return (q - p).real * (r - p).imag - (q - p).imag * (r - p).real
    o1, o2 = orient(a, b, c), orient(a, b, d)
    o3, o4 = orient(c, d, a), orient(c, d, b)
    return o1 * o2 <= 0 and o3 * o4 <= 0


def embedding_defects(g: DiscreteHolomorphic, rtol: float = 1e-12) -> list[Quad]:
    """Quads whose image in C is not a properly embedded quadrilateral."""
    bad = []
    for quad in g.domain.quads:
        z = [g[v] for v in quad]
        scale = max(abs(z[k] - z[k - 1]) for k in range(4))
        ok = True
        for k in range(4):
            e1 = z[(k + 1) % 4] - z[k]
            e2 = z[k - 1] - z[k]
            if abs(e1) <= rtol * scale or abs((e1.conjugate() * e2).imag) <= rtol * abs(e1) * abs(e2):
                ok = False
        if ok and (_segments_cross(z[0], z[1], z[2], z[3]) or _segments_cross(z[1], z[2], z[3], z[0])):
            ok = False
        if not ok:
            bad.append(quad)
    return bad


def is_properly_embedded(g: DiscreteHolomorphic) -> bool:
    return not embedding_defects(g)


# ------------------------------------------------------------------ generators

def gen_linear(c: complex, domain: LatticeDomain, lam: float = DEFAULT_LAMBDA) -> DiscreteHolomorphic:
    """``g = c (m + i n)`` with ``alpha_h = +1``, ``alpha_v = -1``."""
    if c == 0:
        raise ValueError("c must be nonzero")
    m, n = _grid(domain)
    a, b = domain.shape
    return DiscreteHolomorphic(domain, c * (m + 1j * n), np.ones(a - 1), -np.ones(b - 1), lam,
                               meta={"kind": "linear", "c": complex(c)})


def exp_cross_ratio(c: complex) -> float:
    """Constant quad cross ratio of ``exp(c (m + i n))``."""
    cr = (cmath.exp(c) - 1) ** 2 * cmath.exp(1j * c) / (cmath.exp(c) * (cmath.exp(1j * c) - 1) ** 2)
    return cr.real


def gen_exp(c: complex, domain: LatticeDomain, lam: float = DEFAULT_LAMBDA) -> DiscreteHolomorphic:
    """``g = exp(c (m + i n))`` for real or purely imaginary ``c``."""
    c = complex(c)
    if c == 0:
        raise ValueError("c must be nonzero")
    if c.real != 0 and c.imag != 0:
        raise ValueError("c must be real or purely imaginary")
    m, n = _grid(domain)
    a, b = domain.shape
    cr = exp_cross_ratio(c)
    return DiscreteHolomorphic(domain, np.exp(c * (m + 1j * n)), np.full(a - 1, -cr),
                               -np.ones(b - 1), lam, meta={"kind": "exp", "c": c})


def narrow_exp_c2(c1: float) -> float:
    """The ``c2`` making ``exp(c1 m + i c2 n)`` narrow-sense (cross ratio -1)."""
    s = math.sinh(c1 / 2)
    if abs(s) > 1:
        raise ValueError("|sinh(c1/2)| must be <= 1")
    return 2 * math.asin(s)


def gen_exp_narrow(c1: float, domain: LatticeDomain, lam: float = DEFAULT_LAMBDA) -> DiscreteHolomorphic:
    c2 = narrow_exp_c2(c1)
    m, n = _grid(domain)
    a, b = domain.shape
    return DiscreteHolomorphic(domain, np.exp(c1 * m + 1j * c2 * n), np.ones(a - 1),
                               -np.ones(b - 1), lam, meta={"kind": "exp_narrow", "c1": c1, "c2": c2})


def _grid(domain):
    a, b = domain.shape
    m = np.arange(domain.m_lo, domain.m_hi + 1)[:, None] * np.ones((1, b))
    n = np.ones((a, 1)) * np.arange(domain.n_lo, domain.n_hi + 1)[None, :]
    return m, n


def i_pow(gamma) -> complex:
    """Principal branch of ``i ** gamma``."""
    return cmath.exp(1j * math.pi * float(gamma) / 2)


def _mp_gamma(gamma):
    if isinstance(gamma, Fraction):
        return mp.mpf(gamma.numerator) / gamma.denominator
    return mp.mpf(gamma)


def power_axis(gamma, count: int, as_mp: bool = False):
    """Real-axis values ``g_{k,0}``, ``k = 0..count``, from the Pochhammer closed form.

    The running ratio ``(h)_m / (-h)_{m+1}`` with ``h = gamma / 2`` is updated
    term by term, so no factorial-sized intermediate is formed.
    """
    h = _mp_gamma(gamma) / 2 if as_mp else float(gamma) / 2
    out = [0] * (count + 1)
    ratio = 1 / (-h)
    for m in range((count // 2) + 1):
        if 2 * m <= count:
            out[2 * m] = -m * ratio
        if 2 * m + 1 <= count:
            out[2 * m + 1] = -ratio * (h + m)
        ratio *= (h + m) / (-h + m + 1)
    return out if as_mp else np.array(out, dtype=float)


def solve_fourth_vertex(known: dict, unknown: str, target: complex = -1) -> complex:
    """Solve ``cr(p, q, r, s) = target`` for the one missing corner.

    ``known`` maps three of ``"p", "q", "r", "s"`` to values.  The cross ratio
    is invariant under ``(p,q,r,s) -> (r,s,p,q)`` and ``(q,p,s,r)``, which lets
    any corner be moved to the ``r`` slot.
    """
    relabel = {"r": ("p", "q", "s"), "p": ("r", "s", "q"),
               "q": ("s", "r", "p"), "s": ("q", "p", "r")}[unknown]
    P, Q, S = (known[k] for k in relabel)
    # K (x - Q)(P - S) = (Q - P)(S - x)
    K = target
    denom = K * (P - S) + (Q - P)
    if denom == 0:
        raise ZeroDivisionError("cross ratio equation is singular")
    return (K * Q * (P - S) + (Q - P) * S) / denom


def _fill_columns(vals: list) -> None:
    """Fill ``vals[m][n+1]`` from column ``n`` and ``vals[0][n+1]``, in place."""
    a, b = len(vals), len(vals[0])
    M = a - 1
    for n in range(b - 1):
        g = [vals[m][n] for m in range(a)]
        p = [g[m + 1] - g[m] for m in range(M)]
        c = [mp.mpc(1), vals[0][n + 1] + g[1] - 2 * g[0]] + [None] * (M - 1)
        for m in range(M - 1):
            c[m + 2] = (p[m] + p[m + 1]) * c[m + 1] - 2 * p[m] ** 2 * c[m]
        bb = [c[m + 1] - p[m] * c[m] for m in range(M)]
        bb.append(p[M - 1] * bb[M - 1] - p[M - 1] ** 2 * c[M - 1])
        for m in range(1, M + 1):
            if c[m] == 0:
                raise PropagationError((m, n + 1), "c_m vanished")
            vals[m][n + 1] = g[m] + bb[m] / c[m]


def _fill_quads(vals: list) -> None:
    a, b = len(vals), len(vals[0])
    for n in range(b - 1):
        for m in range(a - 1):
            try:
                vals[m + 1][n + 1] = solve_fourth_vertex(
                    {"p": vals[m][n], "q": vals[m + 1][n], "s": vals[m][n + 1]}, "r")
            except ZeroDivisionError:
                raise PropagationError((m + 1, n + 1)) from None


def power_precision(M: int, N: int) -> int:
    """Working decimal digits for the interior fill.

    Forward propagation from the axes amplifies rounding error by roughly a
    quarter of a decade per lattice step; this budget keeps the rounded
    doubles exact to well below 1e-12.
    """
    return 30 + int(0.4 * (M + N))


def gen_power(gamma, M: int, N: int, lam: float = DEFAULT_LAMBDA,
              method: str = "columns", dps: int | None = None) -> DiscreteHolomorphic:
    """Discrete ``z ** gamma`` on ``[0, M] x [0, N]`` (narrow sense).

    ``method="columns"`` fills the interior column by column with the linear
    recurrence for ``c_m``; ``method="quad"`` solves ``cr = -1`` quad by quad.
    Both run in extended precision (``dps`` digits) and are rounded at the end.
    ``gamma`` may be a :class:`fractions.Fraction` for an exact exponent.
    """
    if not 0 < float(gamma) < 2:
        raise ValueError("gamma must lie in (0, 2)")
    if M < 1 or N < 1:
        raise DomainError("M and N must be >= 1")
    domain = build_domain(0, M, 0, N)
    with mp.workdps(dps or power_precision(M, N)):
        axis = power_axis(gamma, max(M, N), as_mp=True)
        ig = mp.expjpi(_mp_gamma(gamma) / 2)
        vals = [[mp.mpc(0)] * (N + 1) for _ in range(M + 1)]
        for m in range(M + 1):
            vals[m][0] = mp.mpc(axis[m])
        for n in range(N + 1):
            vals[0][n] = ig * axis[n]
        if method == "columns":
            _fill_columns(vals)
        elif method == "quad":
            _fill_quads(vals)
        else:
            raise ValueError(f"unknown method {method!r}")
        out = np.array([[complex(z) for z in row] for row in vals])
    if not np.all(np.isfinite(out)):
        raise PropagationError("interior", "non-finite value")
    return DiscreteHolomorphic(domain, out, np.ones(M), -np.ones(N), lam,
                               meta={"kind": "power", "gamma": float(gamma)})


def power_recursion_residual(g: DiscreteHolomorphic, gamma: float) -> np.ndarray:
    """Relative residual of the power-function recursion at every vertex where
    all needed neighbours exist (``m >= 1`` and ``n >= 1`` interior, plus the
    positive axes).  Entries that cannot be evaluated are NaN."""
    v = g.values
    a, b = v.shape
    out = np.full((a, b), np.nan)
    m0, n0 = g.domain.m_lo, g.domain.n_lo
    for i in range(a):
        for j in range(b):
            m, n = i + m0, j + n0
            if (m, n) == (0, 0):
                continue
            rhs = 0j
            okay = True
            for k, step in ((m, (1, 0)), (n, (0, 1))):
                if k == 0:
                    continue
                ip, jp = i + step[0], j + step[1]
                im, jm = i - step[0], j - step[1]
                if not (0 <= im and 0 <= jm and ip < a and jp < b):
                    okay = False
                    break
                up, mid, lo = v[ip, jp], v[i, j], v[im, jm]
                rhs += 2 * k * (up - mid) * (mid - lo) / (up - lo)
            if okay:
                lhs = gamma * v[i, j]
                out[i, j] = abs(lhs - rhs) / abs(lhs)
    return out


# -------------------------------------------------------------------- duality

def dual_function(g: DiscreteHolomorphic, init: complex = 0.0, tol: float = 1e-12) -> DiscreteHolomorphic:
    """``g_hat`` with ``g_hat_q - g_hat_p = -alpha_pq / (g_q - g_p)``.

    Propagated along the first row, then up every column; closure around
    every quad is checked against ``tol`` (relative to the increment sizes).
    """
    check_edges(g)
    inc_h = -g.alpha_h[:, None] / g.dg_h
    inc_v = -g.alpha_v[None, :] / g.dg_v
    a, b = g.domain.shape
    vals = np.empty((a, b), dtype=complex)
    vals[0, 0] = init
    vals[1:, 0] = init + np.cumsum(inc_h[:, 0])
    vals[:, 1:] = vals[:, :1] + np.cumsum(inc_v, axis=1)
    loop = inc_h[:, :-1] + inc_v[1:, :] - inc_h[:, 1:] - inc_v[:-1, :]
    scale = np.maximum.reduce([np.abs(inc_h[:, :-1]), np.abs(inc_v[1:, :]),
                               np.abs(inc_h[:, 1:]), np.abs(inc_v[:-1, :])])
    defect = float(np.max(np.abs(loop) / scale))
    if defect > tol:
        raise ClosureError(f"dual function not closed: relative defect {defect:.3e}")
    return DiscreteHolomorphic(g.domain, vals, g.alpha_h, g.alpha_v, g.lam, g.rotated,
                               meta={**g.meta, "dual": True})


def dual_closure_defect(g: DiscreteHolomorphic) -> float:
    """Largest absolute sum of dual increments around a quad."""
    inc_h = -g.alpha_h[:, None] / g.dg_h
    inc_v = -g.alpha_v[None, :] / g.dg_v
    loop = inc_h[:, :-1] + inc_v[1:, :] - inc_h[:, 1:] - inc_v[:-1, :]
    return float(np.max(np.abs(loop)))


# ------------------------------------------------------------------- rotation

def rotate_domain_90(domain: LatticeDomain, g: DiscreteHolomorphic):
    """Normalize so that ``lam * alpha < 0`` exactly on vertical edges.

    Relabels ``(m, n) -> (n, -m)`` when the negative products sit on the
    horizontal edges; horizontal and vertical weights swap roles.  Returns
    ``(domain, g)``, unchanged if already normalized.
    """
    if domain != g.domain:
        raise DomainError("g is not defined on this domain")
    if np.all(g.lam * g.alpha_v < 0):
        return domain, g
    if not np.all(g.lam * g.alpha_h < 0):
        raise ValueError("weights do not have the sign pattern of a discrete holomorphic function")
    new_domain = domain.rotated()
    vals = g.values[::-1, :].T
    ng = DiscreteHolomorphic(new_domain, vals, g.alpha_v.copy(), g.alpha_h[::-1].copy(),
                             g.lam, not g.rotated, meta=dict(g.meta))
    return new_domain, ng


def normalize(g: DiscreteHolomorphic) -> DiscreteHolomorphic:
    return rotate_domain_90(g.domain, g)[1]
