"""Rectangular subdomains of the integer lattice.

Array layout used throughout the package: a vertex ``(m, n)`` lives at array
index ``[m - m_lo, n - n_lo]``.  Enumeration order is row-major, i.e. sorted
by ``(n, m)``: the row ``n = n_lo`` first, left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterator

from .errors import DomainError

Vertex = tuple[int, int]
Edge = tuple[Vertex, Vertex]
Quad = tuple[Vertex, Vertex, Vertex, Vertex]

HORIZONTAL = "horizontal"
VERTICAL = "vertical"


def canonical_edge(p: Vertex, q: Vertex) -> Edge:
    """Orientation-free edge identity (lexicographically smaller endpoint first)."""
    if abs(p[0] - q[0]) + abs(p[1] - q[1]) != 1:
        raise DomainError(f"{p} and {q} are not lattice neighbours")
    return (p, q) if p <= q else (q, p)


def edge_class(p: Vertex, q: Vertex) -> str:
    canonical_edge(p, q)
    return HORIZONTAL if p[1] == q[1] else VERTICAL


@dataclass(frozen=True)
class LatticeDomain:
    m_lo: int
    m_hi: int
    n_lo: int
    n_hi: int

    def __post_init__(self):
        for name in ("m_lo", "m_hi", "n_lo", "n_hi"):
            if int(getattr(self, name)) != getattr(self, name):
                raise DomainError(f"{name} must be an integer")
        if not (self.m_lo < self.m_hi and self.n_lo < self.n_hi):
            raise DomainError(
                f"degenerate ranges [{self.m_lo},{self.m_hi}]x[{self.n_lo},{self.n_hi}]"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m_hi - self.m_lo + 1, self.n_hi - self.n_lo + 1)

    @property
    def num_vertices(self) -> int:
        a, b = self.shape
        return a * b

    def __contains__(self, v) -> bool:
        m, n = v
        return self.m_lo <= m <= self.m_hi and self.n_lo <= n <= self.n_hi

    def index(self, v: Vertex) -> tuple[int, int]:
        if v not in self:
            raise DomainError(f"vertex {v} outside domain")
        return (v[0] - self.m_lo, v[1] - self.n_lo)

    def vertex(self, i: int, j: int) -> Vertex:
        return (i + self.m_lo, j + self.n_lo)

    @cached_property
    def vertices(self) -> list[Vertex]:
        return [(m, n) for n in range(self.n_lo, self.n_hi + 1)
                for m in range(self.m_lo, self.m_hi + 1)]

    @cached_property
    def horizontal_edges(self) -> list[Edge]:
        return [((m, n), (m + 1, n)) for n in range(self.n_lo, self.n_hi + 1)
                for m in range(self.m_lo, self.m_hi)]

    @cached_property
    def vertical_edges(self) -> list[Edge]:
        return [((m, n), (m, n + 1)) for n in range(self.n_lo, self.n_hi)
                for m in range(self.m_lo, self.m_hi + 1)]

    @property
    def edges(self) -> list[Edge]:
        return self.horizontal_edges + self.vertical_edges

    @cached_property
    def quads(self) -> list[Quad]:
        """Quads ``(p, q, r, s)`` counterclockwise from the lower-left corner."""
        return [((m, n), (m + 1, n), (m + 1, n + 1), (m, n + 1))
                for n in range(self.n_lo, self.n_hi)
                for m in range(self.m_lo, self.m_hi)]

    def has_edge(self, p: Vertex, q: Vertex) -> bool:
        try:
            canonical_edge(p, q)
        except DomainError:
            return False
        return p in self and q in self

    def iter_quads(self) -> Iterator[Quad]:
        return iter(self.quads)

    def rotated(self) -> "LatticeDomain":
        """Image of the domain under ``(m, n) -> (n, -m)``."""
        return LatticeDomain(self.n_lo, self.n_hi, -self.m_hi, -self.m_lo)


def build_domain(m_lo: int, m_hi: int, n_lo: int, n_hi: int) -> LatticeDomain:
    return LatticeDomain(m_lo, m_hi, n_lo, n_hi)


def rotate_vertex(v: Vertex) -> Vertex:
    return (v[1], -v[0])


def unrotate_vertex(v: Vertex) -> Vertex:
    return (-v[1], v[0])
