"""Exception hierarchy shared by all modules."""


class H3FlatError(Exception):
    """Base class for every error raised by the package."""


class DomainError(H3FlatError, ValueError):
    """Empty or degenerate lattice ranges, or a point outside the domain."""


class DegenerateEdgeError(H3FlatError):
    """Adjacent values of a discrete holomorphic function coincide."""

    def __init__(self, edge, gap):
        self.edge = edge
        self.gap = gap
        super().__init__(f"degenerate edge {edge}: |g_q - g_p| = {gap:.3e}")


class PropagationError(H3FlatError):
    """A recurrence hit a zero divisor."""

    def __init__(self, vertex, message="division by zero during propagation"):
        self.vertex = vertex
        super().__init__(f"{message} at {vertex}")


class ClosureError(H3FlatError):
    """A quantity that should be path independent is not."""


class ModelError(H3FlatError, ValueError):
    """Input does not satisfy the hyperboloid / Hermitian model contract."""


class SingularTransitionError(H3FlatError):
    """A frame transition matrix is singular (lambda * alpha == 1)."""

    def __init__(self, edge):
        self.edge = edge
        super().__init__(f"singular frame transition on edge {edge}")


class NoIntersectionError(H3FlatError):
    """Normal geodesics of an edge do not meet (lambda * alpha >= 0)."""


class CoincidentVerticesError(H3FlatError):
    """Two vertices of a quad coincide, so a circle through them is undefined."""

    def __init__(self, quad):
        self.quad = quad
        super().__init__(f"coincident vertices in quad {quad}")
