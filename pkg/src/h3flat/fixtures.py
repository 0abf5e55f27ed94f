"""Named example functions shipped as data.

Seed values are stored as exact symbolic expressions and evaluated at load
time; the remaining values follow from the prescribed cross ratio.
"""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources

import numpy as np
import sympy

from .dholo import DiscreteHolomorphic, gen_exp, solve_fourth_vertex
from .errors import DomainError
from .lattice import build_domain


@lru_cache(maxsize=None)
def _table() -> dict:
    with resources.files("h3flat").joinpath("data/fixtures.json").open() as fh:
        return json.load(fh)


def fixture_names() -> list[str]:
    return sorted(_table())


def fixture_spec(name: str) -> dict:
    try:
        return dict(_table()[name])
    except KeyError:
        raise DomainError(f"unknown fixture {name!r}; known: {', '.join(fixture_names())}") from None


def evaluate(expr: str, digits: int = 30) -> complex:
    """Numeric value of a stored symbolic expression."""
    return complex(sympy.N(sympy.sympify(expr), digits))


def _extend(domain, known: dict, target: complex) -> np.ndarray:
    vals = dict(known)
    quads = list(domain.quads)
    progress = True
    while progress and len(vals) < len(domain.vertices):
        progress = False
        for quad in quads:
            missing = [v for v in quad if v not in vals]
            if len(missing) != 1:
                continue
            labels = dict(zip("pqrs", quad))
            unknown = next(k for k, v in labels.items() if v == missing[0])
            vals[missing[0]] = solve_fourth_vertex(
                {k: vals[v] for k, v in labels.items() if k != unknown}, unknown, target)
            progress = True
    if len(vals) < len(domain.vertices):
        raise DomainError("seed values do not determine the function")
    out = np.empty(domain.shape, dtype=complex)
    for v, z in vals.items():
        out[domain.index(v)] = z
    return out


def load_fixture(name: str, lam: float | None = None) -> DiscreteHolomorphic:
    spec = fixture_spec(name)
    lam = float(sympy.Rational(spec["lambda"])) if lam is None else lam
    if spec.get("generator") == "exp":
        a, b = spec["size"]
        g = gen_exp(evaluate(spec["c"]), build_domain(0, a - 1, 0, b - 1), lam)
        return DiscreteHolomorphic(g.domain, g.values, g.alpha_h, g.alpha_v, lam,
                                   meta={**g.meta, "fixture": name})
    domain = build_domain(*spec["domain"])
    seeds = {tuple(int(x) for x in k.split(",")): evaluate(v) for k, v in spec["seeds"].items()}
    values = _extend(domain, seeds, spec["cross_ratio"])
    a, b = domain.shape
    return DiscreteHolomorphic(domain, values, np.full(a - 1, float(spec["alpha_h"])),
                               np.full(b - 1, float(spec["alpha_v"])), lam,
                               meta={"kind": "fixture", "fixture": name})
