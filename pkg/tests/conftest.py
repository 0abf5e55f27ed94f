import sys
from fractions import Fraction
from functools import lru_cache

import pytest

from h3flat import dholo, frames
from h3flat.fixtures import load_fixture
from h3flat.lattice import build_domain
from h3flat.surfaces import build_surface

FOUR_THIRDS = Fraction(4, 3)


@lru_cache(maxsize=None)
def flat_function(kind: str, size: int = 15, lam: float = 0.01):
    """Normalized test functions on ``size x size`` vertices."""
    if kind not in ("linear", "exp", "power"):
        return dholo.normalize(load_fixture(kind, lam))
    dom = build_domain(0, size - 1, 0, size - 1)
    if kind == "linear":
        g = dholo.gen_linear(1.0, dom, lam)
    elif kind == "exp":
        g = dholo.gen_exp(0.3j, dom, lam)
    elif kind == "power":
        g = dholo.gen_power(FOUR_THIRDS, size - 1, size - 1, lam)
    return dholo.normalize(g)


@lru_cache(maxsize=None)
def flat_surface(kind: str, size: int = 15, lam: float = 0.01):
    g = flat_function(kind, size, lam)
    return build_surface(frames.integrate_E(g), g)


@pytest.fixture(scope="session")
def power15():
    return flat_surface("power", 15)


@pytest.fixture(scope="session")
def linear10():
    return flat_surface("linear", 10)


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
