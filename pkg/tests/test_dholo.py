import cmath
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from h3flat import dholo
from h3flat.dholo import DiscreteHolomorphic
from h3flat.errors import ClosureError, DegenerateEdgeError, DomainError
from h3flat.lattice import build_domain

from conftest import FOUR_THIRDS


def pochhammer_axis(gamma, k):
    """Independent evaluation of the closed axis formula with mpmath rising factorials."""
    h = mp.mpf(gamma.numerator) / gamma.denominator / 2
    if k == 0:
        return mp.mpf(0)
    m, odd = divmod(k, 2)
    if odd:
        return -mp.rf(h, m + 1) / mp.rf(-h, m + 1)
    return -m * mp.rf(h, m) / mp.rf(-h, m + 1)


def cr_direct(a, b, c, d):
    return (b - a) / (c - b) * (d - c) / (a - d)


# ---------------------------------------------------------------- cross ratio

def test_linear_cross_ratio_is_minus_one():
    g = dholo.gen_linear(1, build_domain(0, 3, 0, 3))
    for quad in g.domain.quads:
        assert dholo.cross_ratio(g, quad) == pytest.approx(-1, abs=1e-15)


@given(st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_linear_cross_ratio_scale_invariant(c):
    g = dholo.gen_linear(c, build_domain(0, 2, 0, 2))
    cr = dholo.cross_ratios(g.values)
    assert np.allclose(cr, -1, atol=1e-12)


def test_cross_ratio_matches_hand_evaluation():
    g = dholo.gen_exp(0.3, build_domain(0, 1, 0, 1))
    z = [g[v] for v in g.domain.quads[0]]
    assert dholo.cross_ratio(g, g.domain.quads[0]) == pytest.approx(cr_direct(*z), rel=1e-14)


def test_power_cross_ratio_at_origin():
    g = dholo.gen_power(FOUR_THIRDS, 3, 3)
    assert dholo.cross_ratio(g, ((0, 0), (1, 0), (1, 1), (0, 1))) == pytest.approx(-1, abs=1e-12)


def test_coincident_values_raise():
    dom = build_domain(0, 1, 0, 1)
    g = DiscreteHolomorphic(dom, np.ones((2, 2)), [1.0], [-1.0])
    with pytest.raises(DegenerateEdgeError):
        dholo.cross_ratio(g, dom.quads[0])
    with pytest.raises(DegenerateEdgeError):
        dholo.validate(g)


# ------------------------------------------------------------------ validate

def test_validate_accepts_either_sign_split():
    dom = build_domain(0, 4, 0, 4)
    g = dholo.gen_linear(1, dom)
    assert dholo.validate(g, 1e-12)
    swapped = DiscreteHolomorphic(dom, g.values, -g.alpha_h, -g.alpha_v, g.lam)
    assert dholo.validate(swapped, 1e-12)


def test_validate_locates_perturbed_vertex():
    dom = build_domain(0, 4, 0, 4)
    g = dholo.gen_linear(1, dom)
    vals = g.values.copy()
    vals[2, 3] += 1e-3
    bad = DiscreteHolomorphic(dom, vals, g.alpha_h, g.alpha_v)
    rep = dholo.validate(bad, 1e-9)
    assert not rep.ok
    assert (2, 3) in rep.worst_quad
    assert all((2, 3) in quad for quad, _ in rep.failures)
    assert rep.worst_residual > 1e-4


def test_constant_function_is_degenerate():
    dom = build_domain(0, 2, 0, 2)
    with pytest.raises(DegenerateEdgeError):
        dholo.validate(DiscreteHolomorphic(dom, np.full((3, 3), 2 + 1j), [1, 1], [-1, -1]))


@given(st.floats(0.01, 100) | st.floats(-100, -0.01))
def test_lambda_rescaling_keeps_verdict(lam):
    g = dholo.gen_exp(0.3j, build_domain(0, 5, 0, 5), lam)
    rep = dholo.validate(g, 1e-12)
    assert rep.ok
    assert np.allclose(dholo.cross_ratios(g.values), dholo.exp_cross_ratio(0.3j), atol=1e-12)


# ---------------------------------------------------------------- generators

def test_linear_values_and_weights():
    g = dholo.gen_linear(1, build_domain(0, 3, 0, 4))
    assert g[(2, 3)] == 2 + 3j
    assert np.all(g.alpha_h == 1) and np.all(g.alpha_v == -1)
    with pytest.raises(ValueError):
        dholo.gen_linear(0, build_domain(0, 1, 0, 1))


def test_linear_imaginary_scale_cross_ratio():
    g = dholo.gen_linear(1j, build_domain(0, 1, 0, 1))
    assert dholo.cross_ratio(g, g.domain.quads[0]) == pytest.approx(-1)


@pytest.mark.parametrize("c", [0.3, -0.7, 0.3j, 1.2j])
def test_exp_cross_ratio_constant_and_negative(c):
    g = dholo.gen_exp(c, build_domain(-2, 3, 0, 4))
    cr = dholo.cross_ratios(g.values)
    assert np.ptp(cr.real) < 1e-12 and np.max(np.abs(cr.imag)) < 1e-12
    assert cr[0, 0].real < 0
    z = [cmath.exp(c * (m + 1j * n)) for m, n in ((0, 0), (1, 0), (1, 1), (0, 1))]
    assert cr[0, 0] == pytest.approx(cr_direct(*z), rel=1e-12)
    assert dholo.validate(g, 1e-12)


def test_exp_rejects_general_complex():
    with pytest.raises(ValueError):
        dholo.gen_exp(0.3 + 0.3j, build_domain(0, 1, 0, 1))
    with pytest.raises(ValueError):
        dholo.gen_exp(0, build_domain(0, 1, 0, 1))


def test_exp_values_on_unit_circle():
    g = dholo.gen_exp(1j * math.pi / 4, build_domain(0, 6, 0, 0 + 1))
    assert np.allclose(np.abs(g.values[:, 0]), 1)


def test_narrow_exp_variant():
    g = dholo.gen_exp_narrow(0.4, build_domain(0, 4, 0, 4))
    assert np.allclose(dholo.cross_ratios(g.values), -1, atol=1e-12)


@pytest.mark.parametrize("gamma", [Fraction(4, 3), Fraction(2, 3), Fraction(1, 2)])
def test_power_axes_match_pochhammer(gamma):
    g = dholo.gen_power(gamma, 20, 20)
    for k in range(21):
        ref = complex(pochhammer_axis(gamma, k))
        assert abs(g.values[k, 0] - ref) <= 1e-10 * max(abs(ref), 1e-300)
        assert abs(g.values[0, k] - dholo.i_pow(gamma) * ref) <= 1e-10 * max(abs(ref), 1e-300)


def test_power_four_thirds_spot_values():
    g = dholo.gen_power(FOUR_THIRDS, 4, 4)
    assert g[(0, 0)] == 0 and g[(1, 0)] == 1
    assert g[(2, 0)] == pytest.approx(3, rel=1e-14)
    assert g[(3, 0)] == pytest.approx(5, rel=1e-14)
    assert g[(0, 1)] == pytest.approx(cmath.exp(1j * math.pi * 2 / 3), rel=1e-14)


def test_power_recursion_and_fill_agreement():
    ga = dholo.gen_power(FOUR_THIRDS, 30, 30, method="columns")
    gq = dholo.gen_power(FOUR_THIRDS, 30, 30, method="quad")
    res = dholo.power_recursion_residual(ga, 4 / 3)
    assert np.nanmax(res) < 1e-9
    scale = np.maximum(np.abs(ga.values), 1e-300)
    assert np.max(np.abs(ga.values - gq.values) / np.where(scale > 0, scale, 1)) < 1e-9
    assert np.max(np.abs(dholo.cross_ratios(ga.values) + 1)) < 1e-9


def test_power_rejects_bad_gamma():
    for gamma in (0, 2, Fraction(5, 2), -1):
        with pytest.raises(ValueError):
            dholo.gen_power(gamma, 3, 3)


def test_power_is_properly_embedded():
    assert dholo.is_properly_embedded(dholo.gen_power(FOUR_THIRDS, 10, 10))


def test_collinear_function_not_embedded():
    dom = build_domain(0, 1, 0, 1)
    g = DiscreteHolomorphic(dom, np.array([[0, 3], [1, -1]], dtype=complex), [2.0], [-1.0])
    assert dholo.embedding_defects(g)


def test_fourth_vertex_solver():
    known = {"p": 0, "q": 1, "s": 1j}
    r = dholo.solve_fourth_vertex(known, "r")
    assert r == pytest.approx(1 + 1j)
    for unknown in "pqs":
        vals = {"p": 0.2, "q": 1.1 + 0.1j, "r": 1 + 1.3j, "s": -0.1 + 0.9j}
        target = cr_direct(vals["p"], vals["q"], vals["r"], vals["s"])
        given_ = {k: v for k, v in vals.items() if k != unknown}
        assert dholo.solve_fourth_vertex(given_, unknown, target) == pytest.approx(vals[unknown])


# -------------------------------------------------------------- duality

def test_dual_of_power_matches_complementary_exponent_on_axis():
    g = dholo.gen_power(FOUR_THIRDS, 8, 8)
    gh = dholo.dual_function(g)
    assert gh[(1, 0)] - gh[(0, 0)] == pytest.approx(-1)
    assert dholo.dual_closure_defect(g) < 1e-12
    other = dholo.gen_power(Fraction(2, 3), 8, 8)
    ratio = gh.values[1:, 0] / other.values[1:, 0]
    assert np.allclose(ratio, ratio[0], rtol=1e-10)
    assert np.allclose(dholo.cross_ratios(gh.values), -1, atol=1e-10)


def test_dual_of_linear_and_translation_invariance():
    g = dholo.gen_linear(1, build_domain(0, 3, 0, 3))
    gh = dholo.dual_function(g)
    assert np.allclose(np.diff(gh.values, axis=0), -1)
    assert np.allclose(np.diff(gh.values, axis=1), 1 / 1j)
    shifted = DiscreteHolomorphic(g.domain, g.values + (2 - 5j), g.alpha_h, g.alpha_v, g.lam)
    assert np.allclose(dholo.dual_function(shifted).values, gh.values)


def test_dual_nonclosing_input_rejected():
    dom = build_domain(0, 2, 0, 2)
    g = dholo.gen_linear(1, dom)
    vals = g.values.copy()
    vals[1, 1] += 0.1
    with pytest.raises(ClosureError):
        dholo.dual_function(DiscreteHolomorphic(dom, vals, g.alpha_h, g.alpha_v))


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["linear", "exp", "power"]), st.integers(3, 12))
def test_dual_closure_property(kind, size):
    dom = build_domain(0, size - 1, 0, size - 1)
    g = {"linear": lambda: dholo.gen_linear(1 + 0.5j, dom),
         "exp": lambda: dholo.gen_exp(0.2j, dom),
         "power": lambda: dholo.gen_power(FOUR_THIRDS, size - 1, size - 1)}[kind]()
    assert dholo.dual_closure_defect(g) < 1e-12 * max(1.0, float(np.max(np.abs(1 / g.dg_h))))


# ------------------------------------------------------------- normalisation

def test_rotation_identity_when_already_normalized():
    g = dholo.gen_linear(1, build_domain(0, 1, 0, 1), lam=1)
    dom, g2 = dholo.rotate_domain_90(g.domain, g)
    assert g2 is g and dom == g.domain


def test_rotation_moves_negative_weights_to_vertical_edges():
    dom = build_domain(0, 3, 0, 2)
    g = dholo.gen_linear(1, dom)
    flipped = DiscreteHolomorphic(dom, g.values, -g.alpha_h, -g.alpha_v, g.lam)
    assert np.all(flipped.lam * flipped.alpha_v > 0)
    new_dom, ng = dholo.rotate_domain_90(dom, flipped)
    assert ng.rotated and new_dom.shape == (3, 4)
    assert np.all(ng.lam_alpha_v < 0) and np.all(ng.lam_alpha_h > 0)
    assert dholo.validate(ng, 1e-12)
    assert ng[(0, 0)] == flipped[(0, 0)]
    assert ng[(2, -1)] == flipped[(1, 2)]


def test_rotation_wrong_domain():
    g = dholo.gen_linear(1, build_domain(0, 1, 0, 1))
    with pytest.raises(DomainError):
        dholo.rotate_domain_90(build_domain(0, 2, 0, 1), g)
