import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from floquetkit.errors import DimensionMismatch, PolySyntaxError, UnknownVariable
from floquetkit.expr import (Polynomial, compile_polynomials, differentiate, evaluate,
                             parse_polynomial, poly_combine, to_fraction)

XY = ("x", "y")
XYZ = ("x", "y", "z")
XYZW = ("x", "y", "z", "w")


def P(text, variables=XY, params=None):
    return parse_polynomial(text, variables, params)


# -- parsing ---------------------------------------------------------------

def test_parse_circle_terms():
    p = P("x^2 + y^2 - 1")
    assert p.terms == {(2, 0): 1, (0, 2): 1, (0, 0): -1}


def test_unbound_names_are_unknown_variables():
    with pytest.raises(UnknownVariable) as info:
        P("-2*q*(x^2-y^2) - a")
    assert info.value.name == "q"
    p = P("-2*q*(x^2-y^2) - a", params={"q": Fraction(1, 10), "a": 1})
    assert p == P("-1/5*x^2 + 1/5*y^2 - 1")


@pytest.mark.parametrize("bad", ["x^-1", "x^1.5", "x^y", "x^2^2", "2 x", "x y",
                                 "(x + 1", "x + ", "", "x / y", "x/0", "x $ y"])
def test_syntax_errors(bad):
    with pytest.raises(PolySyntaxError):
        P(bad)


def test_syntax_error_has_caret():
    with pytest.raises(PolySyntaxError) as info:
        P("x + 2 y")
    assert "^" in str(info.value).splitlines()[-1]


def test_literals_and_constant_division():
    assert P("0.25*x") == P("x/4") == P("1/4*x")
    assert P("x**3") == P("x^3")
    assert P("(x + y)^0") == P("1")
    assert P("-(x - y)") == P("y - x")


def test_to_fraction():
    assert to_fraction("0.1") == Fraction(1, 10)
    assert to_fraction("-3/4") == Fraction(-3, 4)
    assert to_fraction(0.1) == Fraction(1, 10)
    assert float(to_fraction(math.pi)) == math.pi
    with pytest.raises(ValueError):
        to_fraction(float("nan"))


# -- algebra -------------------------------------------------------------

def test_differentiate():
    assert differentiate(P("x^2 + y^2 - 1"), "x") == P("2*x")
    f2 = P("z", XYZ)
    assert differentiate(f2, "z") == P("1", XYZ)
    assert differentiate(P("7"), "x").is_zero()
    with pytest.raises(UnknownVariable):
        differentiate(P("x"), "q")


def test_evaluate():
    f = P("x^2 + y^2 - 1")
    for t in np.linspace(0, 2 * math.pi, 17):
        assert abs(evaluate(f, (math.cos(t), math.sin(t)))) < 1e-15
    assert evaluate(P("x - z", XYZW), (1, 0, 1, 0)) == 0
    assert evaluate(P("2*x"), (3, 99)) == 6
    with pytest.raises(DimensionMismatch):
        evaluate(f, (1, 2, 3))


def test_combine():
    assert poly_combine(P("x + y"), P("x - y"), "mul") == P("x^2 - y^2")
    p = P("x^3 - 2*x*y + 5")
    assert poly_combine(p, p, "sub").is_zero()
    assert poly_combine(p, p, "sub").render() == "0"
    with pytest.raises(DimensionMismatch):
        poly_combine(P("x"), P("x", XYZ), "add")


def test_example1_row1_identity_term():
    # (x^2 + y^2 - 1)(-2x^2 - 2y^2), expanded independently term by term
    f = P("x^2 + y^2 - 1", XYZW)
    k = P("-2*x^2 - 2*y^2", XYZW)
    expected = {}
    for ea, ca in f.terms.items():
        for eb, cb in k.terms.items():
            e = tuple(a + b for a, b in zip(ea, eb))
            expected[e] = expected.get(e, 0) + ca * cb
    prod = f * k
    assert prod.degree() == 4
    assert prod == Polynomial(XYZW, expected)
    assert prod == P("-2*x^4 - 4*x^2*y^2 - 2*y^4 + 2*x^2 + 2*y^2", XYZW)


def test_render_order_and_fractions():
    assert P("y^2 - 1 + x^2").render() == "x^2 + y^2 - 1"
    assert P("3*x/4").render() == "3/4*x"
    assert str(P("-x*y + 2")) == "-x*y + 2"


def test_zero_coefficients_dropped():
    p = P("x - x + y")
    assert p.terms == {(0, 1): 1}
    assert Polynomial(XY, {(1, 0): 0}).is_zero()
    assert Polynomial.zero(XY).degree() == -1


def test_compile_matches_evaluate():
    polys = [P("x^2*y - 3/7*y^3 + 1"), P("x - y"), P("0")]
    fn = compile_polynomials(polys)
    rng = np.random.default_rng(3)
    for _ in range(20):
        pt = rng.uniform(-2, 2, 2)
        np.testing.assert_allclose(fn(pt), [p.evaluate(pt) for p in polys], rtol=1e-13,
                                   atol=1e-13)


# -- properties ------------------------------------------------------------

coeffs = st.fractions(min_value=-20, max_value=20, max_denominator=12)
exponents = st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2))
polys = st.dictionaries(exponents, coeffs, max_size=6).map(lambda d: Polynomial(XYZ, d))
points = st.tuples(*[st.floats(-2, 2, allow_nan=False)] * 3)


@settings(max_examples=200, deadline=None)
@given(polys)
def test_render_parse_roundtrip(p):
    assert parse_polynomial(p.render(), XYZ) == p


@settings(max_examples=100, deadline=None)
@given(polys, polys, coeffs, coeffs)
def test_derivative_is_linear(p, q, a, b):
    for v in XYZ:
        lhs = (p.scale(a) + q.scale(b)).differentiate(v)
        assert lhs == p.differentiate(v).scale(a) + q.differentiate(v).scale(b)


@settings(max_examples=100, deadline=None)
@given(polys, polys)
def test_product_rule(p, q):
    for v in XYZ:
        assert (p * q).differentiate(v) == p.differentiate(v) * q + p * q.differentiate(v)


@settings(max_examples=100, deadline=None)
@given(polys, polys, points)
def test_multiplication_commutes_with_evaluation(p, q, pt):
    pv, qv = p.evaluate(pt), q.evaluate(pt)
    assert (p * q).evaluate(pt) == pytest.approx(pv * qv, rel=1e-9, abs=1e-6)
    assert (p + q).evaluate(pt) == pytest.approx(pv + qv, rel=1e-9, abs=1e-9)
