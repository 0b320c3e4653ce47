import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerjet import expr as ex
from finslerjet import jets
from finslerjet.errors import (DivisionBySingularJet, ExprSyntaxError, JetError,
                               NonLiteralExponent, UnknownIdentifier)


def at(text, n, x, y):
    return ex.evaluate(ex.parse(text, n), ex.chart_env(x, y))


def test_example_metric_radicand():
    assert at("(y1)^2 + (x1)^2*(y2)^3/y3", 3, (2, 0, 0), (1, 2, 1)) == 33.0


def test_euclidean_norm():
    assert at("sqrt((y1)^2+(y2)^2+(y3)^2)", 3, (0, 0, 0), (3, 4, 0)) == 5.0


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        ex.parse("y4", 3)
    with pytest.raises(UnknownIdentifier):
        ex.parse("z1 + y1", 3)
    with pytest.raises(UnknownIdentifier):
        ex.parse("x0", 3)


def test_syntax_error_offset():
    with pytest.raises(ExprSyntaxError) as info:
        ex.parse("y1 + * y2", 3)
    assert info.value.offset == 5


def test_non_literal_exponent():
    for text in ["y1^y2", "y1^(y2)", "y1^2^3", "y1^(1/y2)"]:
        with pytest.raises(NonLiteralExponent):
            ex.parse(text, 3)


def test_precedence():
    assert at("-y1^2", 1, (0,), (3,)) == -9.0
    assert at("2*y1^2", 1, (0,), (3,)) == 18.0
    assert at("1 - 2 - 3", 1, (0,), (0,)) == -4.0
    assert at("8 / 4 / 2", 1, (0,), (0,)) == 1.0
    assert at("y1^(3/2)", 1, (0,), (4,)) == pytest.approx(8.0)
    assert at("y1^-1", 1, (0,), (4,)) == 0.25


def test_literal_over_jets_is_constant_jet():
    seeds = jets.seed_all([1.0, 2.0], 2)
    v = ex.evaluate(ex.parse("7", 1), ex.chart_env(seeds[:1], seeds[1:]))
    assert isinstance(v, jets.Jet) and v.value == 7.0 and not v.coeffs[1:].any()


def test_bilinear_mixed_partial():
    seeds = jets.seed_all([2.0, 1.0], 2)
    v = ex.evaluate(ex.parse("x1*y1", 1), ex.chart_env(seeds[:1], seeds[1:]))
    assert jets.partial(v, (1, 1)) == 1.0


def test_division_error_is_annotated():
    seeds = jets.seed_all([1.0, 1.0, 1.0, 1.0, 1.0, 0.0], 2)
    with pytest.raises(DivisionBySingularJet) as info:
        ex.evaluate(ex.parse("y1 + 1/y3", 3), ex.chart_env(seeds[:3], seeds[3:]))
    assert "y3" in info.value.subexpression
    with pytest.raises(DivisionBySingularJet):
        at("1/y3", 3, (1, 1, 1), (1, 1, 0))


ROUND_TRIP = [
    "1", "-2.5", "x1", "y3", "x1 + y2 - 3", "x1*y1/y2", "-(x1 - y1)", "--y1",
    "y1^2", "y1^-2", "y1^(3/2)", "y1^(-1/3)", "(x1 + y1)^0.5", "sqrt(y1*y1 + y2*y2)",
    "sqrt((y1)^2 + (x1)^2*(y2)^3/y3)", "x1*sqrt(((y1)^2*y3 + (y2)^3)/y3)",
    "-(x1*y1 + x2*y2 + x3*y3)", "((y1))", "1e-3*y1 + 2E2", ".5*y2",
    "y1^2 - -y2", "x1/(y1*y2)^2", "sqrt(sqrt(y1))^3",
]


@pytest.mark.parametrize("text", ROUND_TRIP)
def test_round_trip(text):
    ast = ex.parse(text, 3)
    again = ex.parse(ex.pretty(ast), 3)
    assert again == ast
    assert ex.pretty(again) == ex.pretty(ast)


NEGATIVE = [
    "", "   ", "(y1", "y1)", "y1 +", "* y1", "y1 ** 2", "sqrt y1", "sqrt()", "y1 y2",
    "y1^", "y1^()", "2..3", "y1 $ y2", "((y1)", "y1^(2/0)", "sqrt(y1,y2)", "x1 +* x2",
]


@pytest.mark.parametrize("text", NEGATIVE)
def test_negative_corpus(text):
    with pytest.raises(SyntaxError):
        ex.parse(text, 3)


@settings(max_examples=200, deadline=None)
@given(st.text(alphabet="xy123+-*/^() .sqrt0", max_size=20))
def test_parser_never_crashes(text):
    try:
        ex.parse(text, 3)
    except SyntaxError:
        pass


coords = st.floats(min_value=0.3, max_value=3.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(ROUND_TRIP[:20]), st.lists(coords, min_size=6, max_size=6))
def test_float_equals_order_zero_jet(text, z):
    ast = ex.parse(text, 3)
    try:
        f = ex.evaluate(ast, ex.chart_env(z[:3], z[3:]))
    except JetError:
        return
    seeds = jets.seed_all(z, 0)
    j = ex.evaluate(ast, ex.chart_env(seeds[:3], seeds[3:]))
    assert j.value == f  # exact, same algorithm on both paths


def test_guard_value():
    g = ex.Guard(ex.parse("x1*y1", 3), "x1*y1")
    assert g.value(ex.chart_env((2, 0, 0), (3, 0, 0))) == 6.0
