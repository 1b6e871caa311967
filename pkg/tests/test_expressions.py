import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hamzoo.expressions import (Binary, Const, DomainError, ParseError, Unary,
                                UnknownSymbol, Var, differentiate, eval_expr,
                                fold, parse, parse_potential, to_source)

# expressions exercising every operator, function and precedence corner
CORPUS = [
    "0.5*x^2", "0.25*x^4", "-cos(x)", "x", "3.5", "x+1", "x-1-2", "x*x*x",
    "x/2/3", "x^2", "x^3", "x^-2", "(x+1)*(x-1)",
    "sin(x)", "cos(x)", "exp(x)", "exp(-x^2)", "sin(x)*cos(x)", "sin(x*x)",
    "x*sin(x)+cos(x)", "1/(1+x^2)", "x^2/(1+x^2)", "exp(x)/x", "-x",
    "--x", "-(x+1)", "-x^2", "(-x)^2", "x^2^3", "2*x+3*x^2-4*x^3",
    "0.1*x^5-0.2*x^3+0.3*x", "exp(sin(x))", "cos(exp(x))", "sin(x)/x",
    "x/(x+2)", "exp(x)*exp(-x)", "1e-2*x^2", "2.5e3*x", "x^0.5",
    "x*(x+1)*(x+2)", "sin(x+1)", "cos(2*x)", "exp(x/2)", "x-x",
    "3*(x-1)^2", "x^2*exp(-x)", "1+2*x", "(x/2)^4", "sin(cos(x))",
    "0.5*x^2+0.25*x^4",
]


def test_parse_potential_quadratic():
    pot = parse_potential("0.5*x^2")
    assert pot.value(2.0) == pytest.approx(2.0, abs=1e-15)
    assert pot.gradient(2.0) == pytest.approx(2.0, abs=1e-15)


def test_parse_potential_quartic():
    pot = parse_potential("0.25*x^4")
    assert pot.dv == Binary("^", Var(), Const(3.0))
    assert pot.gradient(1.5) == pytest.approx(3.375, abs=1e-15)


def test_parse_potential_pendulum():
    pot = parse_potential("-cos(x)")
    assert pot.dv == Unary("sin", Var())
    assert pot.gradient(0.0) == 0.0


def test_differentiate_power_rule():
    assert differentiate(parse("x^2")) == Binary("*", Const(2.0), Var())


def test_differentiate_product_rule():
    d = differentiate(parse("sin(x)*x"))
    expected = Binary("+", Binary("*", Unary("cos", Var()), Var()), Unary("sin", Var()))
    assert d == expected


def test_differentiate_constant():
    assert differentiate(Const(7.0)) == Const(0.0)


def test_eval_examples():
    assert eval_expr(parse("0.5*x^2"), 3.0) == 4.5
    assert eval_expr(parse("exp(x)"), 0.0) == 1.0
    with pytest.raises(DomainError):
        eval_expr(parse("1/x"), 0.0)
    with pytest.raises(DomainError):
        eval_expr(parse("log(x)"), -1.0)


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as info:
        parse("0.5*")
    assert info.value.position == 4
    with pytest.raises(UnknownSymbol) as info:
        parse("x+y")
    assert info.value.name == "y"
    with pytest.raises(ParseError):
        parse("x^x")
    with pytest.raises(ParseError):
        parse("sin x")
    with pytest.raises(ParseError):
        parse("x$2")
    with pytest.raises(ParseError):
        parse("1.2.3*x")


def test_unary_minus_binds_looser_than_power():
    assert eval_expr(parse("-x^2"), 3.0) == -9.0
    assert eval_expr(parse("(-x)^2"), 3.0) == 9.0


def test_power_right_associative():
    assert eval_expr(parse("x^2^3"), 2.0) == 2.0 ** 8


def test_roundtrip_corpus_structural_and_numeric():
    rng = random.Random(7)
    xs = [rng.uniform(0.2, 2.0) for _ in range(20)]
    for source in CORPUS:
        tree = parse(source)
        reparsed = parse(to_source(tree))
        assert reparsed == tree, source
        for x in xs:
            a = eval_expr(tree, x)
            b = eval_expr(reparsed, x)
            assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12), source


def test_derivative_matches_central_differences():
    h = 1e-6
    rng = random.Random(11)
    for source in CORPUS:
        pot = parse_potential(source)
        for _ in range(5):
            x = rng.uniform(0.3, 1.8)
            try:
                exact = pot.gradient(x)
                fd = (pot.value(x + h) - pot.value(x - h)) / (2.0 * h)
            except DomainError:
                continue
            assert abs(exact - fd) <= 1e-6 * (1.0 + abs(exact)), source


@given(a=st.floats(-3, 3, allow_nan=False), b=st.floats(-3, 3, allow_nan=False),
       i=st.integers(0, len(CORPUS) - 1), j=st.integers(0, len(CORPUS) - 1),
       x=st.floats(0.3, 1.7))
@settings(max_examples=60, deadline=None)
def test_differentiation_is_linear(a, b, i, j, x):
    f, g = parse(CORPUS[i]), parse(CORPUS[j])
    combo = Binary("+", Binary("*", Const(a), f), Binary("*", Const(b), g))
    try:
        lhs = eval_expr(differentiate(combo), x)
        rhs = a * eval_expr(differentiate(f), x) + b * eval_expr(differentiate(g), x)
    except DomainError:
        return
    if not (math.isfinite(lhs) and math.isfinite(rhs)):
        return
    assert math.isclose(lhs, rhs, rel_tol=1e-10, abs_tol=1e-10)


def _expr_trees():
    leaf = st.one_of(
        st.just(Var()),
        st.builds(Const, st.floats(-5, 5, allow_nan=False, allow_infinity=False)),
    )

    def extend(children):
        return st.one_of(
            st.builds(Unary, st.sampled_from(["neg", "sin", "cos", "exp"]), children),
            st.builds(lambda op, l, r: Binary(op, l, r),
                      st.sampled_from(["+", "-", "*", "/"]), children, children),
            st.builds(lambda base, expo: Binary("^", base, Const(float(expo))),
                      children, st.integers(0, 4)),
        )

    return st.recursive(leaf, extend, max_leaves=12)


@given(tree=_expr_trees())
@settings(max_examples=120, deadline=None)
def test_print_parse_roundtrip_on_random_trees(tree):
    folded = fold(tree)
    assert parse(to_source(folded)) == folded


def test_potential_is_immutable():
    pot = parse_potential("x^2")
    with pytest.raises(AttributeError):
        pot.v = Const(1.0)
