"""Expression language: parsing, printing, evaluation, dual-number partials."""

import math
import random

import pytest
from hypothesis import given, strategies as st

from hahnvar import (
    ArityError,
    DomainError,
    ExprSyntaxError,
    NotDifferentiable,
    UnboundVariable,
    UnknownIdentifier,
    compile_lagrangian,
    evaluate,
    parse,
    to_string,
)
from hahnvar.dsl import BinOp, partial_eval

PRODUCT_SRC = "(u0 + 0.5)^2 * (u1^2 - 1)^2"

# printing must survive one round trip unchanged and preserve values
CORPUS = [
    "t",
    "u0",
    "u9",
    "3",
    "3.5",
    "1e-3",
    "2.5e2",
    "-t",
    "- t + 1",
    "t + u0",
    "t - u0 - u1",
    "t*u0 + u1/u2",
    "t * (u0 + u1)",
    "(t + 1) * (t - 1)",
    "t^2",
    "t^2^3",
    "(t^2)^3",
    "-u0^2",
    "-(u0^2)",
    "t / (1 + t^2)",
    "sin(t)",
    "cos(t) + sin(u0)",
    "exp(-t)",
    "exp(t*u0)",
    "ln(1 + t^2)",
    "sqrt(1 + u0^2)",
    "abs(t - 1) + 1",
    "sin(cos(t))",
    "u0*u1*u2",
    "u0 + u1 + u2 + u3",
    "0.5*u1^2 + 0.2*u0^2 + 0.1*t*u0",
    PRODUCT_SRC,
    "(u0 - u1)^3",
    "1/(2 + sin(t))",
    "t^2 - 2*t + 1",
    "u1^2/2",
    "(t + u0)^2 / (1 + u1^2)",
    "sqrt(exp(t))",
    "ln(exp(t) + 1)",
    "abs(u0) + abs(u1)",
    "2*3 + 4*5",
    "2*(3 + 4)*5",
    "t - (u0 - u1)",
    "t - u0 + u1",
    "t / (2 + u0^2) / (2 + u1^2)",
    "-sin(t)",
    "sin(-t)",
    "((t))",
    "u0^2*u1 + u1^2*u0",
    "3.25e-1*t^3",
    "(1 + t)^3",
    "cos(t)^2 + sin(t)^2",
    "exp(ln(2 + t^2))",
    "sqrt(t^2 + 1) - 1",
]


def test_corpus_is_large_enough():
    assert len(CORPUS) >= 50


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip_preserves_tree(src):
    tree = parse(src)
    printed = to_string(tree)
    assert parse(printed) == tree
    assert to_string(parse(printed)) == printed


@pytest.mark.parametrize("src", CORPUS)
def test_round_trip_preserves_values(src):
    rng = random.Random(hash(src) & 0xFFFF)
    tree = parse(src)
    reparsed = parse(to_string(tree))
    for _ in range(5):
        env = {"t": rng.uniform(0.1, 2.0)}
        env.update({f"u{i}": rng.uniform(0.1, 2.0) for i in range(10)})
        assert evaluate(tree, env) == evaluate(reparsed, env)


def test_syntax_error_reports_position():
    with pytest.raises(ExprSyntaxError, match="position 3"):
        parse("(u2")
    with pytest.raises(ExprSyntaxError):
        parse("")
    with pytest.raises(ExprSyntaxError):
        parse("2 +* 3")


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        parse("foo(t)")
    with pytest.raises(UnknownIdentifier):
        parse("u0 + velocity")


def test_product_form_parses_to_top_level_multiply():
    tree = parse(PRODUCT_SRC)
    assert isinstance(tree, BinOp) and tree.op == "*"


def test_product_form_values():
    tree = parse(PRODUCT_SRC)
    # zeros of either factor, plus the hand value (0.5)^2 * (-1)^2
    assert evaluate(tree, {"u0": -0.5, "u1": 7.0}) == 0.0
    assert evaluate(tree, {"u0": 3.0, "u1": 1.0}) == 0.0
    assert evaluate(tree, {"u0": 0.0, "u1": 0.0}) == 0.25


def test_power_is_right_associative():
    tree = parse("2^3^2")
    assert isinstance(tree.right, BinOp) and tree.right.op == "^"
    # the composite exponent goes through exp(g ln f), hence approx
    assert evaluate(tree, {}) == pytest.approx(512.0, rel=1e-12)
    assert evaluate(parse("(2^3)^2"), {}) == 64.0


def test_unary_minus_binds_tighter_than_power():
    assert evaluate(parse("-u0^2"), {"u0": 3.0}) == 9.0
    assert evaluate(parse("-(u0^2)"), {"u0": 3.0}) == -9.0


def test_functions_match_math():
    env = {"t": 0.7}
    for name, fn in [
        ("sin", math.sin),
        ("cos", math.cos),
        ("exp", math.exp),
        ("ln", math.log),
        ("sqrt", math.sqrt),
        ("abs", abs),
    ]:
        assert evaluate(parse(f"{name}(t)"), env) == fn(0.7)


def test_evaluate_domain_errors():
    with pytest.raises(DomainError):
        evaluate(parse("ln(t)"), {"t": -1.0})
    with pytest.raises(DomainError):
        evaluate(parse("sqrt(t)"), {"t": -4.0})
    with pytest.raises(DomainError):
        evaluate(parse("1/t"), {"t": 0.0})
    with pytest.raises(DomainError):
        evaluate(parse("t^0.5"), {"t": -4.0})


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate(parse("u3 + 1"), {"t": 0.0})


def test_partial_simple_square():
    assert partial_eval(parse("u0^2"), {"u0": 3.0}, "u0") == 6.0


def test_partial_product_form_hand_values():
    tree = parse(PRODUCT_SRC)
    # 2(u0+1/2)^2 (u1^2-1) 2u1 = 2*1*3*4 at (0.5, 2)
    assert partial_eval(tree, {"u0": 0.5, "u1": 2.0}, "u1") == pytest.approx(24.0, abs=1e-12)
    assert partial_eval(tree, {"u0": 0.0, "u1": 0.0}, "u1") == 0.0


def test_partial_not_differentiable_at_kink():
    with pytest.raises(NotDifferentiable):
        partial_eval(parse("abs(u0)"), {"u0": 0.0}, "u0")
    assert partial_eval(parse("abs(u0)"), {"u0": -2.0}, "u0") == -1.0


@pytest.mark.parametrize(
    "src",
    [s for s in CORPUS if "abs" not in s],
)
def test_partials_match_central_differences(src):
    tree = parse(src)
    rng = random.Random(len(src))
    for var in ("t", "u0", "u1"):
        env = {"t": rng.uniform(0.2, 1.5)}
        env.update({f"u{i}": rng.uniform(0.2, 1.5) for i in range(10)})
        ad = partial_eval(tree, env, var)
        h = 1e-6
        hi = dict(env, **{var: env[var] + h})
        lo = dict(env, **{var: env[var] - h})
        fd = (evaluate(tree, hi) - evaluate(tree, lo)) / (2 * h)
        assert ad == pytest.approx(fd, rel=1e-6, abs=1e-6)


def test_lagrangian_slot_arity_checked():
    with pytest.raises(ArityError):
        compile_lagrangian("u2 + t", 1)
    with pytest.raises(ArityError):
        compile_lagrangian("u0", 0)
    L = compile_lagrangian("u1^2/2", 1)
    with pytest.raises(ArityError):
        L.partial(2, 0.0, (0.0, 0.0))


def test_lagrangian_fast_path_matches_walker():
    L = compile_lagrangian("0.5*u1^2 + 0.2*u0^2 + 0.1*t*u0", 1)
    rng = random.Random(11)
    for _ in range(20):
        t, u0, u1 = (rng.uniform(-2, 2) for _ in range(3))
        assert L.value(t, (u0, u1)) == evaluate(L.expr, {"t": t, "u0": u0, "u1": u1})


_leaf = st.sampled_from([parse(s) for s in ("t", "u0", "u1", "2", "0.5")])


def _trees(depth):
    if depth == 0:
        return _leaf
    sub = _trees(depth - 1)
    return st.one_of(
        _leaf,
        st.builds(lambda a, b, op: BinOp(op, a, b), sub, sub, st.sampled_from("+-*/")),
        st.builds(lambda a: parse(f"sin({to_string(a)})"), sub),
    )


@given(_trees(3))
def test_printing_round_trips_random_trees(tree):
    assert parse(to_string(tree)) == tree
