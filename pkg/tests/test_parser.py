from fractions import Fraction

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from adev.errors import ParseError, TypeCheckError
from adev.parser import parse_program, parse_term, parse_type
from adev.printer import pretty_print, show, show_type
from adev.syntax import (
    BOOL, CDF, EST, NAT, REAL, UNIT, App, Arrow, BaseT, Bind, BoolLit, Density, Do, DoLet, Fst,
    If, Lam, Let, NatLit, NumLit, Pair, Prim, Prob, Product, Return, Snd, UnitLit, Var,
    WProb, alpha_eq, desugar, resolve,
)

from conftest import TWO_BRANCH_REINFORCE


def test_two_branch_ast():
    t = parse_term(TWO_BRANCH_REINFORCE)
    assert isinstance(t, Lam) and t.name == "theta" and t.ty == BaseT("I")
    e, body = t.body.fn, t.body.arg
    assert e == Prim("E")
    assert isinstance(body, Do)
    (bind,) = body.stmts
    assert bind.name == "b" and bind.term == App(Prim("flip_reinforce"), Var("theta"))
    assert isinstance(body.tail, If)


def test_identity():
    assert parse_term(r"\x : R. x") == Lam("x", REAL, Var("x"))


def test_unicode_spellings():
    a = parse_term("λx : R. do { y ← return x; return ⌊y⌋ }")
    b = parse_term(r"\x : R. do { y <- return x; return forget y }")
    assert alpha_eq(a, b)
    assert parse_type("R × R → R") == parse_type("R * R -> R")


def test_free_variable_is_parsed_then_rejected_by_resolver():
    t = parse_term("E (do { x <- sample; return (theta * x) })")
    with pytest.raises(TypeCheckError) as err:
        resolve(t)
    assert "theta" in str(err.value)


def test_desugar_let_and_sequencing():
    t = desugar(parse_term("do { let y = 3; return y }"))
    assert alpha_eq(t, parse_term("do { y <- return 3; return y }"))
    t = desugar(parse_term("do { addcost 1; return 0 }"))
    assert t.stmts[0].name == "_"


def test_desugar_is_identity_without_sugar():
    t = parse_term(TWO_BRANCH_REINFORCE)
    assert desugar(t) == t


def test_annotated_literals():
    assert parse_term("(3 : N)") == NatLit(3)
    t = parse_term("(0.5 : I)")
    assert t == NumLit(Fraction(1, 2), BaseT("I"))


def test_comments_and_spans():
    p = parse_program("-- a comment\n\\x : R.\n  x + 1\n")
    assert p.term.span.line == 2


@pytest.mark.parametrize("text", [
    r"\x : R.", "do { x <- sample }", "(1, 2", r"\x R. x", "if b then 1", "let x = 1 x",
    r"\exp : R. exp",
])
def test_syntax_errors(text):
    with pytest.raises(ParseError) as err:
        parse_term(text)
    assert err.value.line >= 1


def test_parse_error_position():
    with pytest.raises(ParseError) as err:
        parse_term("\\x : R.\n  x +")
    assert err.value.line == 2


def test_type_syntax():
    assert parse_type("P (R * B)") == Prob(Product(REAL, BOOL))
    assert parse_type("R -> R -> R") == Arrow(REAL, Arrow(REAL, REAL))
    assert parse_type("R>0*") == BaseT("R>0", True)
    assert parse_type("C R") == CDF
    assert parse_type("R~") == EST


def test_printer_basics():
    assert show(Var("x")) == "x"
    t = parse_term("f (g x) (h y z)")
    assert show(t) == "f (g x) (h y z)"
    assert show(parse_term("(1 + 2) * 3")) == "(1 + 2) * 3"
    assert show(parse_term("1 - (2 - 3)")) == "1 - (2 - 3)"


# ----------------------------------------------------------------------------
# Round trip on generated terms

NAMES = ["x", "y", "z", "theta", "b"]
base_types = st.sampled_from([
    REAL, BaseT("R", True), BaseT("I"), BaseT("I", True), BaseT("R>0"), NAT, BOOL, UNIT, EST,
    CDF,
])


def types():
    return st.recursive(base_types, lambda sub: st.one_of(
        st.builds(Product, sub, sub), st.builds(Arrow, sub, sub), st.builds(Prob, sub),
        st.builds(WProb, sub), st.builds(Density, sub)), max_leaves=4)


literals = st.one_of(
    # literals written in decimal notation, the only ones the concrete syntax has
    st.builds(lambda n, k: NumLit(Fraction(n, 10**k), REAL), st.integers(0, 10**6),
              st.integers(0, 4)),
    st.builds(lambda n: NumLit(Fraction(n, 100), BaseT("I")), st.integers(0, 100)),
    st.builds(NatLit, st.integers(0, 50)),
    st.builds(BoolLit, st.booleans()),
    st.just(UnitLit()),
)
leaves = st.one_of(
    literals, st.builds(Var, st.sampled_from(NAMES)),
    st.builds(Prim, st.sampled_from(["exp", "add", "mul", "flip_enum", "sample", "E",
                                     "exact", "normal_reparam", "leq", "forget"])),
)
binops = st.sampled_from(["add", "sub", "mul", "div", "leq", "eq"])


def extend(sub):
    names = st.sampled_from(NAMES)
    stmt = st.one_of(st.builds(Bind, names, sub), st.builds(DoLet, names, sub),
                     st.builds(Bind, st.none(), sub))
    return st.one_of(
        st.builds(lambda op, a, b: App(App(Prim(op), a), b), binops, sub, sub),
        st.builds(App, sub, sub),
        st.builds(Pair, sub, sub), st.builds(Fst, sub), st.builds(Snd, sub),
        st.builds(Lam, names, types(), sub), st.builds(Let, names, sub, sub),
        st.builds(If, sub, sub, sub), st.builds(Return, sub),
        st.builds(lambda ss, tail: Do(tuple(ss), tail), st.lists(stmt, max_size=3), sub),
    )


terms = st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=1000, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(terms)
def test_round_trip(t):
    text = pretty_print(t)
    assert alpha_eq(parse_term(text), t), text


@settings(max_examples=300, deadline=None)
@given(types())
def test_type_round_trip(ty):
    assert parse_type(show_type(ty)) == ty
