import pytest

from adev import corpus
from adev.errors import TypeCheckError
from adev.parser import parse_term
from adev.syntax import (
    BOOL, EST, NAT, REAL, Arrow, BaseT, Prob, Product, WProb, desugar, resolve,
)
from adev.typecheck import check_entry, infer, subtype

from conftest import TWO_BRANCH_REINFORCE


def ty(text):
    t = desugar(parse_term(text))
    resolve(t)
    return infer({}, t)


def test_identity():
    assert ty(r"\x : R. x") == Arrow(REAL, REAL)


def test_two_branch_entry():
    e = check_entry(parse_term(TWO_BRANCH_REINFORCE))
    assert e.base == BaseT("I")
    assert e.type == Arrow(BaseT("I"), EST)


def test_entry_must_return_estimator():
    with pytest.raises(TypeCheckError) as err:
        check_entry(parse_term(r"\x : R. x"))
    assert err.value.kind == "entry"
    assert "entry must return R̃" in str(err.value)


def test_entry_parameter_must_be_smooth():
    with pytest.raises(TypeCheckError):
        check_entry(parse_term(r"\x : R*. exact ⌊x⌋"))


@pytest.mark.parametrize("name", ["smoothness_accept_1", "smoothness_accept_2", "normal_threshold"])
def test_smoothness_examples_accepted(name):
    assert check_entry(corpus.load(name)).base == BaseT("R")


def test_smoothness_reject_rejected_naming_y():
    with pytest.raises(TypeCheckError) as err:
        check_entry(corpus.load("smoothness_reject"))
    e = err.value
    assert e.kind == "smoothness-violation"
    assert "variable y" in e.message
    assert e.span.line == 5
    assert e.to_json()["kind"] == "smoothness-violation"


def test_every_accepted_corpus_program_checks():
    for e in corpus.entries():
        check_entry(e.program())


def test_subtyping():
    assert subtype(BaseT("I"), REAL)
    assert subtype(BaseT("R>0"), REAL)
    assert not subtype(REAL, BaseT("R", True))
    assert not subtype(BaseT("R", True), REAL)
    assert subtype(Prob(REAL), WProb(REAL))
    assert subtype(Arrow(REAL, BaseT("I")), Arrow(BaseT("I"), REAL))


def test_forget_makes_starred_values_smooth():
    assert ty(r"\x : R*. ⌊x⌋ + 1") == Arrow(BaseT("R", True), REAL)


def test_starred_values_are_forgotten_implicitly_when_used_smoothly():
    assert ty(r"\x : R*. x * x") == Arrow(BaseT("R", True), REAL)


def test_comparisons_need_starred_arguments():
    assert ty(r"\x : R*. x <= 3") == Arrow(BaseT("R", True), BOOL)
    with pytest.raises(TypeCheckError) as err:
        ty(r"\x : R. x <= 3")
    assert err.value.kind == "smoothness-violation"


def test_literal_ranges():
    assert ty("flip_enum 0.5") == Prob(BOOL)
    with pytest.raises(TypeCheckError):
        ty("flip_enum 2")
    with pytest.raises(TypeCheckError):
        ty("normal_reparam 0 0")


def test_nat_arithmetic():
    assert ty(r"\n : N. n + 1") == Arrow(NAT, NAT)
    assert ty(r"\n : N. nat_to_real n * 2") == Arrow(NAT, REAL)


def test_do_blocks():
    assert ty("do { x <- sample; return x }") == Prob(BaseT("I", True))
    assert ty(r"\t : R. do { addcost t; return 0 }") == Arrow(REAL, WProb(REAL))
    with pytest.raises(TypeCheckError) as err:
        ty("do { x <- 3; return x }")
    assert err.value.kind == "non-prob-do"


def test_expectation_of_weighted_program():
    assert ty(r"\t : R. E (do { addcost t; return 0 })") == Arrow(REAL, EST)


def test_mismatch_reports_types():
    with pytest.raises(TypeCheckError) as err:
        ty(r"\x : B. x + 1")
    assert err.value.expected is not None or err.value.kind == "overload-failure"


def test_unbound_variable():
    with pytest.raises(TypeCheckError) as err:
        ty("E (do { x <- sample; return (theta * x) })")
    assert err.value.kind == "unbound"


def test_density_estimators_return_starred_samples():
    assert ty(r"\t : R. reinforce (dens_normal t 1)") == Arrow(REAL, Prob(BaseT("R", True)))
    assert ty(r"\t : R. E (do { x <- importance (dens_normal t 1) (dens_normal 0 2); "
              r"return ⌊x⌋ })") == Arrow(REAL, EST)


def test_pairs():
    assert ty(r"\p : R * B. fst p") == Arrow(Product(REAL, BOOL), REAL)
