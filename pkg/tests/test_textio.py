import random

import pytest

from jlogic.harness import gen_formula, gen_term
from jlogic.kernel import Derivation
from jlogic.semantics import audit
from jlogic.syntax import App, Bottom, Exists, Forall, GenTerm, Just, JustConst, JustVar, Sum, Var, atom
from jlogic.textio import (
    ParseError, parse_cs, parse_derivation, parse_formula, parse_model, parse_term, print_derivation,
    print_formula, print_model, print_term,
)

from conftest import corpus_path, load


def test_parse_term():
    assert parse_term("(p0 . c1)") == App(JustVar("p0"), JustConst("c1"))


def test_parse_gen_term_formula():
    f = parse_formula("[gen[x](t)]{y} forall x. P(x,y)")
    x, y = Var("x"), Var("y")
    # only p<digits> names are justification variables
    assert f == Just(GenTerm(x, JustConst("t")), frozenset({y}), Forall(x, atom("P", "x", "y")))


def test_bound_witness_is_rejected():
    with pytest.raises(ParseError):
        parse_formula("forall @a. P(@a)")


def test_print():
    assert print_formula(Just(JustVar("t"), frozenset(), Bottom())) == "[t]{} false"
    a, b, c = JustVar("a"), JustVar("b"), JustVar("c")
    assert print_term(Sum(App(a, b), c)) == "((a . b) + c)"
    f = Just(JustVar("t"), frozenset({Var("y"), Var("x")}), atom("P", "x", "y"))
    assert "{x,y}" in print_formula(f)


def test_parse_error_has_position():
    with pytest.raises(ParseError) as e:
        parse_formula("P(x) -> ")
    assert e.value.span.line == 1


def test_round_trip_fuzz():
    rng = random.Random(11)
    for _ in range(1500):
        f = gen_formula(rng, 4, logic=rng.choice(("FOLPb", "FOJT45")))
        assert parse_formula(print_formula(f)) == f
        t = gen_term(rng, 3)
        assert parse_term(print_term(t)) == t


def test_exists_round_trip():
    f = Exists(Var("y"), atom("R", "@a", "y"))
    assert parse_formula(print_formula(f)) == f


def test_one_line_derivation():
    d = parse_derivation("logic FOLPb\ncs schematic\n1. (P() -> (Q() -> P())) ; AX A1.K\n")
    assert isinstance(d, Derivation) and len(d.steps) == 1


def test_derivation_round_trip():
    d = load("converse_buridan.jd")
    assert parse_derivation(print_derivation(d)) == d


def test_golden_file_marks():
    with open(corpus_path("converse_barcan.jd"), encoding="utf-8") as fh:
        text = fh.read()
    assert sum(1 for ln in text.splitlines() if ln.startswith("# [")) == 9


def test_duplicate_step_index():
    with pytest.raises(ParseError):
        parse_derivation("logic FOLPb\ncs schematic\n1. false ; HYP 1\n1. false ; HYP 1\n")


def test_cs_file():
    cs = parse_cs("c0 : (P(x) -> (Q(y) -> P(x)))\n")
    assert cs.mode == "explicit" and len(cs.entries) == 1


MODEL = """LOGIC FOLPb
WORLDS w v
REL
w v
w w
DOMAIN @a
INTERP
P @ w : (@a)
EVIDENCE mode=table
t | P() | w
"""


def test_model_missing_reflexive_pair_parses():
    m = parse_model(MODEL)
    assert ("v", "v") not in m.rel
    rep = audit(m)
    assert not rep.passed


def test_model_round_trip():
    m = parse_model(MODEL)
    assert print_model(parse_model(print_model(m))) == print_model(m)
