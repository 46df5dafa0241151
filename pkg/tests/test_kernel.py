import glob
import os
import random
import re
import time

import pytest

from jlogic import harness
from jlogic.axioms import ConstantSpecification
from jlogic.kernel import Ax, Derivation, Gen, Hyp, Mp, Step, Taut, check, check_theorem, is_tautology
from jlogic.syntax import Var
from jlogic.textio import parse_derivation
from jlogic.textio import parse_formula as F

from conftest import CORPUS, GOLDEN, load

SCHEMATIC = ConstantSpecification.schematic()


def d_of(steps, hyps=(), logic="FOLPb"):
    return Derivation(logic, SCHEMATIC, tuple(hyps), tuple(Step(i, f, r) for i, (f, r) in enumerate(steps, 1)))


@pytest.mark.parametrize("name", GOLDEN)
def test_golden_accepted_quickly(name):
    d = load(name)
    t0 = time.perf_counter()
    rep = check_theorem(d)
    assert rep.accepted, rep
    assert time.perf_counter() - t0 < 1.0


def test_golden_milestones():
    # milestones are written as "# [k] ..." comment lines
    counts = []
    for name in GOLDEN:
        with open(os.path.join(CORPUS, name), encoding="utf-8") as fh:
            counts.append(sum(1 for ln in fh if ln.startswith("# [")))
    assert counts == [9, 10, 21]


def test_lemma_files():
    for name in ("jt45_lemma_query.jd", "jt45_lemma_negative.jd", "cs_example.jd"):
        assert check(load(name)).accepted


def test_bad_axiom():
    rep = check(d_of([(F("P(x)"), Ax("A1.K"))]))
    assert (rep.step, rep.reason) == (1, "BadAxiomInstance")


def test_gen_on_hypothesis_variable():
    x = Var("x")
    rep = check(d_of([(F("P(x)"), Hyp(1)), (F("forall x. P(x)"), Gen(1, x))], hyps=[F("P(x)")]))
    assert (rep.step, rep.reason) == (2, "GenOnHypFreeVar")


def test_no_steps():
    rep = check_theorem(d_of([]))
    assert (rep.step, rep.reason) == (0, "NoSteps")


def test_theorem_needs_no_hypotheses():
    rep = check_theorem(d_of([(F("P()"), Hyp(1))], hyps=[F("P()")]))
    assert rep.reason == "NonEmptyHypotheses"


def test_modus_ponens():
    a, ab = F("P()"), F("P() -> Q()")
    ok = d_of([(a, Hyp(1)), (ab, Hyp(2)), (F("Q()"), Mp(1, 2))], hyps=[a, ab])
    assert check(ok).accepted
    bad = d_of([(a, Hyp(1)), (ab, Hyp(2)), (F("R(x,x)"), Mp(1, 2))], hyps=[a, ab])
    assert (check(bad).step, check(bad).reason) == (3, "MpMismatch")
    fwd = d_of([(F("Q()"), Mp(2, 3)), (a, Hyp(1)), (ab, Hyp(2))], hyps=[a, ab])
    assert check(fwd).reason == "BadStepRef"


def test_taut():
    assert is_tautology(F("[t]{} P() | ~[t]{} P()"))
    assert not is_tautology(F("[t]{} P() | ~[s]{} P()"))
    a = F("P()")
    d = d_of([(a, Hyp(1)), (F("Q() -> P()"), Taut((1,)))], hyps=[a])
    assert check(d).accepted
    assert check(d, no_taut=True).reason == "TautDisabled"
    d = d_of([(a, Hyp(1)), (F("Q()"), Taut((1,)))], hyps=[a])
    assert check(d).reason == "TautNotConsequence"


def test_taut_atom_limit():
    big = F(" | ".join(f"P(@d{i})" for i in range(17)) + " | ~P(@d0)")
    assert check(d_of([(big, Taut())])).reason == "TautTooManyAtoms"


def test_cs_step():
    from jlogic.kernel import Cs
    ok = d_of([(F("[c_B1]{} ([t]{} P() -> P())"), Cs("c_B1"))])
    assert check(ok).accepted
    bad = d_of([(F("[c_B1]{} ([t]{} P() -> Q())"), Cs("c_B1"))])
    assert check(bad).reason == "BadCsEntry"


def test_logic_mismatch_is_ill_formed():
    rep = check(d_of([(F("~[t]{} P() -> [?t]{} ~[t]{} P()"), Ax("B6"))]))
    assert not rep.accepted


def test_negated_step_of_jt45():
    d = load("jt45_barcan.jd")
    s = d.step(10)
    from jlogic.syntax import Not
    from dataclasses import replace
    steps = tuple(Step(10, Not(s.formula), s.rule) if t.index == 10 else t for t in d.steps)
    assert not check(replace(d, steps=steps)).accepted


def test_corpus_mutants_rejected_at_recorded_step():
    files = sorted(glob.glob(os.path.join(CORPUS, "mutants", "*.jd")))
    assert len(files) >= 150
    for p in files:
        with open(p, encoding="utf-8") as fh:
            text = fh.read()
        want = int(re.search(r"step=(\d+)", text).group(1))
        rep = check(parse_derivation(text, base_dir=CORPUS))
        assert not rep.accepted and rep.step == want, (p, rep)


def test_random_derivations_accepted():
    rng = random.Random(8)
    for _ in range(50):
        d = harness.gen_derivation(rng, rng.choice(("FOLPb", "FOJT45")), witnesses=("@a",))
        assert check(d).accepted
