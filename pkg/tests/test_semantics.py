import random

import pytest

from jlogic import harness
from jlogic.semantics import EvidenceSpec, FittingModel, audit, eval_formula, evidence, valid
from jlogic.syntax import universal_closure
from jlogic.textio import parse_formula as F, parse_term as T

D = ["@a", "@b"]
REFL2 = {("w", "w"), ("v", "v"), ("w", "v")}


def model(ws, rel, interp, ev, logic="FOLPb"):
    return FittingModel(logic, ws, rel, D, interp, ev)


def test_full_evidence():
    m = model(["w"], {("w", "w")}, {}, EvidenceSpec.full())
    assert evidence(m, T("((c0 + p1) . !p2)"), F("P(@a)"), "w")


def test_application():
    base = {(T("p1"), F("P() -> Q()"), "w"), (T("p2"), F("P()"), "w")}
    m = model(["w", "v"], REFL2, {}, EvidenceSpec.closure(base))
    assert evidence(m, T("(p1 . p2)"), F("Q()"), "w")
    assert evidence(m, T("(p1 . p2)"), F("Q()"), "v")  # monotone along R
    assert not evidence(m, T("(p2 . p1)"), F("Q()"), "w")


def test_instantiation_and_quantifier_terms():
    m = model(["w"], {("w", "w")}, {}, EvidenceSpec.closure({(T("p1"), F("P(x)"), "w")}))
    assert evidence(m, T("p1"), F("P(@a)"), "w")
    assert evidence(m, T("gen[x](p1)"), F("forall x. P(x)"), "w")
    assert evidence(m, T("b(p1)"), F("forall y. P(y)"), "w")


def test_sum_and_bang():
    m = model(["w"], {("w", "w")}, {}, EvidenceSpec.closure({(T("p1"), F("P()"), "w")}))
    assert evidence(m, T("(p1 + p2)"), F("P()"), "w") and evidence(m, T("(p2 + p1)"), F("P()"), "w")
    assert evidence(m, T("!p1"), F("[p1]{} P()"), "w")
    assert not evidence(m, T("p2"), F("P()"), "w")


def test_eval():
    full_p = {("P", "w"): {("@a",), ("@b",)}}
    m = model(["w"], {("w", "w")}, full_p, EvidenceSpec.full())
    assert not eval_formula(m, "w", F("false"))
    assert eval_formula(m, "w", F("[t]{} forall x. P(x)"))
    m2 = model(["w", "v"], REFL2, {("P", "w"): {("@a",), ("@b",)}, ("P", "v"): {("@a",)}}, EvidenceSpec.full())
    assert not eval_formula(m2, "w", F("[t]{} P(@b)"))
    assert eval_formula(m2, "w", F("[t]{@a} P(@a)"))


def test_valid():
    m = model(["w", "v"], REFL2, {("P", "w"): {("@a",)}}, EvidenceSpec.full())
    assert valid(m, F("P(x) -> P(x)"))
    assert not valid(m, F("P(x)"))


def test_audit():
    assert audit(model(["w", "v"], REFL2, {}, EvidenceSpec.full())).passed
    tm = model(["w", "v"], REFL2, {}, EvidenceSpec.table([(T("t"), F("P()"), {"w"})]))
    rep = audit(tm)
    assert not rep.passed and "RClosure" in str(rep)
    bad = model(["w", "v"], {("w", "v"), ("v", "v")}, {}, EvidenceSpec.full())
    assert not audit(bad).passed


def test_jt45_full_mode_is_not_strong():
    rep = audit(model(["w"], {("w", "w")}, {}, EvidenceSpec.full(), logic="FOJT45"))
    assert not rep.passed and "StrongEvidence" in str(rep)


def test_jt45_table_strong_evidence():
    m = model(["w"], {("w", "w")}, {}, EvidenceSpec.table([(T("t"), F("P()"), {"w"})]), logic="FOJT45")
    assert "StrongEvidence" in str(audit(m))


def test_generated_models_pass_audit():
    for logic in ("FOLPb", "FOJT45"):
        cfg = harness.GenConfig(seed=3, logic=logic)
        for i in range(30):
            assert audit(harness.gen_model(cfg, harness.trial_rng(cfg, i))).passed


def test_matches_reference_evaluator():
    rng = random.Random(6)
    for logic in ("FOLPb", "FOJT45"):
        cfg = harness.GenConfig(seed=6, logic=logic, max_worlds=3, max_domain=2)
        for i in range(40):
            m = harness.gen_model(cfg, harness.trial_rng(cfg, i))
            f = harness.gen_formula(rng, 3, logic, witnesses=tuple(m.domain))
            f = universal_closure(f)
            ev = m.evaluator((f,))
            for w in m.worlds:
                assert ev.eval(w, f) == harness.reference_eval(m, w, f, ev)


def test_unknown_world():
    m = model(["w"], {("w", "w")}, {}, EvidenceSpec.full())
    with pytest.raises(Exception):
        eval_formula(m, "nowhere", F("P()"))
