import random

import pytest

from jlogic import harness
from jlogic.axioms import match_axiom
from jlogic.kernel import check
from jlogic.semantics import audit
from jlogic.syntax import Just, JustConst, JustVar, Var
from jlogic.templates import Letter, TBox
from jlogic.textio import parse_formula as F, print_model


def test_single_world_model():
    m = harness.gen_model(harness.GenConfig(seed=1, max_worlds=1))
    assert tuple(m.worlds) == ("w0",) and set(m.rel) == {("w0", "w0")}


def test_jt45_relation_is_equivalence():
    cfg = harness.GenConfig(seed=5, logic="FOJT45")
    for i in range(20):
        m = harness.gen_model(cfg, harness.trial_rng(cfg, i))
        assert all((b, a) in m.rel for a, b in m.rel)
        assert audit(m).passed


def test_models_are_reproducible():
    cfg = harness.GenConfig(seed=9)
    a, b = harness.gen_model(cfg), harness.gen_model(cfg)
    assert print_model(a) == print_model(b)


def test_config_validation():
    with pytest.raises(ValueError):
        harness.GenConfig(fault="no_such_fault")


def test_axiom_instances():
    cfg = harness.GenConfig()
    rng = random.Random(0)
    f = harness.gen_axiom_instance(cfg, "B1", rng)
    assert match_axiom("B1", f)
    for _ in range(10):
        f = harness.gen_axiom_instance(cfg, "Bb", rng)
        rep = match_axiom("Bb", f)
        assert rep and rep.bindings["y"] not in rep.bindings["X"]
        assert match_axiom("A2", harness.gen_axiom_instance(cfg, "A2", rng))


def test_zero_trials():
    rep = harness.run_soundness(harness.GenConfig(trials=0))
    assert rep.passed and rep.trials == 0


def test_report_is_deterministic():
    cfg = harness.GenConfig(seed=13, trials=60)
    assert str(harness.run_soundness(cfg)) == str(harness.run_soundness(cfg))


def test_short_soundness_runs():
    for logic in ("FOLPb", "FOJT45"):
        rep = harness.run_soundness(harness.GenConfig(seed=21, logic=logic, trials=100))
        assert rep.passed, rep.violations[:1]


def test_transitivity_canary_replays():
    rep = harness.run_soundness(harness.GenConfig(seed=42, trials=200, fault="skip_transitivity"),
                                stop_at_first=True)
    assert rep.violations
    v = rep.violations[0]
    m, f, w = harness.parse_replay(v.replay())
    assert f == v.formula and w == v.world
    assert not audit(m).passed


def test_brute_member_examples():
    a = F("P(@a)")
    assert harness.brute_member(Letter(1), [a], 1) == {a}
    got = harness.brute_member(TBox(Letter(1)), [a], 1, alphabet=("p0", "c0", "!", "?"))
    terms = {f.term for f in got}
    assert {JustVar("p0"), JustConst("c0")} <= terms
    assert all(f.xs == frozenset({Var("@a")}) for f in got)
    flat = harness.brute_member(TBox(Letter(1)), [a], 0)
    assert {f.term for f in flat} == {JustVar("p0"), JustConst("c0")}


def test_mutants_are_rejected_where_recorded():
    rng = random.Random(1)
    d = harness.gen_derivation(rng, "FOLPb", n_hyps=1, steps=4)
    ms = harness.mutants(d, rng, count=40)
    assert ms
    for mu in ms:
        rep = check(mu.derivation)
        assert not rep.accepted and rep.step == mu.step, mu.what


def test_generated_theorems_are_accepted():
    for logic in ("FOLPb", "FOJT45"):
        cfg = harness.GenConfig(seed=2, logic=logic)
        for i in range(12):
            kind, d = harness.gen_theorem(cfg, harness.trial_rng(cfg, i, "thm"))
            assert not d.hypotheses and check(d).accepted, kind


def test_trial_streams_are_independent():
    cfg = harness.GenConfig(seed=1)
    assert harness.trial_rng(cfg, 3).random() == harness.trial_rng(cfg, 3).random()
    assert harness.trial_rng(cfg, 3).random() != harness.trial_rng(cfg, 4).random()


def test_reference_eval_on_justification():
    m = harness.gen_model(harness.GenConfig(seed=4, max_worlds=2, mode="full"))
    f = Just(JustVar("p0"), frozenset(), F("P(@d0) | ~P(@d0)"))
    assert all(harness.reference_eval(m, w, f) for w in m.worlds)
