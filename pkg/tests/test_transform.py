import random

import pytest

from jlogic import harness, transform
from jlogic.axioms import ConstantSpecification
from jlogic.kernel import Derivation, Gen, Hyp, Mp, Step, check, check_theorem
from jlogic.syntax import App, Forall, Just, JustConst, JustVar, Query, Var, free_vars
from jlogic.textio import parse_formula as F, parse_term as T, print_term

SCHEMATIC = ConstantSpecification.schematic()
x, y, z = Var("x"), Var("y"), Var("z")


def d_of(steps, hyps=(), logic="FOLPb", cs=SCHEMATIC):
    return Derivation(logic, cs, tuple(hyps), tuple(Step(i, f, r) for i, (f, r) in enumerate(steps, 1)))


def test_deduction_identity():
    a = F("P()")
    out = transform.deduction(d_of([(a, Hyp(1))], hyps=[a]), 1)
    assert out.conclusion == F("P() -> P()") and out.hypotheses == ()
    assert check(out).accepted


def test_deduction_keeps_other_hypotheses():
    a, ab = F("P()"), F("P() -> Q()")
    d = d_of([(a, Hyp(1)), (ab, Hyp(2)), (F("Q()"), Mp(1, 2))], hyps=[a, ab])
    out = transform.deduction(d, 1)
    assert out.conclusion == F("P() -> Q()") and out.hypotheses == (ab,)
    assert check(out).accepted


def test_deduction_through_gen():
    a = F("Q()")
    d = d_of([(a, Hyp(1)), (F("Q() -> (P(x) -> Q())"), __import__("jlogic.kernel", fromlist=["Ax"]).Ax("A1.K")),
              (F("P(x) -> Q()"), Mp(1, 2)), (F("forall x. (P(x) -> Q())"), Gen(3, x))], hyps=[a])
    assert check(d).accepted
    out = transform.deduction(d, 1)
    assert check(out).accepted
    assert out.conclusion == F("Q() -> forall x. (P(x) -> Q())")
    assert any(getattr(s.rule, "schema", None) == "A1.UD" for s in out.steps)


def test_deduction_bad_hyp():
    with pytest.raises(transform.HypNotFound):
        transform.deduction(d_of([(F("P()"), Hyp(1))], hyps=[F("P()")]), 3)


def test_internalize_application():
    ab, a = F("[p0]{} (P() -> Q())"), F("[p1]{} P()")
    d = d_of([(F("P() -> Q()"), Hyp(1)), (F("P()"), Hyp(2)), (F("Q()"), Mp(2, 1))],
             hyps=[F("P() -> Q()"), F("P()")])
    with pytest.raises(transform.HypShapeError):
        transform.internalize(d)
    b = __import__("jlogic._builder", fromlist=["ProofBuilder"]).ProofBuilder("FOLPb", None, [ab, a])
    i = b.mp(b.hyp(1), b.ax("B1", t=JustVar("p0"), phi=F("P() -> Q()")))
    j = b.mp(b.hyp(2), b.ax("B1", t=JustVar("p1"), phi=F("P()")))
    d = b.derivation(upto=b.mp(j, i))
    t, out = transform.internalize(d)
    assert check(out).accepted
    assert out.conclusion == Just(t, frozenset(), F("Q()"))


def test_internalize_axiom_gives_constant():
    d = d_of([(F("P() -> (Q() -> P())"), __import__("jlogic.kernel", fromlist=["Ax"]).Ax("A1.K"))])
    t, out = transform.internalize(d)
    assert t == JustConst("c_K")
    assert out.conclusion == F("[c_K]{} (P() -> (Q() -> P()))")


def test_internalize_gen():
    from jlogic.kernel import Ax
    d = d_of([(F("P(x) -> (Q() -> P(x))"), Ax("A1.K")), (F("forall x. (P(x) -> (Q() -> P(x)))"), Gen(1, x))])
    assert check(d).accepted
    t, out = transform.internalize(d)
    assert print_term(t) == "gen[x](c_K)"
    assert out.conclusion == F("[gen[x](c_K)]{} forall x. (P(x) -> (Q() -> P(x)))")
    assert check(out).accepted


def test_internalize_subscript_is_union():
    rng = random.Random(4)
    for _ in range(15):
        d = harness.gen_derivation(rng, "FOLPb", n_hyps=2)
        t, out = transform.internalize(d)
        want = frozenset().union(*(h.xs for h in d.hypotheses))
        assert check(out).accepted and out.conclusion.xs == want


def test_internalize_needs_schematic():
    cs = ConstantSpecification.explicit([("a", F("P() -> (Q() -> P())"))])
    from jlogic.kernel import Cs
    d = d_of([(F("[a]{} (P() -> (Q() -> P()))"), Cs("a"))], cs=cs)
    with pytest.raises(transform.CsNotSchematic):
        transform.internalize(d)


def test_replace_witness():
    from jlogic.kernel import Ax
    d = d_of([(F("P(@a) -> (P(@a) -> P(@a))"), Ax("A1.K"))])
    out = transform.replace_witness(d, Var("@a"), y)
    assert out.conclusion == F("P(y) -> (P(y) -> P(y))") and check(out).accepted
    assert transform.replace_witness(d, Var("@b"), y) == d


def test_replace_witness_in_cs_step():
    from jlogic.kernel import Cs
    d = d_of([(F("[c_UI]{} (forall x. P(x) -> P(@a))"), Cs("c_UI"))])
    assert check(d).accepted
    out = transform.replace_witness(d, Var("@a"), y)
    assert out.conclusion == F("[c_UI]{} (forall x. P(x) -> P(y))")
    assert isinstance(out.steps[0].rule, Cs) and check(out).accepted


def test_generalize_witness():
    from jlogic.kernel import Ax
    d = d_of([(F("P(@a,@b) -> (P(@a,@b) -> P(@a,@b))"), Ax("A1.K"))])
    out = transform.generalize_witness(d, Var("@a"), y)
    assert out.conclusion == F("forall y. (P(y,@b) -> (P(y,@b) -> P(y,@b)))")
    assert check(out).accepted
    out = transform.generalize_witness(d, Var("@c"), y)
    assert out.conclusion == Forall(y, d.conclusion) and check(out).accepted


def test_converse_barcan_term():
    t = JustVar("p0")
    s, d = transform.converse_barcan(t, frozenset(), y, F("P(y)"))
    assert s == App(JustConst("c_UI"), t)
    assert d.conclusion == F("[p0]{} forall y. P(y) -> forall y. [(c_UI . p0)]{y} P(y)")
    assert check_theorem(d).accepted
    _, d = transform.converse_barcan(t, frozenset({x}), y, F("P(x,y)"))
    assert d.conclusion == F("[p0]{x} forall y. P(x,y) -> forall y. [(c_UI . p0)]{x,y} P(x,y)")


@pytest.mark.parametrize("synth", [transform.converse_barcan, transform.converse_buridan])
def test_subscript_precondition(synth):
    with pytest.raises(transform.TransformError):
        synth(JustVar("p0"), frozenset({y}), y, F("P(y)"))


def test_converse_buridan():
    s, d = transform.converse_buridan(JustVar("p0"), frozenset(), y, F("P(y)"))
    assert d.conclusion == F(f"exists y. [p0]{{y}} P(y) -> [{print_term(s)}]{{}} exists y. P(y)")
    assert check_theorem(d).accepted
    assert len(d.marks) == 10


def test_jt45_barcan_shape():
    t = JustVar("p0")
    s, d = transform.jt45_barcan(t, frozenset(), y, F("P(y)"), "FOJT45")
    assert check_theorem(d).accepted and len(d.marks) == 21
    # (r . ?((c_CP . c_UI) . ?t))
    assert isinstance(s, App) and isinstance(s.right, Query)
    inner = s.right.body
    assert inner.left == App(JustConst("c_CP"), JustConst("c_UI")) and inner.right == Query(t)
    with pytest.raises(transform.WrongLogic):
        transform.jt45_barcan(t, frozenset(), y, F("P(y)"), "FOLPb")
    with pytest.raises(transform.TransformError):
        transform.jt45_barcan(t, frozenset({y}), y, F("P(y)"), "FOJT45")


def test_hilbert_variant_without_taut():
    _, d = transform.converse_barcan(JustVar("p0"), frozenset(), y, F("P(y)"), use_taut=False)
    assert check(d, no_taut=True).accepted
    _, d = transform.jt45_barcan(JustVar("p0"), frozenset(), y, F("P(y)"), "FOJT45", use_taut=False)
    assert check(d, no_taut=True).accepted


def test_synthesized_conclusions_have_expected_free_vars():
    _, d = transform.converse_barcan(T("(p0 + c0)"), frozenset({z}), y, F("R(z,y)"))
    assert free_vars(d.conclusion) == {z}
