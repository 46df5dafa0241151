"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (the lines are printed live) or directly with
``python3 tests/test_acceptance.py``.
"""

import glob
import os
import random
import re
import sys
import time

import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from conftest import CORPUS, GOLDEN, load  # noqa: E402
from jlogic import _accel, harness, templates, transform  # noqa: E402
from jlogic.axioms import (  # noqa: E402
    ConstantSpecification, cs_contains, csv_contains, schemas_for,
)
from jlogic.kernel import check, check_theorem  # noqa: E402
from jlogic.semantics import EvidenceSpec, FittingModel  # noqa: E402
from jlogic.syntax import (  # noqa: E402
    And, App, Exists, Forall, Implies, Just, JustConst, JustVar, Not, Or, Query, Var, free_vars,
    subformulas, universal_closure, witness_vars,
)
from jlogic.templates import degree, member  # noqa: E402
from jlogic.textio import parse_derivation, parse_formula, print_formula  # noqa: E402

Y = Var("y")


def _line(n, ok, detail):
    return f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


# -- 1. golden corpus ---------------------------------------------------------------


def criterion_1():
    # pay the one-off JIT or cache load before timing
    _accel.first_falsifying([(0, 0), (0, 0), (5, 0)], 1)
    ok, notes = True, []
    for name, marks in zip(GOLDEN, (9, 10, 21)):
        d = load(name)
        t0 = time.perf_counter()
        rep = check_theorem(d)
        dt = time.perf_counter() - t0
        with open(os.path.join(CORPUS, name), encoding="utf-8") as fh:
            got_marks = sum(1 for ln in fh if ln.startswith("# ["))
        good = rep.accepted and dt < 1.0 and got_marks == marks
        ok &= good
        notes.append(f"{name}:{rep.steps}steps/{got_marks}marks/{dt * 1e3:.0f}ms")
    # term shapes from the synthesizers
    t = JustVar("p0")
    s1, d1 = transform.converse_barcan(t, frozenset(), Y, parse_formula("P(y)"))
    s2, d2 = transform.converse_buridan(t, frozenset(), Y, parse_formula("P(y)"))
    s3, d3 = transform.jt45_barcan(t, frozenset(), Y, parse_formula("P(y)"), "FOJT45")
    shape1 = s1 == App(JustConst("c_UI"), t)
    # (f(r) . t): a compound term applied to t, with the generalized EI constant inside
    shape2 = isinstance(s2, App) and s2.right == t and "gen[y]" in repr(s2.left)
    # (r . ?((c2 . c1) . ?t))
    shape3 = (isinstance(s3, App) and isinstance(s3.right, Query)
              and s3.right.body == App(App(JustConst("c_CP"), JustConst("c_UI")), Query(t)))
    synth = all(check_theorem(d).accepted for d in (d1, d2, d3))
    ok &= shape1 and shape2 and shape3 and synth
    notes.append(f"shapes={shape1},{shape2},{shape3} synth_accepted={synth}")
    return ok, " ".join(notes)


# -- 2. mutation suite ----------------------------------------------------------------


def criterion_2():
    ok, notes = True, []
    for name in GOLDEN:
        stem = name[:-3]
        files = sorted(glob.glob(os.path.join(CORPUS, "mutants", f"{stem}_m*.jd")))
        rejected = 0
        for p in files:
            with open(p, encoding="utf-8") as fh:
                text = fh.read()
            want = int(re.search(r"step=(\d+)", text).group(1))
            rep = check(parse_derivation(text, base_dir=CORPUS))
            rejected += (not rep.accepted) and rep.step == want
        ok &= len(files) >= 50 and rejected == len(files)
        notes.append(f"{stem}:{rejected}/{len(files)}")
    return ok, "rejected_at_recorded_step " + " ".join(notes)


# -- 3. soundness fuzz ------------------------------------------------------------------

# drop_query only applies where ? exists
CANARY_LOGICS = {f: ("FOJT45",) if f == "drop_query" else ("FOLPb", "FOJT45") for f in harness.FAULTS}


def criterion_3():
    t0 = time.perf_counter()
    notes, ok = [], True
    for logic in ("FOLPb", "FOJT45"):
        rep = harness.run_soundness(harness.GenConfig(seed=42, logic=logic, trials=500))
        ok &= rep.trials >= 500 and rep.passed
        notes.append(f"{logic}:{rep.trials}trials/{len(rep.violations)}violations")
    elapsed = time.perf_counter() - t0
    ok &= elapsed <= 60
    notes.append(f"time={elapsed:.1f}s")
    trips = []
    for fault, logics in CANARY_LOGICS.items():
        for logic in logics:
            rep = harness.run_soundness(harness.GenConfig(seed=42, logic=logic, trials=200, fault=fault),
                                        stop_at_first=True)
            first = rep.first_violation()
            ok &= first is not None
            trips.append(f"{fault}/{logic}@{first}")
    notes.append("canaries " + ",".join(trips))
    return ok, " ".join(notes)


# -- 4. internalization ----------------------------------------------------------------------


def criterion_4():
    rng = random.Random("internalize")
    n = good = 0
    while n < 25:
        logic = rng.choice(("FOLPb", "FOJT45"))
        d = harness.gen_derivation(rng, logic, n_hyps=rng.randint(0, 3), witnesses=("@a",))
        n += 1
        t, out = transform.internalize(d)
        union = frozenset().union(*(h.xs for h in d.hypotheses))
        c = out.conclusion
        good += (check(out).accepted and isinstance(c, Just) and c.term == t and c.xs == union
                 and c.body == d.conclusion and out.hypotheses == d.hypotheses)
    return good == n, f"{good}/{n} accepted with subscript equal to the union"


# -- 5. template membership oracle -------------------------------------------------------------


def _perturb(rng, f, phis, terms):
    """A nearby formula that may or may not be a member; terms stay in the universe."""
    if isinstance(f, Just) and rng.random() < 0.5:
        r = rng.random()
        if r < 0.35:
            return Just(f.term, f.xs ^ {rng.choice((Var("@a"), Var("@b"), Var("x")))}, f.body)
        if r < 0.6:
            return f.body
        if r < 0.8:
            return Just(rng.choice(terms), f.xs, f.body)
        return Just(f.term, f.xs, _perturb(rng, f.body, phis, terms))
    if isinstance(f, Just):
        return Just(f.term, f.xs, _perturb(rng, f.body, phis, terms))
    if isinstance(f, (Or, And)):
        r = rng.random()
        if r < 0.2:
            return type(f)(f.right, f.left)
        if r < 0.3:
            return (And if isinstance(f, Or) else Or)(f.left, f.right)
        if r < 0.65:
            return type(f)(_perturb(rng, f.left, phis, terms), f.right)
        return type(f)(f.left, _perturb(rng, f.right, phis, terms))
    if isinstance(f, Not):
        return f.body if rng.random() < 0.5 else Not(_perturb(rng, f.body, phis, terms))
    return rng.choice(phis)


def criterion_5():
    rng = random.Random("member")
    alphabet = ("p0", "c0", ".")
    oracle = harness.brute_oracle(alphabet, depth=2)
    terms = list(oracle.terms)
    queries = agree = positives = 0
    degs = set()
    while queries < 10_000:
        F = harness.gen_template(rng, disjunctive=rng.random() < 0.5, max_letters=3, depth=3)
        if rng.random() < 0.3:
            F = templates.TNot(F)
        if degree(F) > 3:
            continue
        degs.add(degree(F))
        k = max(harness._letter_ids(F))
        phis = [harness.gen_formula(rng, 1, witnesses=("@a", "@b")) for _ in range(k)]
        for psi in harness.gen_members(rng, F, phis, 20, terms=terms):
            for q in (psi, _perturb(rng, psi, phis, terms), _perturb(rng, psi, phis, terms)):
                want = oracle(F, phis, q)
                positives += want
                agree += member(F, phis, q) == want
                queries += 1
    return agree == queries, (f"{agree}/{queries} agree ({positives} members) degrees={sorted(degs)} "
                              f"universe={len(terms)} terms")


# -- 6. transformer totality ----------------------------------------------------------------------


def _implication_theorem(rng, logic):
    cfg = harness.GenConfig(logic=logic)
    while True:
        _, d = harness.gen_theorem(cfg, rng)
        if isinstance(d.conclusion, Implies) and len(d.steps) < 400:
            return d


def _phis(rng, k, logic, avoid=None):
    out = []
    while len(out) < k:
        f = harness.gen_formula(rng, 1, logic, witnesses=("@a",))
        if avoid is None or avoid not in free_vars(f):
            out.append(f)
    return out


def criterion_6(runs=100):
    rng = random.Random("transformers")
    terms = templates.term_universe(("p0", "p1", "c0", "."), 1)
    counts = dict.fromkeys(("semi", "vacuous", "genbarcan", "combine"), 0)
    good = dict(counts)
    for i in range(runs):
        logic = ("FOLPb", "FOJT45")[i % 2]
        # semi_replacement: positive template, last letter is the replaced one
        F = harness.gen_template(rng, disjunctive=False, max_letters=3, depth=2)
        k = max(harness._letter_ids(F))
        imp = _implication_theorem(rng, logic)
        chi, psi = imp.conclusion.left, imp.conclusion.right
        phis = _phis(rng, k - 1, logic)
        (phi,) = harness.gen_members(rng, F, phis + [chi], 1, terms)
        theta, d = templates.semi_replacement(F, imp, phis, phi, logic)
        counts["semi"] += 1
        good["semi"] += (member(F, phis + [psi], theta) and check_theorem(d).accepted
                         and d.conclusion == Implies(phi, theta))
        # vacuous quantification
        F = harness.gen_template(rng, True, 3, 3)
        k = max(harness._letter_ids(F))
        phis = _phis(rng, k, logic, avoid=Y)
        (psi,) = harness.gen_members(rng, F, phis, 1, terms)
        theta, d = templates.vacuous_quantification(F, phis, psi, Y, logic)
        counts["vacuous"] += 1
        good["vacuous"] += (member(F, phis, theta) and check_theorem(d).accepted
                            and d.conclusion.left == Exists(Y, psi))
        # generalized Barcan: the last letter carries y
        F = harness.gen_template(rng, True, 3, 3)
        k = max(harness._letter_ids(F))
        phis = _phis(rng, k - 1, logic, avoid=Y)
        phi_y = rng.choice((parse_formula("P(y)"), parse_formula("R(@a,y)"), parse_formula("P(y) | Q()")))
        (psi,) = harness.gen_members(rng, F, phis + [phi_y], 1, terms)
        theta, d = templates.generalized_barcan(F, Y, phi_y, phis, psi, logic)
        counts["genbarcan"] += 1
        good["genbarcan"] += (member(F, phis + [Forall(Y, phi_y)], theta) and check_theorem(d).accepted
                              and d.conclusion.left == Forall(Y, psi))
        # combine
        F = harness.gen_template(rng, True, 3, 3)
        k = max(harness._letter_ids(F))
        phis = _phis(rng, k, logic)
        ms = harness.gen_members(rng, F, phis, rng.randint(1, 4), terms)
        theta, d = templates.combine(F, phis, ms, logic)
        counts["combine"] += 1
        good["combine"] += member(F, phis, theta) and check_theorem(d).accepted
    ok = all(good[k] == counts[k] >= runs for k in counts)
    return ok, " ".join(f"{k}:{good[k]}/{counts[k]}" for k in counts)


# -- 7. witness properties and CS(V) ------------------------------------------------------------------


def _rule_tag(s):
    return type(s.rule).__name__ + (":" + s.rule.schema if hasattr(s.rule, "schema") else "")


def criterion_7():
    rng = random.Random("witness")
    n = rep_ok = gen_ok = 0
    while n < 100:
        logic = rng.choice(("FOLPb", "FOJT45"))
        d = harness.gen_derivation(rng, logic, n_hyps=0, witnesses=("@a", "@b"))
        if not witness_vars(d.conclusion):
            continue
        n += 1
        a = sorted(witness_vars(d.conclusion))[0]
        out = transform.replace_witness(d, a, Var("v"))
        rep_ok += (check(out).accepted and len(out.steps) == len(d.steps)
                   and [_rule_tag(s) for s in out.steps] == [_rule_tag(s) for s in d.steps]
                   and a not in witness_vars(out.conclusion))
        g = transform.generalize_witness(d, a, Var("v"))
        gen_ok += check(g).accepted and g.conclusion == Forall(Var("v"), out.conclusion)
    # CS(V) agrees with CS on witness-free formulas
    schematic = ConstantSpecification.schematic()
    cfg = harness.GenConfig()
    pool = [harness.gen_axiom_instance(cfg, s, rng) for s in schemas_for("FOLPb") for _ in range(3)]
    pool = [f for f in pool if not witness_vars(f)]
    explicit = ConstantSpecification.explicit([(f"e{i}", f) for i, f in enumerate(pool[:20])])
    cases = same = 0
    while cases < 1000:
        schema = rng.choice(schemas_for("FOLPb"))
        f = harness.gen_axiom_instance(cfg, schema, rng) if rng.random() < 0.6 else rng.choice(pool)
        if rng.random() < 0.2:
            f = Not(f)
        if witness_vars(f):
            continue
        c = rng.choice([schematic.constant_for(s) for s in schemas_for("FOLPb")])
        same += csv_contains(schematic, c, f) == cs_contains(schematic, c, f)
        e = f"e{rng.randrange(20)}"
        same += csv_contains(explicit, e, f) == cs_contains(explicit, e, f)
        cases += 2
    ok = rep_ok == n == gen_ok and same == cases
    return ok, f"replace={rep_ok}/{n} generalize={gen_ok}/{n} csv_vs_cs={same}/{cases}"


# -- 8. syntax laws and evaluator --------------------------------------------------------------------


def criterion_8():
    rng = random.Random("syntax")
    trips = just = fv_ok = 0
    for i in range(10_000):
        logic = ("FOLPb", "FOJT45")[i % 2]
        f = harness.gen_formula(rng, 4, logic)
        trips += parse_formula(print_formula(f), logic) == f
        for g in subformulas(f):
            if isinstance(g, Just):
                just += 1
                fv_ok += free_vars(g) == g.xs
    # every skeleton with up to 3 worlds, domains of size 1 and 2
    evals = agree = skel = 0
    for logic in ("FOLPb", "FOJT45"):
        for n in (1, 2, 3):
            for worlds, rel in harness.skeletons(logic, n):
                for k in (1, 2):
                    skel += 1
                    domain = [f"@d{j}" for j in range(k)]
                    for _ in range(2):
                        interp = harness._interp(rng, worlds, domain)
                        ev = (EvidenceSpec.full() if logic == "FOLPb" and rng.random() < 0.3
                              else EvidenceSpec.closure(_base(rng, logic, worlds, domain)))
                        m = FittingModel(logic, worlds, rel, domain, interp, ev)
                        for _ in range(3):
                            f = universal_closure(harness.gen_formula(rng, rng.randint(1, 4), logic, domain))
                            e = m.evaluator((f,))
                            for w in worlds:
                                evals += 1
                                agree += e.eval(w, f) == harness.reference_eval(m, w, f, e)
    ok = trips == 10_000 and fv_ok == just and agree == evals
    return ok, (f"round_trip={trips}/10000 fv_law={fv_ok}/{just} "
                f"eval_vs_reference={agree}/{evals} over {skel} skeleton/domain pairs")


def _base(rng, logic, worlds, domain):
    g = harness.SyntaxGen(rng, logic, term_depth=1, witnesses=domain)
    return {(g.term(), g.formula(1), rng.choice(worlds)) for _ in range(rng.randint(0, 4))}


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6, criterion_7,
            criterion_8]


@pytest.mark.parametrize("n", range(1, 9))
def test_criterion(n, capsys):
    t0 = time.perf_counter()
    ok, detail = CRITERIA[n - 1]()
    with capsys.disabled():
        print("\n" + _line(n, ok, detail) + f"  [{time.perf_counter() - t0:.1f}s]")
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for n, fn in enumerate(CRITERIA, 1):
        t0 = time.perf_counter()
        ok, detail = fn()
        failed += not ok
        print(_line(n, ok, detail) + f"  [{time.perf_counter() - t0:.1f}s]", flush=True)
    sys.exit(1 if failed else 0)
