"""Regenerate the golden derivations, lemma files and mutants in this directory.

Run from anywhere:  python3 corpus/make_corpus.py
The output is deterministic; rerunning should leave git clean.
"""

import os
import random

from jlogic import harness, transform
from jlogic._builder import ProofBuilder
from jlogic.kernel import check
from jlogic.syntax import Var
from jlogic.textio import parse_formula, parse_term, print_derivation

HERE = os.path.dirname(os.path.abspath(__file__))
MUTANTS_PER_FILE = 60

T, X, Y, PHI = "p0", frozenset({Var("x")}), Var("y"), "R(x,y)"

GOLDEN = {
    "converse_barcan": (transform.converse_barcan, "FOLPb"),
    "converse_buridan": (transform.converse_buridan, "FOLPb"),
    "jt45_barcan": (transform.jt45_barcan, "FOJT45"),
}


def _save(name, d, comments=None):
    rep = check(d)
    assert rep.accepted, (name, rep)
    with open(os.path.join(HERE, name), "w", encoding="utf-8") as fh:
        fh.write(print_derivation(d, comments=comments))


def golden():
    out = {}
    for stem, (synth, logic) in GOLDEN.items():
        _, d = synth(parse_term(T, logic), X, Y, parse_formula(PHI, logic), logic)
        _save(stem + ".jd", d)
        out[stem] = d
    return out


def lemmas():
    logic = "FOJT45"
    t, phi = parse_term(T, logic), parse_formula(PHI, logic)
    Xy = X | {Y}
    b = ProofBuilder(logic)
    _save("jt45_lemma_query.jd", b.derivation(upto=transform.jt45_lemma_query(b, t, Xy, phi)))
    b = ProofBuilder(logic)
    last = transform.jt45_lemma_negative(b, t, Xy, phi, use_taut=True)
    _save("jt45_lemma_negative.jd", b.derivation(upto=last))


def mutants(ds):
    mdir = os.path.join(HERE, "mutants")
    for f in os.listdir(mdir):
        if f.endswith(".jd"):
            os.remove(os.path.join(mdir, f))
    for stem, d in ds.items():
        rng = random.Random(f"mutants/{stem}")
        for k, m in enumerate(harness.mutants(d, rng, count=MUTANTS_PER_FILE), 1):
            rep = check(m.derivation)
            assert not rep.accepted and rep.step == m.step, (stem, k, m.what, rep)
            head = f"# expect rejected step={m.step} ({m.what})\n"
            with open(os.path.join(mdir, f"{stem}_m{k:02d}.jd"), "w", encoding="utf-8") as fh:
                fh.write(head + print_derivation(m.derivation))


if __name__ == "__main__":
    ds = golden()
    lemmas()
    mutants(ds)
    print("ok", {k: len(d.steps) for k, d in ds.items()})
