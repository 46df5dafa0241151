"""Trusted checker for Hilbert-style derivations."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

from . import _accel
from .axioms import ConstantSpecification, UnknownConstant, csv_contains, match_axiom, schemas_for
from .syntax import (
    And, Bar, Bottom, Forall, Formula, Iff, Implies, Just, JustConst, Not, Or, Query, Var,
    free_vars, subterms, terms_of,
)


@dataclass(frozen=True)
class Ax:
    schema: str


@dataclass(frozen=True)
class Cs:
    const: str


@dataclass(frozen=True)
class Hyp:
    k: int


@dataclass(frozen=True)
class Mp:
    i: int
    j: int


@dataclass(frozen=True)
class Gen:
    i: int
    var: Var


@dataclass(frozen=True)
class Taut:
    premises: tuple = ()


@dataclass(frozen=True)
class Step:
    index: int
    formula: Formula
    rule: object


@dataclass(frozen=True)
class Derivation:
    logic: str
    cs: ConstantSpecification
    hypotheses: tuple
    steps: tuple
    # (step index, label) pairs used as comments when printing
    marks: tuple = field(default=(), compare=False)

    @property
    def conclusion(self) -> Formula | None:
        return self.steps[-1].formula if self.steps else None

    def step(self, index: int) -> Step:
        for s in self.steps:
            if s.index == index:
                return s
        raise KeyError(index)


REASONS = (
    "BadAxiomInstance", "BadCsEntry", "BadHypIndex", "MpMismatch", "GenOnHypFreeVar",
    "GenShapeMismatch", "TautTooManyAtoms", "TautNotConsequence", "NoSteps",
    "NonEmptyHypotheses", "BadStepRef", "IllFormed", "TautDisabled",
)


@dataclass
class CheckReport:
    verdict: str
    step: int | None = None
    reason: str | None = None
    message: str = ""
    steps: int = 0
    rules: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict == "accepted"

    def __str__(self):
        if self.accepted:
            return f"accepted steps={self.steps}"
        return f"rejected step={self.step} reason={self.reason}"


def _reject(step, reason, msg, d, rules):
    return CheckReport("rejected", step, reason, msg, len(d.steps), dict(rules))


# -- propositional skeleton ---------------------------------------------------

_OPS = {And: _accel.AND, Or: _accel.OR, Implies: _accel.IMP, Iff: _accel.IFF}


def compile_propositional(f: Formula, atoms: dict, prog: list):
    """Append postfix code for ``f`` to ``prog``; opaque subformulas are numbered in ``atoms``."""
    stack = [(f, False)]
    while stack:
        g, done = stack.pop()
        t = type(g)
        if done:
            prog.append((_OPS[t], 0) if t in _OPS else (_accel.NOT, 0))
            continue
        if t is Bottom:
            prog.append((_accel.PUSH_FALSE, 0))
        elif t is Not:
            stack.append((g, True))
            stack.append((g.body, False))
        elif t in _OPS:
            stack.append((g, True))
            stack.append((g.right, False))
            stack.append((g.left, False))
        else:
            prog.append((_accel.PUSH_ATOM, atoms.setdefault(g, len(atoms))))


def tautology_counterexample(premises, conclusion: Formula):
    """None when conclusion follows propositionally from premises, else a dict atom -> bool.

    Raises ValueError past the atom limit."""
    atoms: dict = {}
    prog: list = []
    for p in premises:
        compile_propositional(p, atoms, prog)
    for _ in range(len(premises) - 1):
        prog.append((_accel.AND, 0))
    compile_propositional(conclusion, atoms, prog)
    if premises:
        prog.append((_accel.IMP, 0))
    if len(atoms) > _accel.MAX_ATOMS:
        raise ValueError(f"{len(atoms)} atoms")
    v = _accel.first_falsifying(prog, len(atoms))
    if v < 0:
        return None
    return {a: bool((v >> i) & 1) for a, i in atoms.items()}


def is_tautology(f: Formula) -> bool:
    return tautology_counterexample((), f) is None


def opaque_atoms(f: Formula) -> set:
    atoms: dict = {}
    compile_propositional(f, atoms, [])
    return set(atoms)


def well_formed_in(f: Formula, logic: str) -> bool:
    banned = Query if logic == "FOLPb" else Bar
    for t in terms_of(f):
        if any(isinstance(u, banned) for u in subterms(t)):
            return False
    return True


# -- checking ------------------------------------------------------------------


def check(d: Derivation, no_taut: bool = False) -> CheckReport:
    rules: Counter = Counter()
    if not d.steps:
        return _reject(0, "NoSteps", "derivation has no steps", d, rules)
    for h in d.hypotheses:
        if not well_formed_in(h, d.logic):
            return _reject(0, "IllFormed", f"hypothesis uses a constructor not in {d.logic}", d, rules)
    formulas: dict = {}
    last = None
    hyp_fv = set()
    for h in d.hypotheses:
        hyp_fv |= free_vars(h)
    for s in d.steps:
        n, f, r = s.index, s.formula, s.rule
        rules[type(r).__name__] += 1
        if last is not None and n <= last:
            return _reject(n, "BadStepRef", "step indices must increase", d, rules)
        last = n
        if not well_formed_in(f, d.logic):
            return _reject(n, "IllFormed", f"formula uses a constructor not in {d.logic}", d, rules)

        def ref(i):
            return formulas.get(i)

        if isinstance(r, Ax):
            if r.schema not in schemas_for(d.logic) or match_axiom(r.schema, f, d.logic) is None:
                return _reject(n, "BadAxiomInstance", f"not an instance of {r.schema}", d, rules)
        elif isinstance(r, Cs):
            ok = isinstance(f, Just) and f.term == JustConst(r.const) and not f.xs
            if ok:
                try:
                    ok = csv_contains(d.cs, r.const, f.body, d.logic)
                except UnknownConstant:
                    ok = False
            if not ok:
                return _reject(n, "BadCsEntry", f"not a constant-specification entry for {r.const}", d, rules)
        elif isinstance(r, Hyp):
            if not (1 <= r.k <= len(d.hypotheses)) or d.hypotheses[r.k - 1] != f:
                return _reject(n, "BadHypIndex", f"does not match hypothesis {r.k}", d, rules)
        elif isinstance(r, Mp):
            a, b = ref(r.i), ref(r.j)
            if a is None or b is None:
                return _reject(n, "BadStepRef", "MP cites a missing or later step", d, rules)
            if b != Implies(a, f):
                return _reject(n, "MpMismatch", f"step {r.j} is not step {r.i} -> step {n}", d, rules)
        elif isinstance(r, Gen):
            a = ref(r.i)
            if a is None:
                return _reject(n, "BadStepRef", "GEN cites a missing or later step", d, rules)
            if not r.var.is_basic or f != Forall(r.var, a):
                return _reject(n, "GenShapeMismatch", f"step {n} is not forall {r.var.name} over step {r.i}", d, rules)
            if d.hypotheses and r.var in hyp_fv:
                return _reject(n, "GenOnHypFreeVar", f"{r.var.name} is free in a hypothesis", d, rules)
        elif isinstance(r, Taut):
            if no_taut:
                return _reject(n, "TautDisabled", "TAUT is disabled in strict mode", d, rules)
            prem = [ref(i) for i in r.premises]
            if any(p is None for p in prem):
                return _reject(n, "BadStepRef", "TAUT cites a missing or later step", d, rules)
            try:
                cex = tautology_counterexample(prem, f)
            except ValueError:
                return _reject(n, "TautTooManyAtoms", f"more than {_accel.MAX_ATOMS} atoms", d, rules)
            if cex is not None:
                return _reject(n, "TautNotConsequence", "not a tautological consequence", d, rules)
        else:
            return _reject(n, "BadStepRef", f"unknown rule {r!r}", d, rules)
        formulas[n] = f
    return CheckReport("accepted", None, None, "", len(d.steps), dict(rules))


def check_theorem(d: Derivation, no_taut: bool = False) -> CheckReport:
    if d.hypotheses:
        return _reject(0, "NonEmptyHypotheses", "theorem check needs an empty hypothesis list", d, Counter())
    return check(d, no_taut)
