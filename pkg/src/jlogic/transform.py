"""Proof transformers and term synthesizers.  Every output is a Derivation the
kernel accepts; nothing here is trusted."""

from __future__ import annotations

from ._builder import (
    BuildError, ExpansionOverflow, NotATautology, ProofBuilder, discharge, prove_tautology,
)
from .axioms import schematic_constant
from .kernel import Ax, Cs, Derivation, Gen, Hyp, Mp, Step, Taut, check
from .syntax import (
    App, Bar, Exists, Forall, Formula, Implies, Just, JustConst, JustVar, Not, Query, Term, Var,
    all_vars, fresh_basic, imp, replace_everywhere, subterms, witness_vars,
)


class TransformError(ValueError):
    pass


class NotAccepted(TransformError):
    pass


class HypNotFound(TransformError):
    pass


class HypShapeError(TransformError):
    pass


class CsNotSchematic(TransformError):
    pass


class TautExpansionOverflow(TransformError):
    pass


class VarNotFresh(TransformError):
    pass


class PreconditionViolation(TransformError):
    pass


class WrongLogic(TransformError):
    pass


def _require_accepted(d: Derivation):
    r = check(d)
    if not r.accepted:
        raise NotAccepted(f"input rejected at step {r.step}: {r.reason}")


# -- deduction -------------------------------------------------------------------


def deduction(d: Derivation, hyp, verify: bool = True) -> Derivation:
    """Discharge one hypothesis (1-based index or the formula itself)."""
    if verify:
        _require_accepted(d)
    if isinstance(hyp, Formula):
        if hyp not in d.hypotheses:
            raise HypNotFound("formula is not among the hypotheses")
        k = d.hypotheses.index(hyp) + 1
    else:
        k = int(hyp)
        if not 1 <= k <= len(d.hypotheses):
            raise HypNotFound(f"no hypothesis {k}")
    return discharge(d, k)


# -- internalization ------------------------------------------------------------

TAUT_BUDGET = 200000


def internalize(d: Derivation, verify: bool = True, budget: int = TAUT_BUDGET):
    """Return ``(t, d2)`` where d2 derives ``[t]_X psi`` from the same hypotheses,
    psi being the conclusion of d and X the union of the hypothesis subscripts."""
    if verify:
        _require_accepted(d)
    if d.cs.mode != "schematic":
        raise CsNotSchematic("internalization needs a schematic constant specification")
    seen = set()
    X = frozenset()
    bodies: dict = {}
    for k, h in enumerate(d.hypotheses, 1):
        if not (isinstance(h, Just) and isinstance(h.term, JustVar)) or h.term in seen:
            raise HypShapeError(f"hypothesis {k} is not an assertion on a fresh justification variable")
        seen.add(h.term)
        X |= h.xs
        bodies.setdefault(h.body, k)
    b = ProofBuilder(d.logic, d.cs, d.hypotheses, verify=False)
    try:
        last = _internalize_into(b, d, X, bodies, budget)
    except ExpansionOverflow as e:
        raise TautExpansionOverflow(str(e)) from e
    out = b.derivation(upto=last)
    return b.f(last).term, out


def _internalize_into(b: ProofBuilder, d: Derivation, X: frozenset, bodies: dict, budget: int) -> int:
    out: dict = {}
    formulas: dict = {}
    for s in d.steps:
        n, sigma, r = s.index, s.formula, s.rule
        formulas[n] = sigma
        if sigma in bodies:
            got = b.hyp(bodies[sigma])
        elif isinstance(r, Ax):
            got = b.cs_entry(r.schema, sigma)
        elif isinstance(r, (Cs, Hyp)):
            src = b.cs_const(r.const, sigma.body) if isinstance(r, Cs) else b.hyp(r.k)
            f = b.f(src)
            got = b.mp(src, b.ax("B4", t=f.term, X=f.xs, phi=f.body))
        elif isinstance(r, Mp):
            uj, ui = b.f(out[r.j]).term, b.f(out[r.i]).term
            b2 = b.ax("B2", t=uj, s=ui, X=X, phi=formulas[r.i], psi=sigma)
            got = b.mp(out[r.i], b.mp(out[r.j], b2))
        elif isinstance(r, Gen):
            ui = b.f(out[r.i]).term
            got = b.mp(out[r.i], b.ax("B5", t=ui, X=X, x=r.var, phi=formulas[r.i]))
        elif isinstance(r, Taut):
            prem = [formulas[i] for i in r.premises]
            t_formula = imp(*prem, sigma)
            try:
                proof = prove_tautology(t_formula, d.logic, d.cs, budget=budget)
            except NotATautology as e:
                raise BuildError(str(e)) from e
            sub = ProofBuilder(d.logic, d.cs, (), verify=False)
            tidx = _internalize_into(sub, proof, frozenset(), {}, budget)
            got = b.lift_subscript(b.include(sub.derivation(upto=tidx)), X)
            for i in r.premises:
                g = b.f(got)
                rest = g.body.right
                b2 = b.ax("B2", t=g.term, s=b.f(out[i]).term, X=X, phi=g.body.left, psi=rest)
                got = b.mp(out[i], b.mp(got, b2))
        else:
            raise BuildError(f"unknown rule {r!r}")
        out[n] = b.lift_subscript(got, X)
    return out[d.steps[-1].index]


# -- witness elimination --------------------------------------------------------


def _vars_of(d: Derivation) -> set:
    vs = set()
    for s in d.steps:
        vs |= all_vars(s.formula)
        if isinstance(s.rule, Gen):
            vs.add(s.rule.var)
    for h in d.hypotheses:
        vs |= all_vars(h)
    return vs


def replace_witness(d: Derivation, a: Var, y: Var, verify: bool = True) -> Derivation:
    """Replace every occurrence of witness ``a`` by the fresh basic variable ``y``."""
    if verify:
        _require_accepted(d)
    if d.hypotheses:
        raise PreconditionViolation("derivation must be hypothesis-free")
    if not a.is_witness or not y.is_basic:
        raise PreconditionViolation("expected a witness variable and a basic variable")
    if y in _vars_of(d):
        raise VarNotFresh(f"{y.name} already occurs in the derivation")
    steps = tuple(Step(s.index, replace_everywhere(s.formula, a, y), s.rule) for s in d.steps)
    return Derivation(d.logic, d.cs, d.hypotheses, steps, d.marks)


def generalize_witness(d: Derivation, a: Var | None = None, y: Var | None = None,
                       verify: bool = True) -> Derivation:
    """From |- phi(a) build |- forall y. phi(y) for a new basic variable y."""
    if verify:
        _require_accepted(d)
    if a is None:
        ws = sorted(witness_vars(d.conclusion))
        a = ws[0] if ws else Var("@a")
    if y is None:
        y = fresh_basic(_vars_of(d), "y")
    d2 = replace_witness(d, a, y, verify=False)
    last = d2.steps[-1]
    n = last.index + 1
    return Derivation(d2.logic, d2.cs, d2.hypotheses,
                      d2.steps + (Step(n, Forall(y, last.formula), Gen(last.index, y)),), d2.marks)


# -- synthesizers -----------------------------------------------------------------


def _precheck(X, y: Var, logic: str, t: Term, cs):
    X = frozenset(X)
    if cs is not None and cs.mode != "schematic":
        raise CsNotSchematic("synthesis needs a schematic constant specification")
    if not y.is_basic:
        raise PreconditionViolation(f"{y.name} must be a basic variable")
    if y in X:
        raise PreconditionViolation(f"{y.name} occurs in the subscript")
    banned = Query if logic == "FOLPb" else Bar
    if any(isinstance(u, banned) for u in subterms(t)):
        raise PreconditionViolation(f"term uses a constructor not admitted in {logic}")
    return X


def _cbarcan_into(b: ProofBuilder, t: Term, X: frozenset, y: Var, phi: Formula, use_taut: bool):
    """Steps for [t]_X forall y.phi -> forall y.[(c_UI . t)]_{Xy} phi; returns (marks, last)."""
    Xy = X | {y}
    A = Forall(y, phi)
    c1 = JustConst(schematic_constant("A1.UI"))
    m = []
    m.append(b.ax("A1.UI", phi=phi, x=y, e=y))
    m.append(b.cs_entry("A1.UI", b.f(m[0])))
    m.append(b.lift_subscript(m[1], Xy))
    m.append(b.ax("B2", t=c1, s=t, X=Xy, phi=A, psi=phi))
    m.append(b.mp(m[2], m[3]))
    m.append(b.ax("A3", t=t, X=X, y=y, phi=A))
    if use_taut:
        m.append(b.taut(Implies(b.f(m[5]).left, b.f(m[4]).right), [m[4], m[5]]))
    else:
        m.append(b.syl(m[5], m[4]))
    m.append(b.gen(m[6], y))
    f7 = b.f(m[6])
    ud = b.ax("A1.UD", x=y, phi=f7.left, psi=f7.right)
    m.append(b.mp(m[7], ud))
    return m, m[-1]


def _marks(idx: list, labels) -> tuple:
    return tuple((i, f"[{k}] {lab}") for k, (i, lab) in enumerate(zip(idx, labels), 1))


CBARCAN_LABELS = (
    "UI instance", "constant specification", "A3 lift", "B2", "modus ponens", "A3",
    "from 5 and 6", "generalization", "UD and modus ponens",
)
CBURIDAN_LABELS = (
    "EI instance and generalization", "internalized", "A3 lift", "converse Barcan term",
    "UI and modus ponens", "B2", "A2", "from 6 and 7", "generalization", "ED and modus ponens",
)
JT45_LABELS = (
    "UI instance", "constant specification", "A3 lift", "contraposition axiom",
    "constant specification", "A3 lift", "B2", "B2", "contraposition of 8", "lemma: B6, B1",
    "from 9 and 10", "A2", "contraposition of 12", "from 11 and 13", "generalization",
    "UD and modus ponens", "internalized", "A3 lift", "B2", "lemma: B1, B6", "from 19 and 20",
)


def converse_barcan(t: Term, X, y: Var, phi: Formula, logic: str = "FOLPb", cs=None,
                    use_taut: bool = True):
    """Term ``(c_UI . t)`` and a derivation of
    ``[t]_X forall y.phi -> forall y.[(c_UI . t)]_{X+y} phi``."""
    X = _precheck(X, y, logic, t, cs)
    b = ProofBuilder(logic, cs)
    m, last = _cbarcan_into(b, t, X, y, phi, use_taut)
    return App(JustConst(schematic_constant("A1.UI")), t), b.derivation(upto=last, marks=_marks(m, CBARCAN_LABELS))


def _cburidan_into(b: ProofBuilder, t: Term, X: frozenset, y: Var, phi: Formula, use_taut: bool):
    E = Exists(y, phi)
    C = Implies(phi, E)
    m = []
    ei = b.ax("A1.EI", phi=phi, x=y, e=y)
    m.append(b.gen(ei, y))
    # internalize: [c_EI] C, then B5
    c = b.cs_entry("A1.EI", C)
    m.append(b.mp(c, b.ax("B5", t=b.f(c).term, X=frozenset(), x=y, phi=C)))
    r = b.f(m[1]).term
    m.append(b.lift_subscript(m[1], X))
    _, cb = _cbarcan_into(b, r, X, y, C, use_taut)
    m.append(b.mp(m[2], cb))
    f4 = b.f(m[3])  # forall y.[f]_{Xy} C
    m.append(b.mp(m[3], b.ax("A1.UI", phi=f4.body, x=y, e=y)))
    fr = b.f(m[4]).term
    m.append(b.mp(m[4], b.ax("B2", t=fr, s=t, X=X | {y}, phi=phi, psi=E)))
    s = App(fr, t)
    m.append(b.ax("A2", t=s, X=X, y=y, phi=E))
    if use_taut:
        m.append(b.taut(Implies(b.f(m[5]).left, b.f(m[6]).right), [m[5], m[6]]))
    else:
        m.append(b.syl(m[5], m[6]))
    m.append(b.gen(m[7], y))
    f8 = b.f(m[7])
    m.append(b.mp(m[8], b.ax("A1.ED", x=y, phi=f8.left, psi=f8.right)))
    return m, s


def converse_buridan(t: Term, X, y: Var, phi: Formula, logic: str = "FOLPb", cs=None,
                     use_taut: bool = True):
    """Term ``((c_UI . gen[y](c_EI)) . t)`` and a derivation of
    ``exists y.[t]_{X+y} phi -> [s]_X exists y.phi``."""
    X = _precheck(X, y, logic, t, cs)
    b = ProofBuilder(logic, cs)
    m, s = _cburidan_into(b, t, X, y, phi, use_taut)
    return s, b.derivation(upto=m[-1], marks=_marks(m, CBURIDAN_LABELS))


def jt45_lemma_query(b: ProofBuilder, t: Term, X: frozenset, phi: Formula) -> int:
    """~[?t]_X ~[t]_X phi -> phi, from B6, B1 and double negation."""
    T = Just(t, X, phi)
    b6 = b.ax("B6", t=t, X=X, phi=phi)  # ~T -> [?t]_X ~T
    cp = b.contrapose(b6)  # ~[?t]_X ~T -> ~~T
    b1 = b.ax("B1", t=t, X=X, phi=phi)
    return b.chain(cp, b.nn_elim(T), b1)


def jt45_lemma_negative(b: ProofBuilder, u: Term, X: frozenset, A: Formula, use_taut: bool) -> int:
    """A -> [?u]_X ~[u]_X ~A, from B1 and B6."""
    b1 = b.ax("B1", t=u, X=X, phi=Not(A))  # [u]_X ~A -> ~A
    b6 = b.ax("B6", t=u, X=X, phi=Not(A))  # ~[u]_X ~A -> [?u]_X ~[u]_X ~A
    if use_taut:
        return b.taut(Implies(A, b.f(b6).right), [b1, b6])
    nn = b.nn_intro(A)
    return b.chain(nn, b.contrapose(b1), b6)


def jt45_barcan(t: Term, X, y: Var, phi: Formula, logic: str = "FOJT45", cs=None,
                use_taut: bool = True):
    """Term ``(r . ?(((c_CP . c_UI) . ?t)))`` and a derivation of
    ``forall y.[t]_{X+y} phi -> [b_t]_X forall y.phi`` in FOJT45."""
    if logic != "FOJT45":
        raise WrongLogic("the Barcan term is synthesized in FOJT45 only")
    X = _precheck(X, y, logic, t, cs)
    Xy = X | {y}
    T = Just(t, Xy, phi)
    A = Forall(y, T)
    c1 = JustConst(schematic_constant("A1.UI"))
    c2 = JustConst(schematic_constant("A1.CP"))
    b = ProofBuilder(logic, cs)
    m = []
    m.append(b.ax("A1.UI", phi=T, x=y, e=y))
    m.append(b.cs_entry("A1.UI", b.f(m[0])))
    m.append(b.lift_subscript(m[1], Xy))
    m.append(b.ax("A1.CP", phi=A, psi=T))
    m.append(b.cs_entry("A1.CP", b.f(m[3])))
    m.append(b.lift_subscript(m[4], Xy))
    b2 = b.ax("B2", t=c2, s=c1, X=Xy, phi=b.f(m[0]), psi=Implies(Not(T), Not(A)))
    m.append(b.mp(m[2], b.mp(m[5], b2)))
    c21 = App(c2, c1)
    m.append(b.mp(m[6], b.ax("B2", t=c21, s=Query(t), X=Xy, phi=Not(T), psi=Not(A))))
    u = App(c21, Query(t))
    m.append(b.contrapose(m[7]))
    m.append(jt45_lemma_query(b, t, Xy, phi))
    m.append(b.syl(m[8], m[9]))
    m.append(b.ax("A2", t=u, X=X, y=y, phi=Not(A)))
    m.append(b.contrapose(m[11]))
    m.append(b.syl(m[12], m[10]))
    m.append(b.gen(m[13], y))
    f14 = b.f(m[13])
    m.append(b.mp(m[14], b.ax("A1.UD", x=y, phi=f14.left, psi=f14.right)))
    # internalize the hypothesis-free derivation of step 16
    sub = b.derivation(upto=m[15])
    inner = ProofBuilder(logic, cs, verify=False)
    last = _internalize_into(inner, sub, frozenset(), {}, TAUT_BUDGET)
    m.append(b.include(inner.derivation(upto=last)))
    r = b.f(m[16]).term
    m.append(b.lift_subscript(m[16], X))
    N = b.f(m[15]).left
    m.append(b.mp(m[17], b.ax("B2", t=r, s=Query(u), X=X, phi=N, psi=Forall(y, phi))))
    m.append(jt45_lemma_negative(b, u, X, A, use_taut))
    if use_taut:
        m.append(b.taut(Implies(A, b.f(m[18]).right), [m[18], m[19]]))
    else:
        m.append(b.syl(m[19], m[18]))
    return App(r, Query(u)), b.derivation(upto=m[-1], marks=_marks(m, JT45_LABELS))
