"""Templates: propositional modal shapes whose boxes stand for arbitrary
justification assertions, instantiation-set membership, and the constructive
transformers between members."""

from __future__ import annotations

import re
from dataclasses import dataclass
from itertools import product

from ._builder import ProofBuilder, discharge
from .kernel import Derivation
from .syntax import (
    And, App, Bang, Bar, Exists, Forall, Formula, Implies, Just, JustConst, JustVar, Not, Or, Query, Sum, Var,
    free_basic, free_vars, witness_vars,
)
from .transform import _cburidan_into, internalize, jt45_barcan


class TemplateError(ValueError):
    pass


class ArityMismatch(TemplateError):
    pass


class NotPositive(TemplateError):
    pass


class NotDisjunctive(TemplateError):
    pass


class MemberCheckFailed(TemplateError):
    pass


class FreeVarViolation(TemplateError):
    pass


class BudgetExceeded(TemplateError):
    pass


# -- template trees ---------------------------------------------------------------


@dataclass(frozen=True)
class Letter:
    n: int


@dataclass(frozen=True)
class TNot:
    body: object


@dataclass(frozen=True)
class TAnd:
    left: object
    right: object


@dataclass(frozen=True)
class TOr:
    left: object
    right: object


@dataclass(frozen=True)
class TBox:
    body: object


def letters(F) -> list:
    if isinstance(F, Letter):
        return [F.n]
    if isinstance(F, (TNot, TBox)):
        return letters(F.body)
    return letters(F.left) + letters(F.right)


def validate(F):
    ls = letters(F)
    if len(set(ls)) != len(ls):
        raise TemplateError("a letter occurs more than once")
    if any(n < 1 for n in ls):
        raise TemplateError("letters are numbered from 1")
    return F


def degree(F) -> int:
    if isinstance(F, Letter):
        return 0
    if isinstance(F, (TNot, TBox)):
        return 1 + degree(F.body)
    return 1 + degree(F.left) + degree(F.right)


def is_positive(F) -> bool:
    if isinstance(F, Letter):
        return True
    if isinstance(F, TNot):
        return False
    if isinstance(F, TBox):
        return is_positive(F.body)
    return is_positive(F.left) and is_positive(F.right)


def is_disjunctive(F) -> bool:
    if isinstance(F, Letter):
        return True
    if isinstance(F, (TNot, TAnd)):
        return False
    if isinstance(F, TBox):
        return is_disjunctive(F.body)
    return is_disjunctive(F.left) and is_disjunctive(F.right)


_TTOK = re.compile(r"\s*(p\d+|box\b|[~&|()])")


def parse_template(text: str):
    """``F ::= pN | ~F | (F & F) | (F | F) | box F``."""
    toks = []
    pos = 0
    text = text.rstrip()
    while pos < len(text):
        m = _TTOK.match(text, pos)
        if not m:
            raise TemplateError(f"bad template syntax at column {pos + 1}")
        toks.append(m.group(1))
        pos = m.end()
    i = 0

    def node():
        nonlocal i
        if i >= len(toks):
            raise TemplateError("unexpected end of template")
        t = toks[i]
        i += 1
        if t.startswith("p"):
            return Letter(int(t[1:]))
        if t == "~":
            return TNot(node())
        if t == "box":
            return TBox(node())
        if t == "(":
            left = node()
            if i >= len(toks) or toks[i] not in ("&", "|"):
                raise TemplateError("expected '&' or '|'")
            op = toks[i]
            i += 1
            right = node()
            if i >= len(toks) or toks[i] != ")":
                raise TemplateError("expected ')'")
            i += 1
            return TAnd(left, right) if op == "&" else TOr(left, right)
        raise TemplateError(f"unexpected {t!r}")

    F = node()
    if i != len(toks):
        raise TemplateError("trailing input after template")
    return validate(F)


def print_template(F) -> str:
    if isinstance(F, Letter):
        return f"p{F.n}"
    if isinstance(F, TNot):
        return "~" + print_template(F.body)
    if isinstance(F, TBox):
        return "box " + print_template(F.body)
    op = "&" if isinstance(F, TAnd) else "|"
    return f"({print_template(F.left)} {op} {print_template(F.right)})"


# -- membership -------------------------------------------------------------------


def _check_arity(F, phis):
    ls = letters(F)
    if ls and max(ls) > len(phis):
        raise ArityMismatch(f"template uses p{max(ls)} but only {len(phis)} formulas are given")


def member(F, phis, psi: Formula) -> bool:
    _check_arity(F, phis)
    return _member(F, tuple(phis), psi)


def _member(F, phis, psi) -> bool:
    if isinstance(F, Letter):
        return psi == phis[F.n - 1]
    if isinstance(F, TNot):
        return isinstance(psi, Not) and _member(F.body, phis, psi.body)
    if isinstance(F, TAnd):
        return isinstance(psi, And) and _member(F.left, phis, psi.left) and _member(F.right, phis, psi.right)
    if isinstance(F, TOr):
        return isinstance(psi, Or) and _member(F.left, phis, psi.left) and _member(F.right, phis, psi.right)
    if isinstance(F, TBox):
        return (isinstance(psi, Just) and psi.xs == witness_vars(psi.body)
                and _member(F.body, phis, psi.body))
    raise TemplateError(f"not a template: {F!r}")


def term_universe(alphabet=("p0", "c0", "."), depth: int = 2) -> list:
    """All terms of depth <= ``depth`` over the alphabet's atoms and operators
    (binary ``.`` and ``+``, unary ``!`` and ``?``)."""
    atoms = [JustVar(a) if re.match(r"p\d+$", a) else JustConst(a)
             for a in alphabet if a not in _OPS]
    binary = [s for s in alphabet if s in (".", "+")]
    unary = [s for s in alphabet if s in ("!", "?")]
    allt = list(atoms)
    for _ in range(depth):
        seen = set(allt)
        new = [(App if op == "." else Sum)(a, b) for op in binary for a, b in product(allt, allt)]
        new += [(Bang if op == "!" else Query)(a) for op in unary for a in allt]
        allt = allt + [t for t in dict.fromkeys(new) if t not in seen]
    return allt


_OPS = (".", "+", "!", "?")


def enumerate_members(F, phis, terms, budget: int = 200000):
    """All members of the instantiation set whose boxes use terms from ``terms``."""
    _check_arity(F, phis)
    out = _enum(F, tuple(phis), tuple(terms))
    if len(out) > budget:
        raise BudgetExceeded(f"{len(out)} members")
    return out


def _enum(F, phis, terms) -> list:
    if isinstance(F, Letter):
        return [phis[F.n - 1]]
    if isinstance(F, TNot):
        return [Not(a) for a in _enum(F.body, phis, terms)]
    if isinstance(F, (TAnd, TOr)):
        ctor = And if isinstance(F, TAnd) else Or
        return [ctor(a, b) for a in _enum(F.left, phis, terms) for b in _enum(F.right, phis, terms)]
    inner = _enum(F.body, phis, terms)
    return [Just(t, witness_vars(a), a) for a in inner for t in terms]


class BruteMember:
    """Reference membership by enumeration over a bounded term universe."""

    def __init__(self, terms=None, budget: int = 200000):
        self.terms = tuple(terms if terms is not None else term_universe())
        self.budget = budget
        self._cache: dict = {}

    def __call__(self, F, phis, psi) -> bool:
        key = (F, tuple(phis))
        got = self._cache.get(key)
        if got is None:
            got = frozenset(enumerate_members(F, phis, self.terms, self.budget))
            self._cache[key] = got
        return psi in got


# -- transformers -------------------------------------------------------------------


def _internalized_imp(b: ProofBuilder, d: Derivation, X) -> int:
    """Include an internalized copy of |- A -> B as [s]_X (A -> B)."""
    _, di = internalize(d, verify=False)
    return b.lift_subscript(b.include(di), X)


def _box_lift(b: ProofBuilder, psi: Just, ih: Derivation) -> int:
    """From |- A -> theta' (ih) and psi = [t]_X A give [t]_X A -> [(s . t)]_X theta'."""
    X = psi.xs
    imp_f = ih.conclusion
    s_idx = _internalized_imp(b, ih, X)
    b2 = b.ax("B2", t=b.f(s_idx).term, s=psi.term, X=X, phi=imp_f.left, psi=imp_f.right)
    return b.mp(s_idx, b2)


def _box_step(b: ProofBuilder, psi: Just, ih: Derivation) -> int:
    """As _box_lift, with the result subscript set to the witness variables of theta'."""
    return b.retarget_imp(_box_lift(b, psi, ih), witness_vars(ih.conclusion.right))


def _finish(b: ProofBuilder, idx: int):
    f = b.f(idx)
    return f.right, b.derivation(upto=idx)


def semi_replacement(F, imp: Derivation, phis, phi: Formula, logic: str | None = None):
    """For positive F and |- chi -> psi, map a member phi of F(phis, chi) to theta in
    F(phis, psi) with |- phi -> theta.  The letter after the last of ``phis`` is chi."""
    if not is_positive(F):
        raise NotPositive("template contains a negation")
    c = imp.conclusion
    if imp.hypotheses or not isinstance(c, Implies):
        raise TemplateError("imp must be a hypothesis-free derivation of an implication")
    chi = c.left
    phis = tuple(phis)
    if not member(F, phis + (chi,), phi):
        raise MemberCheckFailed("phi is not a member of the source instantiation set")
    logic = logic or imp.logic
    theta, d = _semi(F, imp, phis, phi, len(phis) + 1, logic)
    return theta, d


def _semi(F, imp, phis, phi, q, logic):
    b = ProofBuilder(logic, imp.cs)
    if isinstance(F, Letter):
        if F.n == q:
            return _finish(b, b.include(imp))
        return _finish(b, b.identity(phi))
    if isinstance(F, (TAnd, TOr)):
        _, dl = _semi(F.left, imp, phis, phi.left, q, logic)
        _, dr = _semi(F.right, imp, phis, phi.right, q, logic)
        l, r = b.include(dl), b.include(dr)
        return _finish(b, b.or_mono(l, r) if isinstance(F, TOr) else b.and_mono(l, r))
    # box
    _, dg = _semi(F.body, imp, phis, phi.body, q, logic)
    return _finish(b, _box_step(b, phi, dg))


def _no_free(y: Var, phis):
    for f in phis:
        if y in free_vars(f):
            raise FreeVarViolation(f"{y.name} is free in one of the formulas")


def vacuous_quantification(F, phis, psi: Formula, y: Var, logic: str = "FOLPb", cs=None):
    """For disjunctive F and y free in no phi_i, map psi in F(phis) to theta with
    |- exists y.psi -> theta."""
    if not is_disjunctive(F):
        raise NotDisjunctive("template is not disjunctive")
    phis = tuple(phis)
    _no_free(y, phis)
    if not member(F, phis, psi):
        raise MemberCheckFailed("psi is not a member of the instantiation set")
    return _vacuous(F, phis, psi, y, logic, cs)


def _vacuous(F, phis, psi, y, logic, cs):
    b = ProofBuilder(logic, cs)
    if isinstance(F, Letter):
        g = b.gen(b.identity(psi), y)
        return _finish(b, b.mp(g, b.ax("A1.ED", x=y, phi=psi, psi=psi)))
    if isinstance(F, TOr):
        _, dl = _vacuous(F.left, phis, psi.left, y, logic, cs)
        _, dr = _vacuous(F.right, phis, psi.right, y, logic, cs)
        l = b.syl(b.ax("A1.EI", phi=psi.left, x=y, e=y), b.include(dl))
        r = b.syl(b.ax("A1.EI", phi=psi.right, x=y, e=y), b.include(dr))
        m = b.or_mono(l, r)  # psi -> theta
        g = b.gen(m, y)
        th = b.f(m).right
        return _finish(b, b.mp(g, b.ax("A1.ED", x=y, phi=psi, psi=th)))
    # box: psi = [t]_X phi'
    t, X, body = psi.term, psi.xs, psi.body
    a3 = b.ax("A3", t=t, X=X, y=y, phi=body)
    em = b.exists_mono(a3, y)  # exists y.[t]_X phi' -> exists y.[t]_{Xy} phi'
    m, s = _cburidan_into(b, t, X, y, body, use_taut=False)
    first = b.syl(em, m[-1])  # exists y.psi -> [s]_X exists y.phi'
    _, dg = _vacuous(F.body, phis, body, y, logic, cs)
    box = _box_step(b, Just(s, X, Exists(y, body)), dg)
    return _finish(b, b.syl(first, box))


def _contains_letter(F, n) -> bool:
    return n in letters(F)


def _split_forall_or(b: ProofBuilder, a: Formula, c: Formula, y: Var, quantified_left: bool) -> int:
    """forall y.(a | c) -> (forall y.a | exists y.c), or the mirror image
    forall y.(a | c) -> (exists y.a | forall y.c) when quantified_left is False."""
    H = Forall(y, Or(a, c))
    keep, drop = (a, c) if quantified_left else (c, a)
    E = Exists(y, drop)
    N = Not(E)
    inner = ProofBuilder(b.logic, b.cs, (H, N), verify=False)
    disj = inner.mp(inner.hyp(1), inner.ax("A1.UI", phi=Or(a, c), x=y, e=y))
    notd = inner.mp(inner.hyp(2), inner.contrapose(inner.ax("A1.EI", phi=drop, x=y, e=y)))
    # disjunctive syllogism: (a | c) -> (~drop -> keep)
    k_keep = inner.ax("A1.K", phi=keep, psi=Not(drop))
    e_drop = inner.swap(inner.efq(drop, keep))
    sides = (k_keep, e_drop) if quantified_left else (e_drop, k_keep)
    ds = inner.or_elim(*sides)
    got = inner.mp(notd, inner.mp(disj, ds))
    g = inner.gen(got, y)
    d1 = discharge(inner.derivation(upto=g), 2)  # H |- ~E -> forall y.keep
    outer = ProofBuilder(b.logic, b.cs, (H,), verify=False)
    ne = outer.include(d1)
    A = Forall(y, keep)
    goal = Or(A, E) if quantified_left else Or(E, A)
    pos = outer.ax("A1.OR2" if quantified_left else "A1.OR1", phi=goal.left, psi=goal.right)
    negside = outer.syl(ne, outer.ax("A1.OR1" if quantified_left else "A1.OR2",
                                     phi=goal.left, psi=goal.right))
    res = outer.cases(pos, negside)
    return b.include(discharge(outer.derivation(upto=res), 1))


def generalized_barcan(F, y: Var, phi_y: Formula, phis, psi: Formula, logic: str = "FOLPb", cs=None):
    """For disjunctive F, map psi in F(phis, phi(y)) to theta in F(phis, forall y.phi(y))
    with |- forall y.psi -> theta.  The letter after the last of ``phis`` is q."""
    if not is_disjunctive(F):
        raise NotDisjunctive("template is not disjunctive")
    phis = tuple(phis)
    _no_free(y, phis)
    if not member(F, phis + (phi_y,), psi):
        raise MemberCheckFailed("psi is not a member of the instantiation set")
    if not y.is_basic:
        raise TemplateError("y must be a basic variable")
    return _genbarcan(F, y, phi_y, phis, psi, len(phis) + 1, logic, cs)


def _genbarcan(F, y, phi_y, phis, psi, q, logic, cs):
    b = ProofBuilder(logic, cs)
    if isinstance(F, Letter):
        if F.n == q:
            return _finish(b, b.identity(Forall(y, psi)))
        return _finish(b, b.ax("A1.UI", phi=psi, x=y, e=y))
    if isinstance(F, TOr):
        q_left = _contains_letter(F.left, q) or not _contains_letter(F.right, q)
        split = _split_forall_or(b, psi.left, psi.right, y, q_left)
        if q_left:
            _, dq = _genbarcan(F.left, y, phi_y, phis, psi.left, q, logic, cs)
            _, dv = _vacuous(F.right, phis, psi.right, y, logic, cs)
            mono = b.or_mono(b.include(dq), b.include(dv))
        else:
            _, dv = _vacuous(F.left, phis, psi.left, y, logic, cs)
            _, dq = _genbarcan(F.right, y, phi_y, phis, psi.right, q, logic, cs)
            mono = b.or_mono(b.include(dv), b.include(dq))
        return _finish(b, b.syl(split, mono))
    # box: psi = [t]_X phi'
    t, X, body = psi.term, psi.xs, psi.body
    if logic == "FOLPb":
        bb = b.ax("Bb", t=t, X=X, y=y, phi=body)
        bt = Bar(t)
    else:
        bt, dj = jt45_barcan(t, X, y, body, logic=logic, cs=cs, use_taut=False)
        bb = b.include(dj)
    a3 = b.ax("A3", t=t, X=X, y=y, phi=body)
    fm = b.forall_mono(a3, y)  # forall y.[t]_X phi' -> forall y.[t]_{Xy} phi'
    first = b.syl(fm, bb)
    _, dg = _genbarcan(F.body, y, phi_y, phis, body, q, logic, cs)
    box = _box_step(b, Just(bt, X, Forall(y, body)), dg)
    return _finish(b, b.syl(first, box))


def _left_disj(fs) -> Formula:
    out = fs[0]
    for f in fs[1:]:
        out = Or(out, f)
    return out


def _inject(b: ProofBuilder, fs, j: int) -> int:
    """fs[j] -> left-nested disjunction of fs."""
    if len(fs) == 1:
        return b.identity(fs[0])
    if j == 0:
        cur = b.ax("A1.OR1", phi=fs[0], psi=fs[1])
        k = 2
    else:
        cur = b.ax("A1.OR2", phi=_left_disj(fs[:j]), psi=fs[j])
        k = j + 1
    while k < len(fs):
        acc = b.f(cur).right
        cur = b.syl(cur, b.ax("A1.OR1", phi=acc, psi=fs[k]))
        k += 1
    return cur


def _fold_cases(b: ProofBuilder, imps) -> int:
    cur = imps[0]
    for j in imps[1:]:
        cur = b.or_elim(cur, j)
    return cur


def combine(F, phis, members, logic: str = "FOLPb", cs=None):
    """For disjunctive F and members psi_1..psi_k, a theta in F(phis) with
    |- (psi_1 | ... | psi_k) -> theta (left-nested disjunction)."""
    if not is_disjunctive(F):
        raise NotDisjunctive("template is not disjunctive")
    members = tuple(members)
    phis = tuple(phis)
    if not members:
        raise TemplateError("need at least one member")
    for m in members:
        if not member(F, phis, m):
            raise MemberCheckFailed("argument is not a member of the instantiation set")
    if len(members) == 1:
        b = ProofBuilder(logic, cs)
        return _finish(b, b.identity(members[0]))
    return _combine(F, phis, members, logic, cs)


def _combine(F, phis, ms, logic, cs):
    b = ProofBuilder(logic, cs)
    if isinstance(F, Letter):
        return _finish(b, _fold_cases(b, [b.identity(m) for m in ms]))
    if isinstance(F, TOr):
        _, dl = _combine(F.left, phis, tuple(m.left for m in ms), logic, cs)
        _, dr = _combine(F.right, phis, tuple(m.right for m in ms), logic, cs)
        li, ri = b.include(dl), b.include(dr)
        tl, tr = b.f(li).right, b.f(ri).right
        to_l = b.ax("A1.OR1", phi=tl, psi=tr)
        to_r = b.ax("A1.OR2", phi=tl, psi=tr)
        lefts = [m.left for m in ms]
        rights = [m.right for m in ms]
        per = []
        for j in range(len(ms)):
            a = b.chain(_inject(b, lefts, j), li, to_l)
            c = b.chain(_inject(b, rights, j), ri, to_r)
            per.append(b.or_elim(a, c))
        return _finish(b, _fold_cases(b, per))
    # box: each member [t_j]_{X_j} phi_j
    bodies = tuple(m.body for m in ms)
    _, dg = _combine(F.body, phis, bodies, logic, cs)
    gi = b.include(dg)
    theta_p = b.f(gi).right
    Y = witness_vars(theta_p)
    u = []
    steps = []
    for j, m in enumerate(ms):
        sub = ProofBuilder(logic, cs)
        inj = sub.include(dg)
        one = sub.syl(_inject(sub, list(bodies), j), inj)
        dj = sub.derivation(upto=one)  # phi_j -> theta'
        step = _box_lift(b, m, dj)  # [t_j]_{X_j} phi_j -> [(s_j . t_j)]_{X_j} theta'
        u.append(b.f(step).right.term)
        steps.append(step)
    # left-nested sum
    sums = [u[0]]
    for x in u[1:]:
        sums.append(Sum(sums[-1], x))
    total = sums[-1]
    finals = []
    for j, step in enumerate(steps):
        X = ms[j].xs
        cur = step
        if j == 0:
            cur = b.syl(cur, b.ax("B3L", t=u[0], s=u[1], X=X, phi=theta_p))
            k = 2
        else:
            cur = b.syl(cur, b.ax("B3R", t=sums[j - 1], s=u[j], X=X, phi=theta_p))
            k = j + 1
        while k < len(u):
            cur = b.syl(cur, b.ax("B3L", t=sums[k - 1], s=u[k], X=X, phi=theta_p))
            k += 1
        assert b.f(cur).right.term == total
        finals.append(b.retarget_imp(cur, Y))
    return _finish(b, _fold_cases(b, finals))


# -- sharp -----------------------------------------------------------------------------


def sharp(gamma) -> frozenset:
    out = set()
    for f in gamma:
        if isinstance(f, Just) and not free_basic(f) and f.xs == witness_vars(f.body):
            ys = sorted(free_basic(f.body))
            body = f.body
            for y in reversed(ys):
                body = Forall(y, body)
            out.add(body)
    return frozenset(out)
