"""Derivation construction helpers: a step builder with Hilbert-style
combinators, hypothesis discharge, and a Taut-free propositional prover."""

from __future__ import annotations

from .axioms import ConstantSpecification, instance, match_axiom
from .kernel import Ax, Cs, Derivation, Gen, Hyp, Mp, Step, Taut
from .syntax import (
    FALSE, And, Bottom, Forall, Formula, Iff, Implies, Just, JustConst, Not, Or, Var, free_vars,
)


class BuildError(RuntimeError):
    """A combinator was asked for something its inputs do not support."""


class ExpansionOverflow(RuntimeError):
    pass


class ProofBuilder:
    """Accumulates steps; identical formulas are proven once and reused."""

    def __init__(self, logic: str, cs: ConstantSpecification | None = None, hypotheses=(),
                 verify: bool = True, budget: int | None = None):
        self.logic = logic
        self.cs = cs or ConstantSpecification.schematic()
        self.hyps = tuple(hypotheses)
        self.steps: list = []
        self.index: dict = {}
        self.verify = verify
        self.budget = budget
        self._lemmas: dict = {}

    # primitive rules
    def _add(self, f: Formula, rule) -> int:
        got = self.index.get(f)
        if got is not None:
            return got
        if self.budget is not None and len(self.steps) >= self.budget:
            raise ExpansionOverflow(f"more than {self.budget} steps")
        self.steps.append((f, rule))
        n = len(self.steps)
        self.index[f] = n
        return n

    def f(self, i: int) -> Formula:
        return self.steps[i - 1][0]

    def ax_f(self, schema: str, f: Formula) -> int:
        if self.verify and match_axiom(schema, f, self.logic) is None:
            raise BuildError(f"not an instance of {schema}: {f!r}")
        return self._add(f, Ax(schema))

    def ax(self, schema: str, **kw) -> int:
        return self.ax_f(schema, instance(schema, **kw))

    def cs_entry(self, schema: str, f: Formula) -> int:
        c = self.cs.constant_for(schema)
        if self.verify and match_axiom(schema, f, self.logic) is None:
            raise BuildError(f"not an instance of {schema}: {f!r}")
        return self._add(Just(JustConst(c), frozenset(), f), Cs(c))

    def cs_const(self, c: str, body: Formula) -> int:
        return self._add(Just(JustConst(c), frozenset(), body), Cs(c))

    def hyp(self, k: int) -> int:
        return self._add(self.hyps[k - 1], Hyp(k))

    def hyp_f(self, f: Formula) -> int:
        return self.hyp(self.hyps.index(f) + 1)

    def mp(self, i: int, j: int) -> int:
        """From A (step i) and A -> B (step j) conclude B."""
        a, ab = self.f(i), self.f(j)
        if not isinstance(ab, Implies) or ab.left != a:
            raise BuildError(f"MP mismatch: {a!r} vs {ab!r}")
        return self._add(ab.right, Mp(i, j))

    def gen(self, i: int, x: Var) -> int:
        return self._add(Forall(x, self.f(i)), Gen(i, x))

    def taut(self, f: Formula, premises=()) -> int:
        return self._add(f, Taut(tuple(premises)))

    def derivation(self, upto: int | None = None, marks=()) -> Derivation:
        """The steps so far; ``upto`` truncates so that step is the conclusion."""
        steps = self.steps[:upto] if upto is not None else self.steps
        return Derivation(self.logic, self.cs, self.hyps,
                          tuple(Step(n, f, r) for n, (f, r) in enumerate(steps, 1)), tuple(marks))

    def include(self, d: Derivation) -> int:
        """Copy the steps of ``d`` (whose hypotheses must be among ours); returns its conclusion."""
        remap: dict = {}
        last = None
        for s in d.steps:
            r = s.rule
            if isinstance(r, Hyp):
                n = self.hyp_f(d.hypotheses[r.k - 1])
            elif isinstance(r, Mp):
                n = self.mp(remap[r.i], remap[r.j])
            elif isinstance(r, Gen):
                n = self.gen(remap[r.i], r.var)
            elif isinstance(r, Taut):
                n = self.taut(s.formula, [remap[i] for i in r.premises])
            else:
                n = self._add(s.formula, r)
            remap[s.index] = n
            last = n
        return last

    # -- combinators (hypothesis-free except where noted) ------------------
    def identity(self, a: Formula) -> int:
        """A -> A."""
        aa = Implies(a, a)
        if aa in self.index:
            return self.index[aa]
        k1 = self.ax("A1.K", phi=a, psi=aa)
        s = self.ax("A1.S", phi=a, psi=aa, chi=a)
        m = self.mp(k1, s)
        k2 = self.ax("A1.K", phi=a, psi=a)
        return self.mp(k2, m)

    def weaken(self, i: int, a: Formula) -> int:
        """From B conclude A -> B."""
        b = self.f(i)
        return self.mp(i, self.ax("A1.K", phi=b, psi=a))

    def s_mp(self, i: int, j: int) -> int:
        """From A -> (B -> C) (i) and A -> B (j) conclude A -> C."""
        abc, ab = self.f(i), self.f(j)
        a, b, c = abc.left, abc.right.left, abc.right.right
        if ab != Implies(a, b):
            raise BuildError("s_mp shape mismatch")
        s = self.ax("A1.S", phi=a, psi=b, chi=c)
        return self.mp(j, self.mp(i, s))

    def syl(self, i: int, j: int) -> int:
        """From A -> B (i) and B -> C (j) conclude A -> C."""
        ab, bc = self.f(i), self.f(j)
        if not (isinstance(ab, Implies) and isinstance(bc, Implies) and ab.right == bc.left):
            raise BuildError("syllogism shape mismatch")
        return self.s_mp(self.weaken(j, ab.left), i)

    def chain(self, *idx: int) -> int:
        out = idx[0]
        for j in idx[1:]:
            out = self.syl(out, j)
        return out

    def swap(self, i: int) -> int:
        """From A -> (B -> C) conclude B -> (A -> C)."""
        f = self.f(i)
        a, b, c = f.left, f.right.left, f.right.right
        # B -> (A -> B) and (A -> B) -> (A -> C)
        kb = self.ax("A1.K", phi=b, psi=a)
        s = self.mp(i, self.ax("A1.S", phi=a, psi=b, chi=c))
        return self.syl(kb, s)

    def contrapose(self, i: int) -> int:
        """From A -> B conclude ~B -> ~A."""
        f = self.f(i)
        return self.mp(i, self.ax("A1.CP", phi=f.left, psi=f.right))

    def imp_trans_left(self, i: int, c: Formula) -> int:
        """From A -> B conclude (B -> C) -> (A -> C)."""
        f = self.f(i)
        a, b = f.left, f.right
        # (B -> C) -> (A -> (B -> C)), then S-lift: (A -> (B -> C)) -> ((A -> B) -> (A -> C))
        k = self.ax("A1.K", phi=Implies(b, c), psi=a)
        s = self.ax("A1.S", phi=a, psi=b, chi=c)
        ks = self.syl(k, s)  # (B->C) -> ((A->B) -> (A->C))
        return self.mp(i, self.swap(ks))

    def imp_trans_right(self, i: int, a: Formula) -> int:
        """From B -> C conclude (A -> B) -> (A -> C)."""
        f = self.f(i)
        b, c = f.left, f.right
        k = self.weaken(i, a)  # A -> (B -> C)
        return self.mp(k, self.ax("A1.S", phi=a, psi=b, chi=c))

    # lemmas
    def _lemma(self, key, build):
        got = self._lemmas.get(key)
        if got is not None:
            return got
        n = build()
        self._lemmas[key] = n
        return n

    def efq(self, a: Formula, b: Formula) -> int:
        """~A -> (A -> B)."""
        def build():
            k = self.ax("A1.K", phi=Not(a), psi=Not(b))
            neg = self.ax("A1.NEG", phi=b, psi=a)
            return self.syl(k, neg)
        return self._lemma(("efq", a, b), build)

    def nn_elim(self, a: Formula) -> int:
        """~~A -> A."""
        def build():
            na, nna = Not(a), Not(Not(a))
            e = self.efq(na, Not(nna))  # ~~A -> (~A -> ~~~A)
            neg = self.ax("A1.NEG", phi=a, psi=nna)  # (~A -> ~~~A) -> (~~A -> A)
            t = self.syl(e, neg)  # ~~A -> (~~A -> A)
            return self.s_mp(t, self.identity(nna))
        return self._lemma(("nne", a), build)

    def nn_intro(self, a: Formula) -> int:
        """A -> ~~A."""
        def build():
            neg = self.ax("A1.NEG", phi=Not(Not(a)), psi=a)
            return self.mp(self.nn_elim(Not(a)), neg)
        return self._lemma(("nni", a), build)

    def not_false(self) -> int:
        """~false."""
        def build():
            x = Implies(FALSE, FALSE)
            bot = self.ax("A1.BOT", phi=Not(x))
            cp = self.contrapose(bot)  # ~~X -> ~false
            return self.mp(self.mp(self.identity(FALSE), self.nn_intro(x)), cp)
        return self._lemma(("nf",), build)

    def mp_lemma(self, a: Formula, b: Formula) -> int:
        """A -> ((A -> B) -> B)."""
        def build():
            ab = Implies(a, b)
            s = self.ax("A1.S", phi=ab, psi=a, chi=b)
            m = self.mp(self.identity(ab), s)  # ((A->B)->A) -> ((A->B)->B)
            return self.syl(self.ax("A1.K", phi=a, psi=ab), m)
        return self._lemma(("mpl", a, b), build)

    def from_refutation(self, i: int, a: Formula) -> int:
        """From ~A -> false (step i) conclude A."""
        y = Not(FALSE)
        bot = self.ax("A1.BOT", phi=Not(y))  # false -> ~~false
        nn = self.syl(i, bot)  # ~A -> ~~false
        back = self.mp(nn, self.ax("A1.NEG", phi=a, psi=y))  # ~false -> A
        return self.mp(self.not_false(), back)

    def cases(self, i: int, j: int) -> int:
        """From P -> T (i) and ~P -> T (j) conclude T."""
        pt = self.f(i)
        p, t = pt.left, pt.right
        c1 = self.contrapose(i)  # ~T -> ~P
        c2 = self.contrapose(j)  # ~T -> ~~P
        e = self.efq(Not(p), FALSE)  # ~~P -> (~P -> false)
        x = self.syl(c2, e)  # ~T -> (~P -> false)
        y = self.s_mp(x, c1)  # ~T -> false
        return self.from_refutation(y, t)

    def and_intro(self, i: int, j: int) -> int:
        a, b = self.f(i), self.f(j)
        return self.mp(j, self.mp(i, self.ax("A1.AND3", phi=a, psi=b)))

    def and_left(self, i: int) -> int:
        f = self.f(i)
        return self.mp(i, self.ax("A1.AND1", phi=f.left, psi=f.right))

    def and_right(self, i: int) -> int:
        f = self.f(i)
        return self.mp(i, self.ax("A1.AND2", phi=f.left, psi=f.right))

    def or_mono(self, i: int, j: int) -> int:
        """From A -> A' and B -> B' conclude (A | B) -> (A' | B')."""
        aa, bb = self.f(i), self.f(j)
        a, a2, b, b2 = aa.left, aa.right, bb.left, bb.right
        goal = Or(a2, b2)
        l = self.syl(i, self.ax("A1.OR1", phi=a2, psi=b2))
        r = self.syl(j, self.ax("A1.OR2", phi=a2, psi=b2))
        o3 = self.ax("A1.OR3", phi=a, psi=b, chi=goal)
        return self.mp(r, self.mp(l, o3))

    def or_elim(self, i: int, j: int) -> int:
        """From A -> C and B -> C conclude (A | B) -> C."""
        ac, bc = self.f(i), self.f(j)
        o3 = self.ax("A1.OR3", phi=ac.left, psi=bc.left, chi=ac.right)
        return self.mp(j, self.mp(i, o3))

    def and_mono(self, i: int, j: int) -> int:
        """From A -> A' and B -> B' conclude (A & B) -> (A' & B')."""
        aa, bb = self.f(i), self.f(j)
        a, a2, b, b2 = aa.left, aa.right, bb.left, bb.right
        l = self.syl(self.ax("A1.AND1", phi=a, psi=b), i)  # A&B -> A'
        r = self.syl(self.ax("A1.AND2", phi=a, psi=b), j)  # A&B -> B'
        a3 = self.ax("A1.AND3", phi=a2, psi=b2)  # A' -> (B' -> A'&B')
        x = self.syl(l, a3)  # A&B -> (B' -> A'&B')
        return self.s_mp(x, r)

    def forall_mono(self, i: int, x: Var) -> int:
        """From A -> B conclude forall x.A -> forall x.B (no hypotheses may mention x)."""
        f = self.f(i)
        a, b = f.left, f.right
        ui = self.ax("A1.UI", phi=a, x=x, e=x)  # forall x.A -> A
        c = self.syl(ui, i)
        g = self.gen(c, x)
        ud = self.ax("A1.UD", phi=Forall(x, a), psi=b, x=x)
        return self.mp(g, ud)

    def exists_mono(self, i: int, x: Var) -> int:
        """From A -> B conclude exists x.A -> exists x.B."""
        f = self.f(i)
        a, b = f.left, f.right
        from .syntax import Exists

        ei = self.ax("A1.EI", phi=b, x=x, e=x)  # B -> exists x.B
        c = self.syl(i, ei)
        g = self.gen(c, x)
        ed = self.ax("A1.ED", phi=a, psi=Exists(x, b), x=x)
        return self.mp(g, ed)

    def lift_subscript(self, i: int, target) -> int:
        """From [t]_Y A with Y a subset of target conclude [t]_target A by A3."""
        target = frozenset(target)
        f = self.f(i)
        if not f.xs <= target:
            raise BuildError("subscript is not contained in the target")
        cur = i
        for y in sorted(target - f.xs):
            g = self.f(cur)
            cur = self.mp(cur, self.ax("A3", t=g.term, X=g.xs, y=y, phi=g.body))
        return cur

    def retarget_imp(self, i: int, target) -> int:
        """From H -> [t]_X A conclude H -> [t]_target A (A2 drops, A3 adds)."""
        target = frozenset(target)
        cur = i
        j = self.f(cur).right
        fv = free_vars(j.body)
        if not (fv & j.xs) <= target:
            raise BuildError("cannot drop a subscript variable that is free in the body")
        for y in sorted(j.xs - target):
            g = self.f(cur).right
            cur = self.syl(cur, self.ax("A2", t=g.term, X=g.xs - {y}, y=y, phi=g.body))
        for y in sorted(target - j.xs):
            g = self.f(cur).right
            cur = self.syl(cur, self.ax("A3", t=g.term, X=g.xs, y=y, phi=g.body))
        return cur


# -- hypothesis discharge --------------------------------------------------------


def discharge(d: Derivation, k: int, budget: int | None = None) -> Derivation:
    """Deduction: from Gamma, phi_k |- sigma build Gamma |- phi_k -> sigma.

    Steps that do not depend on phi_k are kept unchanged."""
    phi = d.hypotheses[k - 1]
    rest = d.hypotheses[:k - 1] + d.hypotheses[k:]
    b = ProofBuilder(d.logic, d.cs, rest, verify=False, budget=budget)
    plain: dict = {}   # old index -> new index of sigma (independent steps)
    cond: dict = {}    # old index -> new index of phi -> sigma
    formulas: dict = {}

    def as_cond(n):
        if n in cond:
            return cond[n]
        cond[n] = b.weaken(plain[n], phi)
        return cond[n]

    for s in d.steps:
        n, f, r = s.index, s.formula, s.rule
        formulas[n] = f
        if isinstance(r, Hyp):
            if r.k == k:
                cond[n] = b.identity(phi)
            else:
                plain[n] = b.hyp_f(d.hypotheses[r.k - 1])
        elif isinstance(r, Mp):
            if r.i in plain and r.j in plain:
                plain[n] = b.mp(plain[r.i], plain[r.j])
            else:
                cond[n] = b.s_mp(as_cond(r.j), as_cond(r.i))
        elif isinstance(r, Gen):
            if r.i in plain:
                plain[n] = b.gen(plain[r.i], r.var)
            else:
                g = b.gen(cond[r.i], r.var)
                ud = b.ax_f("A1.UD", Implies(Forall(r.var, Implies(phi, formulas[r.i])),
                                             Implies(phi, Forall(r.var, formulas[r.i]))))
                cond[n] = b.mp(g, ud)
        elif isinstance(r, Taut):
            if all(i in plain for i in r.premises):
                plain[n] = b.taut(f, [plain[i] for i in r.premises])
            else:
                prem = [plain[i] if i in plain else cond[i] for i in r.premises]
                cond[n] = b.taut(Implies(phi, f), prem)
        else:
            plain[n] = b._add(f, r)
    last = d.steps[-1].index
    out = as_cond(last)
    return b.derivation(upto=out)


def discharge_all(d: Derivation, budget: int | None = None) -> Derivation:
    while d.hypotheses:
        d = discharge(d, len(d.hypotheses), budget)
    return d


# -- Taut-free propositional prover ----------------------------------------------

_PROP = (Not, And, Or, Implies, Iff, Bottom)


def _atoms_in_order(f: Formula, out: list, seen: set):
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, Bottom):
            continue
        if isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, (And, Or, Implies, Iff)):
            stack.append(g.right)
            stack.append(g.left)
        elif g not in seen:
            seen.add(g)
            out.append(g)


def eval3(f: Formula, val: dict):
    """Partial truth value under ``val`` (opaque subformula -> bool); None when undetermined."""
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        v = eval3(f.body, val)
        return None if v is None else not v
    if isinstance(f, And):
        a, b = eval3(f.left, val), eval3(f.right, val)
        if a is False or b is False:
            return False
        return True if a and b else None
    if isinstance(f, Or):
        a, b = eval3(f.left, val), eval3(f.right, val)
        if a or b:
            return True
        return False if a is False and b is False else None
    if isinstance(f, Implies):
        a, b = eval3(f.left, val), eval3(f.right, val)
        if a is False or b is True:
            return True
        return False if a is True and b is False else None
    if isinstance(f, Iff):
        a, b = eval3(f.left, val), eval3(f.right, val)
        return None if a is None or b is None else a == b
    return val.get(f)


class NotATautology(ValueError):
    pass


def _value(b: ProofBuilder, f: Formula, val: dict, memo: dict) -> int:
    """Step proving f (if true under val) or ~f (if false), from literal hypotheses."""
    if f in memo:
        return memo[f]
    v = eval3(f, val)
    if v is None:
        raise BuildError("undetermined subformula")
    if isinstance(f, Bottom):
        n = b.not_false()
    elif isinstance(f, Not):
        c = f.body
        n = _value(b, c, val, memo)
        if v is False:  # c true, need ~~c
            n = b.mp(n, b.nn_intro(c))
    elif isinstance(f, And):
        l, r = f.left, f.right
        if v:
            n = b.and_intro(_value(b, l, val, memo), _value(b, r, val, memo))
        else:
            side, sch = (l, "A1.AND1") if eval3(l, val) is False else (r, "A1.AND2")
            ax = b.ax(sch, phi=l, psi=r)
            n = b.mp(_value(b, side, val, memo), b.contrapose(ax))
    elif isinstance(f, Or):
        l, r = f.left, f.right
        if v:
            if eval3(l, val):
                n = b.mp(_value(b, l, val, memo), b.ax("A1.OR1", phi=l, psi=r))
            else:
                n = b.mp(_value(b, r, val, memo), b.ax("A1.OR2", phi=l, psi=r))
        else:
            lf = b.mp(_value(b, l, val, memo), b.efq(l, FALSE))
            rf = b.mp(_value(b, r, val, memo), b.efq(r, FALSE))
            o = b.or_elim(lf, rf)  # l|r -> false
            n = b.mp(b.not_false(), b.contrapose(o))
    elif isinstance(f, Implies):
        l, r = f.left, f.right
        if v:
            if eval3(l, val) is False:
                n = b.mp(_value(b, l, val, memo), b.efq(l, r))
            else:
                n = b.weaken(_value(b, r, val, memo), l)
        else:
            m = b.mp(_value(b, l, val, memo), b.mp_lemma(l, r))  # (l->r) -> r
            n = b.mp(_value(b, r, val, memo), b.contrapose(m))
    elif isinstance(f, Iff):
        l, r = f.left, f.right
        lv = eval3(l, val)
        pl, pr = _value(b, l, val, memo), _value(b, r, val, memo)
        if v:
            if lv:
                lr, rl = b.weaken(pr, l), b.weaken(pl, r)
            else:
                lr, rl = b.mp(pl, b.efq(l, r)), b.mp(pr, b.efq(r, l))
            n = b.mp(rl, b.mp(lr, b.ax("A1.IFF3", phi=l, psi=r)))
        else:
            if lv:  # l true, r false: (l<->r) -> r
                split = b.ax("A1.IFF1", phi=l, psi=r)
                known, target_false = pl, pr
            else:  # r true, l false: (l<->r) -> l
                split = b.ax("A1.IFF2", phi=l, psi=r)
                known, target_false = pr, pl
            kf = b.weaken(known, f)
            to = b.s_mp(split, kf)
            n = b.mp(target_false, b.contrapose(to))
    else:
        n = b.hyp_f(f if v else Not(f))
    memo[f] = n
    return n


def prove_tautology(t: Formula, logic: str = "FOLPb", cs=None, budget: int = 200000,
                    max_atoms: int = 12) -> Derivation:
    """A hypothesis-free derivation of ``t`` that uses no TAUT steps."""
    atoms: list = []
    _atoms_in_order(t, atoms, set())
    if len(atoms) > max_atoms:
        raise ExpansionOverflow(f"{len(atoms)} atoms")
    counter = [0]

    def node(lits: list) -> Derivation:
        val = {a: s for a, s in lits}
        hyps = tuple(a if s else Not(a) for a, s in lits)
        b = ProofBuilder(logic, cs, hyps, verify=False, budget=budget)
        v = eval3(t, val)
        if v is False:
            raise NotATautology("formula is falsifiable")
        if v:
            n = _value(b, t, val, {})
        else:
            p = next(a for a in atoms if a not in val)
            pos = discharge(node(lits + [(p, True)]), len(lits) + 1, budget)
            neg = discharge(node(lits + [(p, False)]), len(lits) + 1, budget)
            n = b.cases(b.include(pos), b.include(neg))
        counter[0] += n
        if counter[0] > budget:
            raise ExpansionOverflow(f"more than {budget} steps")
        return b.derivation(upto=n)

    return node([])
