"""Finite Fitting models: evidence functions, truth, validity and condition audits.

Domain members are witness names.  A witness name from the domain that occurs
free in a formula denotes that member; any other free variable is a variable
that ranges over the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations, product

import numpy as np

from . import _accel
from .axioms import ConstantSpecification, UnknownConstant, identify, match_axiom, schematic_constant
from .syntax import (
    And, App, Bang, Bar, Bottom, CaptureError, Exists, Forall, Formula, GenTerm, Iff, Implies,
    Just, JustConst, JustVar, Not, Or, Query, Sum, Term, Var, Atom, FALSE,
    free_vars, subformulas, substitute, subterms,
)


class SemanticsError(ValueError):
    pass


class NotClosed(SemanticsError):
    pass


class UnknownWorld(SemanticsError):
    pass


class UniverseOverflow(SemanticsError):
    pass


@dataclass(frozen=True)
class EvidenceSpec:
    mode: str
    base: frozenset = frozenset()      # closure: (term, formula, world)
    entries: tuple = ()                # table: (term, formula, frozenset of worlds)

    @classmethod
    def full(cls):
        return cls("full")

    @classmethod
    def closure(cls, base):
        return cls("closure", base=frozenset(base))

    @classmethod
    def table(cls, entries):
        return cls("table", entries=tuple((t, f, frozenset(ws)) for t, f, ws in entries))


@dataclass
class AuditReport:
    violations: list = field(default_factory=list)
    note: str = ""

    @property
    def verdict(self) -> str:
        return "pass" if not self.violations else "violations"

    @property
    def passed(self) -> bool:
        return not self.violations

    def __str__(self):
        if self.passed:
            return "audit=pass"
        return "\n".join(f"violation={name} instance={inst}" for name, inst in self.violations)


def is_ground(t: Term) -> bool:
    """No justification variables occur in ``t``."""
    return not any(isinstance(u, JustVar) for u in subterms(t))


class FittingModel:
    """A finite model.  Immutable once built; evaluation caches live in evaluators."""

    universe_limit = 20000
    # deliberate evaluator faults, used only by the harness canaries
    faults: frozenset = frozenset()

    def __init__(self, logic, worlds, rel, domain, interp, evidence, cs=None):
        self.logic = logic
        self.worlds = tuple(worlds)
        self.rel = frozenset(rel)
        self.domain = tuple(domain)
        self.interp = {k: frozenset(v) for k, v in interp.items()}
        self.evidence = evidence
        self.cs = cs or ConstantSpecification.schematic()
        self.widx = {w: i for i, w in enumerate(self.worlds)}
        self.dvars = tuple(Var(d) for d in self.domain)
        self.dset = frozenset(self.dvars)
        n = len(self.worlds)
        self.full = (1 << n) - 1
        m = np.zeros((n, n), dtype=np.bool_)
        for w, v in self.rel:
            m[self.widx[w], self.widx[v]] = True
        self.succ = [sum(1 << j for j in range(n) if m[i, j]) for i in range(n)]
        star = _accel.transitive_closure(m | np.eye(n, dtype=np.bool_))
        self.reach = [sum(1 << j for j in range(n) if star[i, j]) for i in range(n)]
        self._index = None
        self._full: dict = {}

    # -- helpers ------------------------------------------------------------------

    def mask_of(self, ws) -> int:
        return sum(1 << self.widx[w] for w in ws)

    def worlds_of(self, mask: int) -> list:
        return [w for i, w in enumerate(self.worlds) if mask >> i & 1]

    def r_close(self, mask: int) -> int:
        out = 0
        for i in range(len(self.worlds)):
            if mask >> i & 1:
                out |= self.reach[i]
        return out

    def instances(self, f: Formula, only=None):
        """All D-instances of ``f``: each free non-member variable is kept or replaced by a member."""
        open_vars = sorted(v for v in free_vars(f) if v not in self.dset and (only is None or v in only))
        for choice in product(*[(v,) + self.dvars for v in open_vars]):
            sigma = {v: c for v, c in zip(open_vars, choice) if v != c}
            try:
                yield substitute(f, sigma) if sigma else f
            except CaptureError:
                continue

    def full_instances(self, f: Formula, vs):
        """Instances with every variable of ``vs`` replaced by a member."""
        key = (f, frozenset(vs))
        got = self._full.get(key)
        if got is None:
            got = []
            vs = sorted(vs)
            for choice in product(self.dvars, repeat=len(vs)):
                try:
                    got.append(substitute(f, dict(zip(vs, choice))))
                except CaptureError:
                    continue
            if len(self._full) < 200000:
                self._full[key] = got
        return got

    def index(self):
        """(term, formula) -> world mask for base/table entries, closed under D-instantiation."""
        if self._index is None:
            idx: dict = {}
            if self.evidence.mode == "closure":
                raw: dict = {}
                for t, f, w in self.evidence.base:
                    raw[(t, f)] = raw.get((t, f), 0) | (1 << self.widx[w])
                close = (lambda mask: mask) if "skip_monotonicity" in self.faults else self.r_close
                items = [(t, f, close(m)) for (t, f), m in raw.items()]
            else:
                items = [(t, f, self.mask_of(ws)) for t, f, ws in self.evidence.entries]
            for t, f, m in items:
                for g in self.instances(f):
                    idx[(t, g)] = idx.get((t, g), 0) | m
            self._index = idx
        return self._index

    def evaluator(self, hints=(), lemmas=()):
        return Evaluator(self, hints, lemmas)


# -- evaluation --------------------------------------------------------------------------


class Evaluator:
    """Truth and evidence for one model with per-evaluator memo tables.

    ``hints`` are formulas whose subformula instances join the candidate
    universe used when searching for the antecedent of an application.
    ``lemmas`` only contribute the antecedents of their implication subformulas,
    which is cheap enough to pass a whole proof.

    Evidence can depend on itself: a ground term's evidence is a necessity
    claim whose formula may mention the term being computed.  A cyclic read
    returns the value from the previous pass (0 at first).  When a top-level
    query met a cycle, its new memo entries are rolled back and the query is
    rerun until the evidence values it produced repeat.
    """

    max_passes = 8

    def __init__(self, model: FittingModel, hints=(), lemmas=()):
        self.m = model
        self.hints = tuple(hints)
        self.lemmas = tuple(lemmas)
        self._ev: dict = {}
        self._box: dict = {}
        self._truth: dict = {}
        self._fwd: dict = {}
        self._universe = None
        self._ants = None
        self._lemma_ants = None
        self._active: set = set()
        self._level = 0
        self._journal: list = []
        self._prov: dict = {}
        self._cyclic = False
        self.passes = 0

    def _enter(self, memo: dict, key, compute) -> int:
        if self._level:
            self._level += 1
            try:
                out = compute(key)
            finally:
                self._level -= 1
            memo[key] = out
            self._journal.append((memo, key))
            return out
        prov: dict = {}
        for _ in range(self.max_passes):
            self._journal, self._prov, self._cyclic = [], prov, False
            self._level = 1
            try:
                out = compute(key)
            finally:
                self._level = 0
            self.passes += 1
            if not self._cyclic:
                break
            now = {k: self._ev[k] for mm, k in self._journal if mm is self._ev}
            if now == prov:
                break
            for mm, k in self._journal:
                mm.pop(k, None)
            prov = now
        memo[key] = out
        self._journal, self._prov = [], {}
        return out

    # -- evidence -----------------------------------------------------------------

    def evidence_mask(self, t: Term, f: Formula) -> int:
        if self.m.evidence.mode == "full":
            return self.m.full
        key = (t, f)
        got = self._ev.get(key)
        if got is not None:
            return got
        if key in self._active:
            self._cyclic = True
            return self._prov.get(key, 0)
        return self._enter(self._ev, key, self._evidence)

    def _evidence(self, key) -> int:
        m = self.m
        self._active.add(key)
        try:
            out = m.index().get(key, 0)
            if m.evidence.mode == "closure" and out != m.full:
                out |= self._derived(*key)
        finally:
            self._active.discard(key)
        return out

    def evidence(self, t: Term, f: Formula, w) -> bool:
        if w not in self.m.widx:
            raise UnknownWorld(str(w))
        return bool(self.evidence_mask(t, f) >> self.m.widx[w] & 1)

    def _constants_ok(self, X, body) -> bool:
        return X <= self.m.dset and (free_vars(body) & self.m.dset) <= X

    def _derived(self, t: Term, f: Formula) -> int:
        m = self.m
        if is_ground(t):
            if isinstance(t, JustConst) and self._cs_entry(t.name, f):
                return m.full
            return self.box_mask(f)
        out = 0
        if isinstance(t, Sum):
            out = self.evidence_mask(t.left, f) | self.evidence_mask(t.right, f)
        elif isinstance(t, Bang):
            if isinstance(f, Just) and f.term == t.body and self._constants_ok(f.xs, f.body):
                out = self.evidence_mask(t.body, f.body)
        elif isinstance(t, GenTerm):
            if isinstance(f, Forall) and f.var == t.var:
                out = self.evidence_mask(t.body, f.body)
        elif isinstance(t, Bar):
            if isinstance(f, Forall):
                out = m.full
                for g in m.full_instances(f.body, [f.var]):
                    out &= self.evidence_mask(t.body, g)
                    if not out:
                        break
        elif isinstance(t, Query) and "drop_query" not in m.faults:
            if (isinstance(f, Not) and isinstance(f.body, Just) and f.body.term == t.body
                    and self._constants_ok(f.body.xs, f.body.body)):
                out = m.full & ~self.evidence_mask(t.body, f.body.body)
        elif isinstance(t, App) and "drop_app" not in m.faults:
            u, v = t.left, t.right
            for a in self._candidates(u, v, f):
                # the argument side is usually the selective one
                ev_v = self.evidence_mask(v, a) & ~out
                if ev_v:
                    out |= self.evidence_mask(u, Implies(a, f)) & ev_v
                    if out == m.full:
                        break
        return out

    def _cs_entry(self, c: str, f: Formula) -> bool:
        cs = self.m.cs
        if cs.mode == "schematic":
            try:
                schema = cs.schema_of(c)
            except UnknownConstant:
                return False
            if match_axiom(schema, f, self.m.logic) is not None:
                return True
            # instantiating two variables by one member collapses A2/A3 to A -> A
            return schema in ("A2", "A3") and isinstance(f, Implies) and isinstance(f.left, Just) and f.left == f.right
        return any(d == c and f in set(self.m.instances(g)) for d, g in cs.entries)

    def _candidates(self, u: Term, v: Term, f: Formula):
        ants, complete = self._antecedents(u, f)
        if complete:
            return ants
        ants = ants | self.lemma_antecedents().get(f, set())
        fw = self.forward(v)
        if fw is not None:
            return ants | fw
        return ants | self.universe()

    def _antecedents(self, u: Term, f: Formula):
        """Antecedents A with (A -> f) possibly evidenced by u, and whether the set is exhaustive."""
        out = set(self._base_ants().get((u, f), ()))
        if is_ground(u):
            return out, False
        if isinstance(u, JustVar) or isinstance(u, (Bang, GenTerm, Bar, Query)):
            return out, True
        if isinstance(u, Sum):
            a, ca = self._antecedents(u.left, f)
            b, cb = self._antecedents(u.right, f)
            return out | a | b, ca and cb
        fw = self.forward(u)
        if fw is not None:
            return out | {g.left for g in fw if isinstance(g, Implies) and g.right == f}, True
        return out, False

    def _base_ants(self):
        if self._ants is None:
            ants: dict = {}
            for (t, g) in self.m.index():
                if isinstance(g, Implies):
                    ants.setdefault((t, g.right), set()).add(g.left)
            self._ants = ants
        return self._ants

    def lemma_antecedents(self) -> dict:
        if self._lemma_ants is None:
            out: dict = {}
            seen = set()
            for src in self.lemmas:
                for g in subformulas(src):
                    if isinstance(g, Implies) and g not in seen:
                        seen.add(g)
                        for h in self.m.instances(g):
                            out.setdefault(h.right, set()).add(h.left)
            self._lemma_ants = out
        return self._lemma_ants

    def forward(self, t: Term):
        """Finite over-approximation of the formulas ``t`` is evidence for, or None."""
        if t in self._fwd:
            return self._fwd[t]
        self._fwd[t] = None
        base = {g for (s, g) in self.m.index() if s == t}
        out = None
        if is_ground(t):
            out = None
        elif isinstance(t, JustVar):
            out = base
        elif isinstance(t, Sum):
            a, b = self.forward(t.left), self.forward(t.right)
            out = None if a is None or b is None else base | a | b
        elif isinstance(t, App):
            a, b = self.forward(t.left), self.forward(t.right)
            if a is not None and b is not None:
                out = base | {g.right for g in a if isinstance(g, Implies) and g.left in b}
        elif isinstance(t, Bang):
            a = self.forward(t.body)
            if a is not None:
                out = set(base)
                for g in a:
                    need = free_vars(g) & self.m.dset
                    rest = sorted(self.m.dset - need)
                    for k in range(len(rest) + 1):
                        for extra in combinations(rest, k):
                            out.add(Just(t.body, need | frozenset(extra), g))
        elif isinstance(t, GenTerm):
            a = self.forward(t.body)
            if a is not None:
                out = base | {Forall(t.var, g) for g in a}
        self._fwd[t] = out
        return out

    def universe(self) -> set:
        if self._universe is None:
            u = set()
            srcs = [g for (_, g) in self.m.index()] + list(self.hints)
            for src in srcs:
                for g in subformulas(src):
                    for h in self.m.instances(g):
                        u.add(h)
                        if len(u) > self.m.universe_limit:
                            raise UniverseOverflow(f"more than {self.m.universe_limit} formulas")
            self._universe = u
        return self._universe

    # -- truth --------------------------------------------------------------------

    def box_mask(self, f: Formula) -> int:
        """Worlds all of whose successors satisfy every D-instance of ``f``."""
        got = self._box.get(f)
        if got is not None:
            return got
        return self._enter(self._box, f, self._box_mask)

    def _box_mask(self, f: Formula) -> int:
        m = self.m
        good = m.full
        for g in m.full_instances(f, free_vars(f) - m.dset):
            good &= self.truth_mask(g)
            if not good:
                break
        out = 0
        for i in range(len(m.worlds)):
            if m.succ[i] & ~good == 0:
                out |= 1 << i
        return out

    def truth_mask(self, f: Formula) -> int:
        got = self._truth.get(f)
        if got is not None:
            return got
        return self._enter(self._truth, f, self._truth_mask)

    def _truth_mask(self, f: Formula) -> int:
        m = self.m
        if isinstance(f, Atom):
            out = 0
            args = tuple(a.name for a in f.args)
            for i, w in enumerate(m.worlds):
                if args in m.interp.get((f.pred, w), ()):
                    out |= 1 << i
        elif isinstance(f, Bottom):
            out = 0
        elif isinstance(f, Not):
            out = m.full & ~self.truth_mask(f.body)
        elif isinstance(f, And):
            out = self.truth_mask(f.left) & self.truth_mask(f.right)
        elif isinstance(f, Or):
            out = self.truth_mask(f.left) | self.truth_mask(f.right)
        elif isinstance(f, Implies):
            out = (m.full & ~self.truth_mask(f.left)) | self.truth_mask(f.right)
        elif isinstance(f, Iff):
            a, b = self.truth_mask(f.left), self.truth_mask(f.right)
            out = m.full & ~(a ^ b)
        elif isinstance(f, Forall):
            out = m.full
            for g in m.full_instances(f.body, [f.var]):
                out &= self.truth_mask(g)
        elif isinstance(f, Exists):
            out = 0
            for g in m.full_instances(f.body, [f.var]):
                out |= self.truth_mask(g)
        elif isinstance(f, Just):
            if not f.xs <= m.dset:
                raise NotClosed(f"subscript variables {sorted(v.name for v in f.xs - m.dset)} are not domain members")
            out = self.evidence_mask(f.term, f.body) & self.box_mask(f.body)
        else:
            raise SemanticsError(f"not a formula: {f!r}")
        return out

    def check_closed(self, f: Formula):
        extra = free_vars(f) - self.m.dset
        if extra:
            raise NotClosed(f"free variables {sorted(v.name for v in extra)} are not domain members")

    def eval(self, w, f: Formula) -> bool:
        if w not in self.m.widx:
            raise UnknownWorld(str(w))
        self.check_closed(f)
        return bool(self.truth_mask(f) >> self.m.widx[w] & 1)


def evidence(m: FittingModel, t: Term, f: Formula, w) -> bool:
    return m.evaluator((f,)).evidence(t, f, w)


def eval_formula(m: FittingModel, w, f: Formula) -> bool:
    return m.evaluator((f,)).eval(w, f)


def counterexample(m: FittingModel, f: Formula, ev: Evaluator | None = None):
    """First (world, instance) falsifying ``f`` under every D-instantiation of its free variables."""
    ev = ev or m.evaluator((f,))
    for g in m.full_instances(f, free_vars(f) - m.dset):
        mask = ev.truth_mask(g)
        if mask != m.full:
            bad = m.full & ~mask
            return m.worlds_of(bad)[0], g
    return None


def valid(m: FittingModel, f: Formula) -> bool:
    return counterexample(m, f) is None


# -- audit ------------------------------------------------------------------------------


def _rel_violations(m: FittingModel) -> list:
    out = []
    ws = m.worlds
    R = m.rel
    for w in ws:
        if (w, w) not in R:
            out.append(("Reflexivity", f"{w}"))
    for (a, b) in R:
        for (c, d) in R:
            if b == c and (a, d) not in R:
                out.append(("Transitivity", f"{a} {b} {d}"))
    if m.logic == "FOJT45":
        for (a, b) in R:
            if (b, a) not in R:
                out.append(("Symmetry", f"{a} {b}"))
    return sorted(set(out))


def _inst(t, f, ws) -> str:
    from .textio import print_formula, print_term

    return f"{print_term(t)} | {print_formula(f)} | {' '.join(ws)}"


def audit(m: FittingModel) -> AuditReport:
    rep = AuditReport(_rel_violations(m))
    ev = m.evaluator()
    mode = m.evidence.mode
    if mode == "full":
        rep.note = "full evidence: every condition holds with conclusion W"
        if m.logic == "FOJT45":
            # no world satisfies t:false, while full evidence claims every world
            t = JustConst("c0")
            if ev.truth_mask(Just(t, frozenset(), FALSE)) != m.full:
                rep.violations.append(("StrongEvidence", _inst(t, FALSE, m.worlds)))
        return rep
    if mode == "closure":
        rep.note = "closure evidence: conditions hold by construction; base entries sampled"
        _audit_strong(m, ev, rep, [(t, f) for t, f, _ in m.evidence.base])
        return rep
    rep.note = "table evidence: conditions checked where their premises are table entries"
    _audit_table(m, ev, rep)
    return rep


def _audit_strong(m, ev, rep, pairs):
    if m.logic != "FOJT45":
        return
    for t, f in sorted(set(pairs), key=repr):
        X = free_vars(f) & m.dset
        for g in m.instances(f):
            claimed = ev.evidence_mask(t, g)
            truth = ev.truth_mask(Just(t, X | (free_vars(g) & m.dset), g))
            bad = claimed & ~truth
            if bad:
                rep.violations.append(("StrongEvidence", _inst(t, g, m.worlds_of(bad))))
                return


def _audit_table(m: FittingModel, ev: Evaluator, rep: AuditReport):
    raw: dict = {}
    for t, f, ws in m.evidence.entries:
        raw[(t, f)] = raw.get((t, f), 0) | m.mask_of(ws)
    E = ev.evidence_mask
    terms = {t for t, _ in raw}
    forms = {f for _, f in raw}
    viol = rep.violations

    def need(name, t, f, required):
        have = E(t, f)
        miss = required & ~have
        if miss:
            viol.append((name, _inst(t, f, m.worlds_of(miss))))

    for (t, f), mask in raw.items():
        # R closure on the raw entry
        for i in range(len(m.worlds)):
            if mask >> i & 1 and m.succ[i] & ~mask:
                viol.append(("RClosure", _inst(t, f, m.worlds_of(m.succ[i] & ~mask))))
                break
        # instantiation against other raw entries on the same term
        for (t2, g), mask2 in raw.items():
            if t2 == t and g != f and mask & ~mask2 and g in set(m.instances(f)):
                viol.append(("Instantiation", _inst(t, g, m.worlds_of(mask & ~mask2))))
        # ! condition for bang terms in the table, minimal subscript and every larger one
        if Bang(t) in terms:
            need_x = free_vars(f) & m.dset
            rest = sorted(m.dset - need_x)
            for k in range(len(rest) + 1):
                for extra in combinations(rest, k):
                    need("Bang", Bang(t), Just(t, need_x | frozenset(extra), f), E(t, f))
        # + and gen conditions for terms present in the table
        for s in terms:
            if isinstance(s, Sum) and t in (s.left, s.right):
                need("Sum", s, f, E(t, f))
            if isinstance(s, GenTerm) and s.body == t:
                need("Gen", s, Forall(s.var, f), E(t, f))
        # · condition when both premises are entries
        if isinstance(f, Implies):
            for (s, g), _ in raw.items():
                if g == f.left:
                    need("App", App(t, s), f.right, E(t, f) & E(s, g))
    # b condition for b-terms present in the table
    for s in terms:
        if isinstance(s, Bar):
            cands = {g for g in forms if isinstance(g, Forall)}
            cands |= {Forall(v, f) for (t, f) in raw if t == s.body for v in free_vars(f) if v.is_basic}
            for g in cands:
                req = m.full
                for h in m.full_instances(g.body, [g.var]):
                    req &= E(s.body, h)
                need("Bar", s, g, req)
    # constant specification on formulas in the table universe
    universe = set()
    for f in forms:
        for g in subformulas(f):
            universe.update(m.instances(g))
    for f in sorted(universe, key=repr):
        for c in _cs_constants_for(m, ev, f):
            need("ConstantSpecification", JustConst(c), f, m.full)
    if m.logic == "FOJT45":
        for (t, f), mask in raw.items():
            X = free_vars(f) & m.dset
            if Query(t) in terms or isinstance(t, Query):
                need("Query", Query(t), Not(Just(t, X, f)), m.full & ~E(t, f))
        _audit_strong(m, ev, rep, list(raw))


def _cs_constants_for(m, ev, f) -> list:
    cs = m.cs
    out = []
    if cs.mode == "schematic":
        out = [schematic_constant(s) for s in identify(f, m.logic)]
    else:
        for c in cs.constants():
            if ev._cs_entry(c, f):
                out.append(c)
    return out
