"""Random generators and property drivers: soundness fuzzing, oracle
equivalence and mutation suites.

Every generator takes a ``random.Random``; trial ``i`` of a run is seeded from
``(seed, logic, i)`` alone, so reports do not depend on trial order.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field, replace
from itertools import product

from ._builder import ProofBuilder, discharge_all
from .axioms import A1_IDS, JUST_IDS, match_axiom, instance, schemas_for
from .kernel import Ax, Cs, Derivation, Gen, Hyp, Mp, Step, Taut, check
from .semantics import (
    EvidenceSpec, FittingModel, audit, counterexample,
)
from .syntax import (
    FALSE, And, App, Atom, Bang, Bar, Bottom, Exists, Forall, Formula, GenTerm, Iff, Implies,
    Just, JustConst, JustVar, Not, Or, Query, Sum, Term, Var, free_vars, substitute, witness_vars,
)
from .templates import (
    Letter, TAnd, TBox, TNot, TOr, BruteMember, combine, enumerate_members, term_universe,
)
from .textio import parse_formula, parse_model, print_formula, print_model
from .transform import converse_barcan, converse_buridan, internalize, jt45_barcan

# deliberate faults for the harness self-test: two break frame conditions in the
# generator, the rest disable an evidence closure rule in the evaluator
FAULTS = ("skip_transitivity", "skip_reflexivity", "skip_monotonicity", "drop_app", "drop_query")

BASIC = (Var("x"), Var("y"), Var("z"))
PREDS = (("P", 1), ("Q", 0), ("R", 2))
JVARS = tuple(JustVar(f"p{i}") for i in range(3))
CONSTS = (JustConst("c0"), JustConst("c_K"), JustConst("c_UI"))


@dataclass(frozen=True)
class GenConfig:
    seed: int = 42
    logic: str = "FOLPb"
    max_worlds: int = 4
    max_domain: int = 3
    max_term_depth: int = 2
    max_formula_depth: int = 4
    trials: int = 500
    fault: str | None = None
    # force an evidence mode instead of sampling one
    mode: str | None = None

    def __post_init__(self):
        if self.fault is not None and self.fault not in FAULTS:
            raise ValueError(f"unknown fault mode {self.fault}")


def trial_rng(cfg: GenConfig, i: int, tag: str = "trial") -> random.Random:
    return random.Random(f"{cfg.seed}/{cfg.logic}/{tag}/{i}")


# -- terms and formulas -------------------------------------------------------------


class SyntaxGen:
    """Random syntax over a small vocabulary.  ``logic=None`` admits every constructor."""

    def __init__(self, rng: random.Random, logic: str | None = "FOLPb", term_depth: int = 2,
                 witnesses=()):
        self.rng = rng
        self.logic = logic
        self.term_depth = term_depth
        self.witnesses = tuple(Var(w) if isinstance(w, str) else w for w in witnesses)

    def term(self, depth: int | None = None) -> Term:
        r = self.rng
        depth = self.term_depth if depth is None else depth
        if depth <= 0 or r.random() < 0.4:
            return r.choice(JVARS) if r.random() < 0.5 else r.choice(CONSTS)
        ops = ["app", "sum", "bang", "gen"]
        if self.logic != "FOJT45":
            ops.append("bar")
        if self.logic != "FOLPb":
            ops.append("query")
        op = r.choice(ops)
        if op == "app":
            return App(self.term(depth - 1), self.term(depth - 1))
        if op == "sum":
            return Sum(self.term(depth - 1), self.term(depth - 1))
        if op == "bang":
            return Bang(self.term(depth - 1))
        if op == "gen":
            return GenTerm(r.choice(BASIC), self.term(depth - 1))
        if op == "bar":
            return Bar(self.term(depth - 1))
        return Query(self.term(depth - 1))

    def atom(self, vs) -> Formula:
        vs = list(vs)
        pred, k = self.rng.choice(PREDS)
        if k and not vs:
            pred, k = "Q", 0
        return Atom(pred, tuple(self.rng.choice(vs) for _ in range(k)))

    def subscript(self, vs) -> frozenset:
        return frozenset(v for v in vs if self.rng.random() < 0.4)

    def formula(self, depth: int, vs=None) -> Formula:
        r = self.rng
        vs = tuple(BASIC + self.witnesses) if vs is None else tuple(vs)
        if depth <= 0 or r.random() < 0.2:
            return FALSE if r.random() < 0.05 else self.atom(vs)
        op = r.choice(("not", "and", "or", "imp", "iff", "all", "ex", "just", "just"))
        d = depth - 1
        if op == "not":
            return Not(self.formula(d, vs))
        if op in ("and", "or", "imp", "iff"):
            ctor = {"and": And, "or": Or, "imp": Implies, "iff": Iff}[op]
            return ctor(self.formula(d, vs), self.formula(d, vs))
        if op in ("all", "ex"):
            v = r.choice(BASIC)
            return (Forall if op == "all" else Exists)(v, self.formula(d, vs))
        body = self.formula(d, vs)
        # witness variables of a box body belong to its subscript
        xs = self.subscript(BASIC) | (free_vars(body) & frozenset(self.witnesses))
        return Just(self.term(), xs, body)


def gen_formula(rng: random.Random, depth: int = 4, logic: str | None = None, witnesses=("@a", "@b")):
    return SyntaxGen(rng, logic, witnesses=witnesses).formula(depth)


def gen_term(rng: random.Random, depth: int = 2, logic: str | None = None):
    return SyntaxGen(rng, logic, term_depth=depth).term()


# -- models -------------------------------------------------------------------------


def close_relation(worlds, rel, logic: str, reflexive=True, transitive=True) -> set:
    rel = set(rel)
    if reflexive:
        rel |= {(w, w) for w in worlds}
    if logic == "FOJT45":
        rel |= {(b, a) for a, b in rel}
    if transitive:
        changed = True
        while changed:
            changed = False
            for a, b in list(rel):
                for c, d in list(rel):
                    if b == c and (a, d) not in rel:
                        rel.add((a, d))
                        changed = True
    return rel


def _interp(rng, worlds, domain) -> dict:
    # a per-predicate density, so that necessity holds somewhere and fails somewhere
    dens = {pred: rng.uniform(0.1, 0.95) for pred, _ in PREDS}
    interp = {}
    for w in worlds:
        for pred, k in PREDS:
            tups = {tup for tup in product(domain, repeat=k) if rng.random() < dens[pred]}
            interp[(pred, w)] = tups
    return interp


def _truthful(m: FittingModel, base) -> frozenset:
    """Drop base entries whose formula is not necessary at their world, to a fixpoint."""
    base = frozenset(base)
    while True:
        mm = FittingModel(m.logic, m.worlds, m.rel, m.domain, m.interp, EvidenceSpec.closure(base))
        ev = mm.evaluator()
        keep = frozenset(e for e in base if mm.r_close(1 << mm.widx[e[2]]) & ~ev.box_mask(e[1]) == 0)
        if keep == base:
            return base
        base = keep


def _seed_entry(rng, g: "SyntaxGen", m0: FittingModel):
    """A base entry whose formula usually holds at every successor of its world,
    so that justification assertions built on it are often true."""
    w = rng.choice(m0.worlds)
    here = m0.succ[m0.widx[w]]
    ev = m0.evaluator()
    f = g.formula(rng.randint(0, 2))
    for _ in range(6 if rng.random() < 0.7 else 0):
        if here & ~ev.box_mask(f) == 0:
            break
        f = g.formula(rng.randint(0, 2))
    return rng.choice(JVARS), f, w


def _seed_pair(rng, g: "SyntaxGen", m0: FittingModel) -> set:
    """An implication and its antecedent evidenced at one world, preferring ones
    necessary there so that application is exercised by true antecedents."""
    ev = m0.evaluator()
    w = rng.choice(m0.worlds)
    here = m0.succ[m0.widx[w]]
    a, c = g.formula(1), g.formula(1)
    for _ in range(10):
        if here & ~ev.box_mask(Implies(a, c)) == 0 and here & ~ev.box_mask(a) == 0:
            break
        a, c = g.formula(1), g.formula(1)
    return {(rng.choice(JVARS), Implies(a, c), w), (rng.choice(JVARS), a, w)}


def gen_model(cfg: GenConfig, rng: random.Random | None = None) -> FittingModel:
    """A random model whose relation is closed per the logic (unless a relation fault is set)."""
    rng = rng or random.Random(cfg.seed)
    # larger frames are likelier to expose a missing frame condition
    n = max(rng.randint(1, cfg.max_worlds), rng.randint(1, cfg.max_worlds))
    if cfg.fault == "skip_transitivity":
        n = max(n, 3)
    worlds = [f"w{i}" for i in range(n)]
    density = rng.uniform(0.2, 0.6)
    rel = {(a, b) for a in worlds for b in worlds if a != b and rng.random() < density}
    if cfg.fault == "skip_transitivity":
        # one chain w0 -> w1 -> w2 that is never shortcut
        rel = (rel | {("w0", "w1"), ("w1", "w2")}) - {("w0", "w2"), ("w2", "w0")}
    rel = close_relation(worlds, rel, cfg.logic,
                         reflexive=cfg.fault != "skip_reflexivity",
                         transitive=cfg.fault != "skip_transitivity")
    if cfg.fault == "skip_reflexivity":
        rel = {(a, b) for a, b in rel if a != b}
    k = rng.randint(1, cfg.max_domain)
    domain = [f"@d{i}" for i in range(k)]
    interp = _interp(rng, worlds, domain)
    # full evidence satisfies every evidence condition trivially, so it gets one model in four
    mode = cfg.mode or ("closure" if cfg.logic == "FOJT45" or rng.random() < 0.75 else "full")
    if mode == "full":
        ev = EvidenceSpec.full()
    else:
        g = SyntaxGen(rng, cfg.logic, term_depth=1, witnesses=domain)
        m0 = FittingModel(cfg.logic, worlds, rel, domain, interp, EvidenceSpec.closure(()))
        base = {_seed_entry(rng, g, m0) for _ in range(rng.randint(0, 6))}
        if rng.random() < 0.7:
            base |= _seed_pair(rng, g, m0)
        ev = EvidenceSpec.closure(base)
    m = FittingModel(cfg.logic, worlds, rel, domain, interp, ev)
    if cfg.logic == "FOJT45" and mode == "closure":
        m = FittingModel(cfg.logic, worlds, rel, domain, interp, EvidenceSpec.closure(_truthful(m, ev.base)))
    if cfg.fault in ("drop_app", "drop_query", "skip_monotonicity"):
        m.faults = frozenset({cfg.fault})
    if cfg.fault is None:
        rep = audit(m)
        assert rep.passed, f"generated model fails its audit: {rep}"
    return m


def skeletons(logic: str, n: int):
    """Every relation on ``n`` worlds meeting the logic's frame conditions."""
    worlds = [f"w{i}" for i in range(n)]
    pairs = [(a, b) for a in worlds for b in worlds if a != b]
    seen = set()
    for bits in product((0, 1), repeat=len(pairs)):
        rel = {p for p, bit in zip(pairs, bits) if bit}
        full = frozenset(close_relation(worlds, rel, logic))
        if full not in seen:
            seen.add(full)
            yield worlds, full


# -- axiom instances ----------------------------------------------------------------


def _guided(rng, model: FittingModel | None):
    if model is None or model.evidence.mode != "closure" or not model.evidence.base:
        return None
    if rng.random() < 0.3:
        return None
    return sorted(model.evidence.base, key=repr)


def _axiom_candidate(g: SyntaxGen, schema: str, model) -> Formula:
    r = g.rng
    phi, psi, chi = (g.formula(r.randint(0, 2), BASIC) for _ in range(3))
    t, s = g.term(), g.term()
    X = g.subscript(BASIC)
    x, y = r.choice(BASIC), r.choice(BASIC)
    e = r.choice(BASIC)
    base = _guided(r, model)
    if schema == "B2" and model is not None and model.evidence.mode == "closure":
        pairs = [(u, f, v) for u, f, _ in sorted(model.evidence.base, key=repr) if isinstance(f, Implies)
                 for v, a, _ in sorted(model.evidence.base, key=repr) if a == f.left]
        if pairs:
            t, f, s = r.choice(pairs)
            X = free_vars(f) & model.dset
            return instance("B2", phi=f.left, psi=f.right, t=t, s=s, X=X)
    if base and schema in JUST_IDS:
        t0, f0, _ = r.choice(base)
        t, phi = t0, f0
        X = X | (free_vars(f0) & model.dset)
        if schema == "B2":
            imps = [(u, f) for u, f, _ in base if isinstance(f, Implies)]
            if imps:
                t, f = r.choice(imps)
                phi, psi = f.left, f.right
                X = X | (free_vars(f) & model.dset)
                ants = [u for u, g2, _ in base if g2 == phi]
                if ants:
                    s = r.choice(ants)
    if schema in ("A2", "A3", "Bb"):
        X = X - {y}
    if schema == "B5":
        X = X - {x}
    return instance(schema, phi=phi, psi=psi, chi=chi, t=t, s=s, X=X, x=x, y=y, e=e)


def gen_axiom_instance(cfg: GenConfig, schema: str, rng: random.Random | None = None,
                       model: FittingModel | None = None) -> Formula:
    """A random instance of ``schema``; with ``model``, parameters sometimes come from its evidence base."""
    if schema not in schemas_for(cfg.logic):
        raise ValueError(f"{schema} is not an axiom of {cfg.logic}")
    rng = rng or random.Random(f"{cfg.seed}/{schema}")
    g = SyntaxGen(rng, cfg.logic, term_depth=cfg.max_term_depth)
    while True:
        try:
            f = _axiom_candidate(g, schema, model)
        except ValueError:
            continue
        if match_axiom(schema, f, cfg.logic) is not None:
            return f


# -- generated derivations -------------------------------------------------------------


def gen_derivation(rng: random.Random, logic: str = "FOLPb", n_hyps: int | None = None,
                   witnesses=(), steps: int | None = None, use_taut: bool = True) -> Derivation:
    """A kernel-accepted derivation from hypotheses ``[p_i]_{X_i} phi_i``.

    Witness variables, when given, occur in the hypothesis and axiom formulas."""
    g = SyntaxGen(rng, logic, term_depth=1, witnesses=witnesses)
    k = rng.randint(0, 2) if n_hyps is None else n_hyps
    hyps = []
    for i in range(k):
        body = g.formula(1)
        xs = g.subscript(BASIC) | (free_vars(body) & frozenset(g.witnesses))
        hyps.append(Just(JustVar(f"p{i}"), xs, body))
    b = ProofBuilder(logic, None, hyps)
    hyp_fv = set()
    for h in hyps:
        hyp_fv |= free_vars(h)
    pool = []
    for i, h in enumerate(hyps, 1):
        pool.append(b.hyp(i))
        pool.append(b.mp(pool[-1], b.ax("B1", t=h.term, X=h.xs, phi=h.body)))
    if not pool:
        f = g.formula(1)
        pool.append(b.ax("A1.K", phi=f, psi=g.formula(1)))
    for _ in range(rng.randint(2, 6) if steps is None else steps):
        i = rng.choice(pool)
        a = b.f(i)
        op = rng.choice(("k", "or", "and", "gen", "taut", "b4", "ax"))
        if op == "k":
            got = b.mp(i, b.ax("A1.K", phi=a, psi=g.formula(1)))
        elif op == "or":
            got = b.mp(i, b.ax("A1.OR1", phi=a, psi=g.formula(1)))
        elif op == "and":
            got = b.and_intro(i, rng.choice(pool))
        elif op == "gen":
            free = [v for v in BASIC if v not in hyp_fv]
            if not free:
                continue
            got = b.gen(i, rng.choice(free))
        elif op == "taut" and use_taut:
            got = b.taut(Or(g.formula(1), a), [i])
        elif op == "b4" and isinstance(a, Just):
            got = b.mp(i, b.ax("B4", t=a.term, X=a.xs, phi=a.body))
        else:
            got = b.ax("A1.AND3", phi=g.formula(1), psi=g.formula(1))
        pool.append(got)
    return b.derivation(upto=pool[-1])


def _random_template(rng, k: int, depth: int):
    letters = list(range(1, k + 1))
    rng.shuffle(letters)

    def build(ls, d):
        if len(ls) == 1:
            node = Letter(ls[0])
            while d > 0 and rng.random() < 0.5:
                node = TBox(node)
                d -= 1
            return node
        cut = rng.randint(1, len(ls) - 1)
        node = TOr(build(ls[:cut], d - 1), build(ls[cut:], d - 1))
        if d > 0 and rng.random() < 0.3:
            node = TBox(node)
        return node

    return build(letters, depth)


def gen_template(rng: random.Random, disjunctive: bool = True, max_letters: int = 3, depth: int = 3):
    """A random template; positive (And allowed) unless ``disjunctive``."""
    k = rng.randint(1, max_letters)
    F = _random_template(rng, k, depth)
    if not disjunctive:
        def soften(node):
            if isinstance(node, TOr):
                ctor = TAnd if rng.random() < 0.5 else TOr
                return ctor(soften(node.left), soften(node.right))
            if isinstance(node, TBox):
                return TBox(soften(node.body))
            return node
        F = soften(F)
    return F


def gen_members(rng: random.Random, F, phis, count: int, terms=None) -> list:
    terms = list(terms if terms is not None else term_universe(("p0", "p1", "c0", "."), 1))
    out = []
    for _ in range(count):

        def inst(node):
            if isinstance(node, Letter):
                return phis[node.n - 1]
            if isinstance(node, TNot):
                return Not(inst(node.body))
            if isinstance(node, (TAnd, TOr)):
                return (And if isinstance(node, TAnd) else Or)(inst(node.left), inst(node.right))
            body = inst(node.body)
            return Just(rng.choice(terms), witness_vars(body), body)

        out.append(inst(F))
    return out


def gen_theorem(cfg: GenConfig, rng: random.Random):
    """(label, derivation) for a hypothesis-free derivation built by a transformer."""
    logic = cfg.logic
    kinds = ["deduction", "internalize", "cbarcan", "cburidan", "combine"]
    if logic == "FOJT45":
        kinds.append("jt45barcan")
    kind = rng.choice(kinds)
    g = SyntaxGen(rng, logic, term_depth=1)
    # short inputs keep the synthesized terms small enough to evaluate quickly
    if kind == "deduction":
        d = gen_derivation(rng, logic, n_hyps=rng.randint(1, 2), steps=rng.randint(1, 3))
        return kind, discharge_all(d)
    if kind == "internalize":
        d = gen_derivation(rng, logic, n_hyps=rng.randint(0, 1), steps=rng.randint(1, 2))
        _, d2 = internalize(d, verify=False)
        return kind, discharge_all(d2) if d2.hypotheses else d2
    if kind == "combine":
        F = gen_template(rng, True, 2, 2)
        k = max(n for n in _letter_ids(F))
        phis = [g.formula(1, BASIC) for _ in range(k)]
        members = gen_members(rng, F, phis, rng.randint(1, 3))
        _, d = combine(F, phis, members, logic)
        return kind, d
    y = rng.choice(BASIC)
    X = g.subscript(BASIC) - {y}
    t = g.term()
    phi = g.formula(1, BASIC)
    if kind == "cbarcan":
        return kind, converse_barcan(t, X, y, phi, logic)[1]
    if kind == "cburidan":
        return kind, converse_buridan(t, X, y, phi, logic)[1]
    return kind, jt45_barcan(t, X, y, phi, logic)[1]


def _letter_ids(F):
    if isinstance(F, Letter):
        yield F.n
    elif isinstance(F, (TNot, TBox)):
        yield from _letter_ids(F.body)
    else:
        yield from _letter_ids(F.left)
        yield from _letter_ids(F.right)


# -- soundness --------------------------------------------------------------------------


@dataclass
class Violation:
    trial: int
    source: str
    formula: Formula
    world: str
    instance: Formula
    model: FittingModel

    def replay(self) -> str:
        """Model file with the falsified formula and world as trailing comments."""
        return (print_model(self.model) + f"# formula: {print_formula(self.formula)}\n"
                f"# world: {self.world}\n")


def parse_replay(text: str):
    """(model, formula, world) from a replay file."""
    tags = dict(ln[2:].split(": ", 1) for ln in text.splitlines() if ln.startswith(("# formula: ", "# world: ")))
    m = parse_model(text)
    return m, parse_formula(tags["formula"], m.logic), tags.get("world")


@dataclass
class SoundnessReport:
    logic: str
    seed: int
    trials: int = 0
    by_source: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.violations

    def first_violation(self) -> int | None:
        return self.violations[0].trial if self.violations else None

    def __str__(self):
        lines = [f"logic={self.logic} seed={self.seed} trials={self.trials} violations={len(self.violations)}"]
        for src in sorted(self.by_source):
            lines.append(f"source={src} trials={self.by_source[src]}")
        for v in self.violations[:5]:
            lines.append(f"violation trial={v.trial} source={v.source} world={v.world} "
                         f"formula={print_formula(v.formula)} instance={print_formula(v.instance)}")
        return "\n".join(lines)


def _trial(cfg: GenConfig, i: int, schemas: tuple):
    rng = trial_rng(cfg, i)
    m = gen_model(cfg, rng)
    if i % 5 == 4:
        source, d = gen_theorem(cfg, rng)
        rep = check(d)
        assert rep.accepted and not d.hypotheses, f"generated {source} derivation rejected: {rep}"
        f = d.conclusion
        # intermediate formulas of the proof are candidate antecedents for application evidence
        ev = m.evaluator((f,), tuple(s.formula for s in d.steps))
    else:
        j = i - i // 5
        source = schemas[j % len(schemas)]
        f = gen_axiom_instance(cfg, source, rng, m)
        ev = m.evaluator((f,))
    cx = counterexample(m, f, ev)
    return source, f, m, cx


def soundness_sources(logic: str) -> tuple:
    """Schemas interleaved so that justification axioms take two trials in three."""
    a1 = list(A1_IDS)
    just = [s for s in schemas_for(logic) if s in JUST_IDS]
    out = []
    for k in range(len(a1)):
        out += [just[(2 * k) % len(just)], a1[k], just[(2 * k + 1) % len(just)]]
    return tuple(out)


def run_soundness(cfg: GenConfig, stop_at_first: bool = False) -> SoundnessReport:
    """Check validity of axiom instances and generated theorems in random models."""
    t0 = time.perf_counter()
    rep = SoundnessReport(cfg.logic, cfg.seed)
    schemas = soundness_sources(cfg.logic)
    for i in range(cfg.trials):
        source, f, m, cx = _trial(cfg, i, schemas)
        key = source if source in schemas else f"derivation:{source}"
        rep.by_source[key] = rep.by_source.get(key, 0) + 1
        rep.trials += 1
        if cx is not None:
            rep.violations.append(Violation(i, key, f, cx[0], cx[1], m))
            if stop_at_first:
                break
    rep.elapsed = time.perf_counter() - t0
    return rep


# -- oracles ------------------------------------------------------------------------------


def brute_member(F, phis, depth: int, alphabet=("p0", "c0", ".", "!", "?"), budget: int = 200000):
    """Exhaustive instantiation set with box terms of depth <= ``depth``."""
    return set(enumerate_members(F, phis, term_universe(alphabet, depth), budget))


def brute_oracle(alphabet=("p0", "c0", "."), depth: int = 2, budget: int = 200000) -> BruteMember:
    return BruteMember(term_universe(alphabet, depth), budget)


def reference_eval(m: FittingModel, w: str, f: Formula, ev=None) -> bool:
    """Direct recursive truth definition, without world masks or memo tables.

    Evidence is read from an evaluator of ``m`` (evidence is part of the model)."""
    ev = ev or m.evaluator((f,))
    dom = m.dvars
    if isinstance(f, Atom):
        return tuple(a.name for a in f.args) in m.interp.get((f.pred, w), ())
    if isinstance(f, Bottom):
        return False
    if isinstance(f, Not):
        return not reference_eval(m, w, f.body, ev)
    if isinstance(f, And):
        return reference_eval(m, w, f.left, ev) and reference_eval(m, w, f.right, ev)
    if isinstance(f, Or):
        return reference_eval(m, w, f.left, ev) or reference_eval(m, w, f.right, ev)
    if isinstance(f, Implies):
        return not reference_eval(m, w, f.left, ev) or reference_eval(m, w, f.right, ev)
    if isinstance(f, Iff):
        return reference_eval(m, w, f.left, ev) == reference_eval(m, w, f.right, ev)
    if isinstance(f, (Forall, Exists)):
        vals = (reference_eval(m, w, substitute(f.body, {f.var: d}), ev) for d in dom)
        return all(vals) if isinstance(f, Forall) else any(vals)
    if isinstance(f, Just):
        if not ev.evidence(f.term, f.body, w):
            return False
        rest = sorted(free_vars(f.body) - m.dset)
        for v in m.worlds:
            if (w, v) not in m.rel:
                continue
            for choice in product(dom, repeat=len(rest)):
                if not reference_eval(m, v, substitute(f.body, dict(zip(rest, choice))), ev):
                    return False
        return True
    raise TypeError(f"not a formula: {f!r}")


# -- mutation suites ------------------------------------------------------------------------


@dataclass(frozen=True)
class Mutant:
    derivation: Derivation
    step: int
    what: str


def _with_step(d: Derivation, k: int, new: Step | None) -> Derivation:
    steps = []
    for s in d.steps:
        if s.index == k:
            if new is not None:
                steps.append(new)
        else:
            steps.append(s)
    return replace(d, steps=tuple(steps))


def _cites(rule) -> tuple:
    if isinstance(rule, Mp):
        return (rule.i, rule.j)
    if isinstance(rule, Gen):
        return (rule.i,)
    if isinstance(rule, Taut):
        return tuple(rule.premises)
    return ()


def mutants(d: Derivation, rng: random.Random, count: int = 60) -> list:
    """Single-step corruptions of ``d``, each paired with the step the kernel must reject.

    Every operator breaks the step by construction, so no mutant is accidentally valid."""
    fs = {s.index: s.formula for s in d.steps}
    idx = [s.index for s in d.steps]
    out: dict = {}

    def add(dd, step, what):
        out.setdefault((step, what), Mutant(dd, step, what))

    for s in d.steps:
        n, f, r = s.index, s.formula, s.rule
        earlier = [i for i in idx if i < n]
        if isinstance(r, Mp):
            for bad, label in ((FALSE, "bottom"), (Not(f), "negated"), (And(f, f), "doubled")):
                add(_with_step(d, n, Step(n, bad, r)), n, f"mp-formula-{label}")
            for i in earlier:
                if fs[i] != fs[r.i]:
                    add(_with_step(d, n, Step(n, f, Mp(i, r.j))), n, f"mp-minor-{i}")
                if fs[i] != fs[r.j]:
                    add(_with_step(d, n, Step(n, f, Mp(r.i, i))), n, f"mp-major-{i}")
            add(_with_step(d, n, Step(n, f, Mp(n, r.j))), n, "mp-self-ref")
            add(_with_step(d, n, Step(n, f, Mp(r.i, n + 1000))), n, "mp-forward-ref")
        elif isinstance(r, Gen):
            for v in (Var("zz"), Var("w9")):
                add(_with_step(d, n, Step(n, f, Gen(r.i, v))), n, f"gen-var-{v.name}")
            add(_with_step(d, n, Step(n, Forall(r.var, FALSE), r)), n, "gen-body")
            add(_with_step(d, n, Step(n, f, Gen(n, r.var))), n, "gen-self-ref")
        elif isinstance(r, Ax):
            add(_with_step(d, n, Step(n, FALSE, r)), n, "ax-bottom")
            add(_with_step(d, n, Step(n, Not(f), r)), n, "ax-negated")
            add(_with_step(d, n, Step(n, f, Ax("A9"))), n, "ax-unknown-schema")
            if not (isinstance(f, Implies) and f.left == FALSE):
                add(_with_step(d, n, Step(n, f, Ax("A1.BOT"))), n, "ax-as-bot")
            if not (isinstance(f, Implies) and isinstance(f.left, Not)):
                add(_with_step(d, n, Step(n, f, Ax("B6"))), n, "ax-as-b6")
            add(_with_step(d, n, Step(n, f, Hyp(len(d.hypotheses) + 1))), n, "ax-as-hyp")
        elif isinstance(r, Cs):
            add(_with_step(d, n, Step(n, f, Cs("c_ZZ"))), n, "cs-unknown-constant")
            add(_with_step(d, n, Step(n, FALSE, r)), n, "cs-bottom")
            add(_with_step(d, n, Step(n, f, Hyp(len(d.hypotheses) + 1))), n, "cs-as-hyp")
        elif isinstance(r, Taut):
            if r.premises:
                prem = (n + 1000,) + tuple(r.premises[1:])
                add(_with_step(d, n, Step(n, f, Taut(prem))), n, "taut-forward-ref")
        elif isinstance(r, Hyp):
            add(_with_step(d, n, Step(n, f, Hyp(len(d.hypotheses) + 1))), n, "hyp-out-of-range")
            add(_with_step(d, n, Step(n, FALSE, r)), n, "hyp-bottom")
        # deleting a cited step breaks its first citer
        citers = [s2.index for s2 in d.steps if n in _cites(s2.rule)]
        if citers:
            add(_with_step(d, n, None), min(citers), "delete-cited")
    muts = sorted(out.values(), key=lambda mu: (mu.step, mu.what))
    if len(muts) > count:
        muts = rng.sample(muts, count)
        muts.sort(key=lambda mu: (mu.step, mu.what))
    return muts


__all__ = [
    "FAULTS", "GenConfig", "SyntaxGen", "gen_formula", "gen_term", "gen_model", "skeletons",
    "gen_axiom_instance", "gen_derivation", "gen_template", "gen_members", "gen_theorem",
    "run_soundness", "SoundnessReport", "Violation", "brute_member", "brute_oracle",
    "reference_eval", "mutants", "Mutant", "close_relation", "parse_replay",
]
