"""Axiom-schema recognition and constant specifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations, combinations

from .syntax import (
    FALSE, And, App, Bang, Bar, Bottom, CaptureError, Exists, Forall, Formula, GenTerm,
    Iff, Implies, Just, Not, Or, Query, Sum, Var, all_vars, free_basic,
    free_for, free_vars, substitute, variable_variant, witness_vars,
)

A1_IDS = (
    "A1.K", "A1.S", "A1.NEG", "A1.CP", "A1.AND1", "A1.AND2", "A1.AND3", "A1.OR1", "A1.OR2",
    "A1.OR3", "A1.IFF1", "A1.IFF2", "A1.IFF3", "A1.BOT", "A1.UI", "A1.UD", "A1.EI", "A1.ED",
)
JUST_IDS = ("A2", "A3", "B1", "B2", "B3L", "B3R", "B4", "B5", "Bb", "B6")
SCHEMA_IDS = A1_IDS + JUST_IDS
LOGICS = ("FOLPb", "FOJT45")


def schemas_for(logic: str | None) -> tuple:
    if logic == "FOLPb":
        return tuple(s for s in SCHEMA_IDS if s != "B6")
    if logic == "FOJT45":
        return tuple(s for s in SCHEMA_IDS if s != "Bb")
    return SCHEMA_IDS


class UnknownConstant(KeyError):
    pass


class InvalidConstantSpecification(ValueError):
    pass


@dataclass(frozen=True)
class MatchReport:
    schema: str
    bindings: dict = field(default_factory=dict, compare=False)

    def __str__(self):
        from .textio import print_formula, print_term

        parts = []
        for k, v in self.bindings.items():
            if isinstance(v, Formula):
                v = print_formula(v)
            elif isinstance(v, Var):
                v = v.name
            elif isinstance(v, frozenset):
                v = "{" + ",".join(sorted(x.name for x in v)) + "}"
            elif v is not None and not isinstance(v, str):
                v = print_term(v)
            parts.append(f"{k}={v}")
        return f"{self.schema}[{'; '.join(parts)}]"


def _imp(f):
    return (f.left, f.right) if isinstance(f, Implies) else None


def _find_instance(general: Formula, x: Var, inst: Formula):
    """The variable e with general[e/x] == inst and e free for x, or None."""
    if x not in free_vars(general):
        return x if general == inst else None
    for e in sorted(all_vars(inst) | {x}):
        if not free_for(e, x, general):
            continue
        try:
            if substitute(general, {x: e}) == inst:
                return e
        except CaptureError:
            continue
    return None


def _m_classical(schema: str, f: Formula):
    p = _imp(f)
    if p is None:
        return None
    a, b = p
    if schema == "A1.K":
        if isinstance(b, Implies) and b.right == a:
            return {"phi": a, "psi": b.left}
    elif schema == "A1.S":
        if isinstance(a, Implies) and isinstance(a.right, Implies) and isinstance(b, Implies):
            phi, psi, chi = a.left, a.right.left, a.right.right
            if b == Implies(Implies(phi, psi), Implies(phi, chi)):
                return {"phi": phi, "psi": psi, "chi": chi}
    elif schema == "A1.NEG":
        if isinstance(a, Implies) and isinstance(a.left, Not) and isinstance(a.right, Not):
            phi, psi = a.left.body, a.right.body
            if b == Implies(psi, phi):
                return {"phi": phi, "psi": psi}
    elif schema == "A1.CP":
        if isinstance(a, Implies) and b == Implies(Not(a.right), Not(a.left)):
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.BOT":
        if isinstance(a, Bottom):
            return {"phi": b}
    elif schema == "A1.AND1":
        if isinstance(a, And) and b == a.left:
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.AND2":
        if isinstance(a, And) and b == a.right:
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.AND3":
        if isinstance(b, Implies) and b.right == And(a, b.left):
            return {"phi": a, "psi": b.left}
    elif schema == "A1.OR1":
        if isinstance(b, Or) and b.left == a:
            return {"phi": a, "psi": b.right}
    elif schema == "A1.OR2":
        if isinstance(b, Or) and b.right == a:
            return {"phi": b.left, "psi": a}
    elif schema == "A1.OR3":
        if isinstance(a, Implies) and isinstance(b, Implies) and isinstance(b.left, Implies):
            phi, chi = a.left, a.right
            psi = b.left.left
            if b.left.right == chi and b.right == Implies(Or(phi, psi), chi):
                return {"phi": phi, "psi": psi, "chi": chi}
    elif schema == "A1.IFF1":
        if isinstance(a, Iff) and b == Implies(a.left, a.right):
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.IFF2":
        if isinstance(a, Iff) and b == Implies(a.right, a.left):
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.IFF3":
        if isinstance(a, Implies) and b == Implies(Implies(a.right, a.left), Iff(a.left, a.right)):
            return {"phi": a.left, "psi": a.right}
    elif schema == "A1.UI":
        if isinstance(a, Forall):
            e = _find_instance(a.body, a.var, b)
            if e is not None:
                return {"x": a.var, "phi": a.body, "e": e}
    elif schema == "A1.EI":
        if isinstance(b, Exists):
            e = _find_instance(b.body, b.var, a)
            if e is not None:
                return {"x": b.var, "phi": b.body, "e": e}
    elif schema == "A1.UD":
        if isinstance(a, Forall) and isinstance(a.body, Implies) and isinstance(b, Implies):
            x, phi, psi = a.var, a.body.left, a.body.right
            if b == Implies(phi, Forall(x, psi)) and x not in free_vars(phi):
                return {"x": x, "phi": phi, "psi": psi}
    elif schema == "A1.ED":
        if isinstance(a, Forall) and isinstance(a.body, Implies) and isinstance(b, Implies):
            x, phi, psi = a.var, a.body.left, a.body.right
            if b == Implies(Exists(x, phi), psi) and x not in free_vars(psi):
                return {"x": x, "phi": phi, "psi": psi}
    return None


def _m_just(schema: str, f: Formula):
    p = _imp(f)
    if p is None:
        return None
    a, b = p
    if schema == "B6":
        if isinstance(a, Not) and isinstance(a.body, Just):
            j = a.body
            if b == Just(Query(j.term), j.xs, a):
                return {"t": j.term, "X": j.xs, "phi": j.body}
        return None
    if schema == "Bb":
        if isinstance(a, Forall) and isinstance(a.body, Just) and isinstance(b, Just):
            y, j = a.var, a.body
            if (isinstance(b.term, Bar) and b.term.body == j.term and y in j.xs
                    and b.xs == j.xs - {y} and b.body == Forall(y, j.body)):
                return {"t": j.term, "X": b.xs, "y": y, "phi": j.body}
        return None
    if not isinstance(a, Just):
        return None
    t, xs, phi = a.term, a.xs, a.body
    if schema == "B1":
        if b == phi:
            return {"t": t, "X": xs, "phi": phi}
        return None
    if not isinstance(b, Just):
        return None
    if schema == "A2":
        if b.term == t and b.body == phi and b.xs < xs and len(xs - b.xs) == 1:
            (y,) = xs - b.xs
            if y not in free_vars(phi):
                return {"t": t, "X": b.xs, "y": y, "phi": phi}
    elif schema == "A3":
        if b.term == t and b.body == phi and xs < b.xs and len(b.xs - xs) == 1:
            (y,) = b.xs - xs
            return {"t": t, "X": xs, "y": y, "phi": phi}
    elif schema in ("B3L", "B3R"):
        if isinstance(b.term, Sum) and b.xs == xs and b.body == phi:
            side = b.term.left if schema == "B3L" else b.term.right
            if side == t:
                return {"t": b.term.left, "s": b.term.right, "X": xs, "phi": phi}
    elif schema == "B4":
        if b.term == Bang(t) and b.xs == xs and b.body == a:
            return {"t": t, "X": xs, "phi": phi}
    elif schema == "B5":
        if isinstance(b.term, GenTerm) and b.term.body == t and b.xs == xs:
            x = b.term.var
            if b.body == Forall(x, phi) and x not in xs:
                return {"t": t, "X": xs, "x": x, "phi": phi}
    return None


def _m_b2(f: Formula):
    p = _imp(f)
    if p is None:
        return None
    a, b = p
    if not (isinstance(a, Just) and isinstance(a.body, Implies) and isinstance(b, Implies)):
        return None
    l, r = b.left, b.right
    if not (isinstance(l, Just) and isinstance(r, Just)):
        return None
    t, xs = a.term, a.xs
    if l.xs == xs and r.xs == xs and l.body == a.body.left and r.body == a.body.right and r.term == App(t, l.term):
        return {"t": t, "s": l.term, "X": xs, "phi": a.body.left, "psi": a.body.right}
    return None


def match_axiom(schema: str, f: Formula, logic: str | None = None) -> MatchReport | None:
    """Match ``f`` against one schema with its side conditions; None when it does not match."""
    if schema not in SCHEMA_IDS:
        return None
    if logic is not None and schema not in schemas_for(logic):
        return None
    if schema.startswith("A1."):
        b = _m_classical(schema, f)
    elif schema == "B2":
        b = _m_b2(f)
    else:
        b = _m_just(schema, f)
    return MatchReport(schema, b) if b is not None else None


def identify(f: Formula, logic: str | None = None) -> list:
    """All schema ids ``f`` is an instance of."""
    return [s for s in schemas_for(logic) if match_axiom(s, f, logic) is not None]


# -- instance construction ---------------------------------------------------


def instance(schema: str, phi=None, psi=None, chi=None, t=None, s=None, X=frozenset(),
             x=None, y=None, e=None) -> Formula:
    """Build the instance of ``schema`` for the given parameters (no side-condition check)."""
    X = frozenset(X)
    if schema == "A1.K":
        return Implies(phi, Implies(psi, phi))
    if schema == "A1.S":
        return Implies(Implies(phi, Implies(psi, chi)), Implies(Implies(phi, psi), Implies(phi, chi)))
    if schema == "A1.NEG":
        return Implies(Implies(Not(phi), Not(psi)), Implies(psi, phi))
    if schema == "A1.CP":
        return Implies(Implies(phi, psi), Implies(Not(psi), Not(phi)))
    if schema == "A1.BOT":
        return Implies(FALSE, phi)
    if schema == "A1.AND1":
        return Implies(And(phi, psi), phi)
    if schema == "A1.AND2":
        return Implies(And(phi, psi), psi)
    if schema == "A1.AND3":
        return Implies(phi, Implies(psi, And(phi, psi)))
    if schema == "A1.OR1":
        return Implies(phi, Or(phi, psi))
    if schema == "A1.OR2":
        return Implies(psi, Or(phi, psi))
    if schema == "A1.OR3":
        return Implies(Implies(phi, chi), Implies(Implies(psi, chi), Implies(Or(phi, psi), chi)))
    if schema == "A1.IFF1":
        return Implies(Iff(phi, psi), Implies(phi, psi))
    if schema == "A1.IFF2":
        return Implies(Iff(phi, psi), Implies(psi, phi))
    if schema == "A1.IFF3":
        return Implies(Implies(phi, psi), Implies(Implies(psi, phi), Iff(phi, psi)))
    if schema == "A1.UI":
        return Implies(Forall(x, phi), substitute(phi, {x: e if e is not None else x}))
    if schema == "A1.EI":
        return Implies(substitute(phi, {x: e if e is not None else x}), Exists(x, phi))
    if schema == "A1.UD":
        return Implies(Forall(x, Implies(phi, psi)), Implies(phi, Forall(x, psi)))
    if schema == "A1.ED":
        return Implies(Forall(x, Implies(phi, psi)), Implies(Exists(x, phi), psi))
    if schema == "A2":
        return Implies(Just(t, X | {y}, phi), Just(t, X, phi))
    if schema == "A3":
        return Implies(Just(t, X, phi), Just(t, X | {y}, phi))
    if schema == "B1":
        return Implies(Just(t, X, phi), phi)
    if schema == "B2":
        return Implies(Just(t, X, Implies(phi, psi)), Implies(Just(s, X, phi), Just(App(t, s), X, psi)))
    if schema == "B3L":
        return Implies(Just(t, X, phi), Just(Sum(t, s), X, phi))
    if schema == "B3R":
        return Implies(Just(s, X, phi), Just(Sum(t, s), X, phi))
    if schema == "B4":
        return Implies(Just(t, X, phi), Just(Bang(t), X, Just(t, X, phi)))
    if schema == "B5":
        return Implies(Just(t, X, phi), Just(GenTerm(x, t), X, Forall(x, phi)))
    if schema == "Bb":
        return Implies(Forall(y, Just(t, X | {y}, phi)), Just(Bar(t), X, Forall(y, phi)))
    if schema == "B6":
        n = Not(Just(t, X, phi))
        return Implies(n, Just(Query(t), X, n))
    raise ValueError(f"unknown schema {schema}")


# -- constant specifications --------------------------------------------------


def schematic_constant(schema: str) -> str:
    return "c_" + schema.split(".")[-1]


_SCHEMATIC = {schematic_constant(s): s for s in SCHEMA_IDS}


class ConstantSpecification:
    """Either an explicit list of ``c : phi`` entries or the schematic map
    ``schema -> c_<schema>`` where ``c : phi`` holds iff phi instantiates the schema."""

    def __init__(self, mode: str, entries=(), source: str | None = None):
        self.mode = mode
        self.entries = tuple(entries)
        self.source = source
        self._set = frozenset(self.entries)

    @classmethod
    def schematic(cls) -> "ConstantSpecification":
        return cls("schematic")

    @classmethod
    def explicit(cls, entries, source: str | None = None) -> "ConstantSpecification":
        entries = [(str(c), f) for c, f in entries]
        for c, f in entries:
            if not identify(f):
                from .textio import print_formula

                raise InvalidConstantSpecification(f"{c} : {print_formula(f)} is not an axiom instance")
        return cls("explicit", entries, source)

    def constant_for(self, schema: str) -> str:
        if self.mode != "schematic":
            raise ValueError("explicit specifications have no schema constants")
        return schematic_constant(schema)

    def schema_of(self, c: str) -> str:
        if self.mode != "schematic":
            raise ValueError("explicit specifications have no schema constants")
        try:
            return _SCHEMATIC[c]
        except KeyError:
            raise UnknownConstant(c) from None

    def constants(self) -> list:
        if self.mode == "schematic":
            return sorted(_SCHEMATIC)
        return sorted({c for c, _ in self.entries})

    def __eq__(self, other):
        return (isinstance(other, ConstantSpecification) and self.mode == other.mode
                and self._set == other._set)

    def __hash__(self):
        return hash((self.mode, self._set))

    def __repr__(self):
        if self.mode == "schematic":
            return "ConstantSpecification(schematic)"
        return f"ConstantSpecification(explicit, {len(self.entries)} entries)"


def cs_contains(cs: ConstantSpecification, c: str, f: Formula, logic: str | None = None) -> bool:
    if cs.mode == "schematic":
        schema = cs.schema_of(c)
        if witness_vars(f):
            return False
        return match_axiom(schema, f, logic) is not None
    return (c, f) in cs._set


def _witness_variant(base: Formula, target: Formula) -> bool:
    """target is base with some free basic variables injectively replaced by fresh witnesses."""
    new_w = witness_vars(target) - witness_vars(base)
    if not new_w:
        return base == target
    if witness_vars(base) - witness_vars(target):
        return False
    ws = sorted(new_w)
    fb = sorted(free_basic(base))
    if len(fb) < len(ws):
        return False
    for chosen in combinations(fb, len(ws)):
        for perm in permutations(ws):
            sigma = dict(zip(chosen, perm))
            try:
                if substitute(base, sigma) == target:
                    return True
            except CaptureError:
                continue
    return False


def csv_contains(cs: ConstantSpecification, c: str, f: Formula, logic: str | None = None) -> bool:
    """Membership in the witness extension of ``cs``."""
    if cs.mode == "schematic":
        schema = cs.schema_of(c)
        return match_axiom(schema, f, logic) is not None
    if (c, f) in cs._set:
        return True
    if not witness_vars(f):
        return False
    return any(cc == c and _witness_variant(g, f) for cc, g in cs.entries)


def is_variant_closed(cs: ConstantSpecification) -> bool:
    if cs.mode == "schematic":
        return True
    ents = list(cs.entries)
    for c, f in ents:
        for _, g in ents:
            if g != f and (c, g) not in cs._set and variable_variant(f, g) is not None:
                return False
    return True
