"""Immutable terms and formulas of first-order justification logic.

Individual variables come in two lexical classes.  Basic variables are plain
lowercase identifiers and may be quantified.  Witness variables carry a
leading ``@`` and act as domain constants: they are never bound by a
quantifier and never appear as the subscript of a ``gen`` term.

Every node caches its hash, so large internalized terms can be used as
dictionary keys without re-walking the tree.
"""

from __future__ import annotations

import sys
import weakref
from dataclasses import dataclass, fields
from typing import Iterable, Iterator, Mapping

sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


class CaptureError(ValueError):
    """A substitution would capture a variable.  ``subformula`` is where."""

    def __init__(self, msg: str, subformula=None):
        super().__init__(msg)
        self.subformula = subformula


class _Interned(type):
    """Structurally equal nodes are built once, so equality is mostly identity."""

    def __call__(cls, *args, **kw):
        obj = super().__call__(*args, **kw)
        key = (cls, obj._key())
        got = _TABLE.get(key)
        if got is None:
            _TABLE[key] = obj
            return obj
        return got


_TABLE: "weakref.WeakValueDictionary" = weakref.WeakValueDictionary()


class _Node(metaclass=_Interned):
    _fnames: tuple = ()

    def _key(self):
        return tuple(getattr(self, f) for f in self._fnames)

    def __hash__(self):
        h = self.__dict__.get("_h")
        if h is None:
            h = hash((type(self).__name__,) + self._key())
            object.__setattr__(self, "_h", h)
        return h

    def __eq__(self, other):
        if self is other:
            return True
        if type(self) is not type(other) or hash(self) != hash(other):
            return False
        return self._key() == other._key()

    def __ne__(self, other):
        return not self.__eq__(other)

    def __repr__(self):
        from .textio import print_formula, print_term

        if isinstance(self, Formula):
            return f"<{print_formula(self)}>"
        if isinstance(self, Term):
            return f"<term {print_term(self)}>"
        return f"{type(self).__name__}{self._key()!r}"


def _node(cls):
    cls = dataclass(frozen=True, eq=False, repr=False)(cls)
    cls._fnames = tuple(f.name for f in fields(cls))
    return cls


# -- individual variables ---------------------------------------------------


@_node
class Var(_Node):
    name: str

    @property
    def is_witness(self) -> bool:
        return self.name.startswith("@")

    @property
    def is_basic(self) -> bool:
        return not self.is_witness

    def __lt__(self, other: "Var") -> bool:
        return self.name < other.name

    def __repr__(self):
        return self.name


def var(name: str) -> Var:
    return Var(name)


def varset(*names: str) -> frozenset:
    return frozenset(Var(n) for n in names)


# -- justification terms ----------------------------------------------------


class Term(_Node):
    pass


@_node
class JustVar(Term):
    name: str


@_node
class JustConst(Term):
    name: str


@_node
class App(Term):
    left: Term
    right: Term


@_node
class Sum(Term):
    left: Term
    right: Term


@_node
class Bang(Term):
    body: Term


@_node
class Query(Term):
    body: Term


@_node
class Bar(Term):
    body: Term


@_node
class GenTerm(Term):
    var: Var
    body: Term

    def __post_init__(self):
        if self.var.is_witness:
            raise ValueError(f"gen subscript must be a basic variable, got {self.var.name}")


def subterms(t: Term) -> Iterator[Term]:
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, (App, Sum)):
            stack.append(u.right)
            stack.append(u.left)
        elif isinstance(u, (Bang, Query, Bar, GenTerm)):
            stack.append(u.body)


def term_depth(t: Term) -> int:
    if isinstance(t, (JustVar, JustConst)):
        return 0
    if isinstance(t, (App, Sum)):
        return 1 + max(term_depth(t.left), term_depth(t.right))
    return 1 + term_depth(t.body)


def term_gen_vars(t: Term) -> set:
    return {u.var for u in subterms(t) if isinstance(u, GenTerm)}


# -- formulas ---------------------------------------------------------------


class Formula(_Node):
    pass


@_node
class Atom(Formula):
    pred: str
    args: tuple


@_node
class Bottom(Formula):
    pass


FALSE = Bottom()


@_node
class Not(Formula):
    body: Formula


@_node
class And(Formula):
    left: Formula
    right: Formula


@_node
class Or(Formula):
    left: Formula
    right: Formula


@_node
class Implies(Formula):
    left: Formula
    right: Formula


@_node
class Iff(Formula):
    left: Formula
    right: Formula


@_node
class Forall(Formula):
    var: Var
    body: Formula

    def __post_init__(self):
        if self.var.is_witness:
            raise ValueError(f"witness variable {self.var.name} cannot be quantified")


@_node
class Exists(Formula):
    var: Var
    body: Formula

    def __post_init__(self):
        if self.var.is_witness:
            raise ValueError(f"witness variable {self.var.name} cannot be quantified")


@_node
class Just(Formula):
    term: Term
    xs: frozenset
    body: Formula

    def __post_init__(self):
        if not isinstance(self.xs, frozenset):
            object.__setattr__(self, "xs", frozenset(self.xs))


BINARY = (And, Or, Implies, Iff)
QUANT = (Forall, Exists)


def atom(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(Var(a) for a in args))


def imp(*parts: Formula) -> Formula:
    """Right-nested implication ``a -> (b -> ... )``."""
    out = parts[-1]
    for p in reversed(parts[:-1]):
        out = Implies(p, out)
    return out


def children(f: Formula) -> tuple:
    if isinstance(f, BINARY):
        return (f.left, f.right)
    if isinstance(f, (Not, Forall, Exists, Just)):
        return (f.body,)
    return ()


def subformulas(f: Formula) -> Iterator[Formula]:
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(children(g))


def formula_depth(f: Formula) -> int:
    cs = children(f)
    return 0 if not cs else 1 + max(formula_depth(c) for c in cs)


def _rebuild(f: Formula, kids: list) -> Formula:
    if isinstance(f, BINARY):
        return type(f)(kids[0], kids[1])
    if isinstance(f, Not):
        return Not(kids[0])
    if isinstance(f, QUANT):
        return type(f)(f.var, kids[0])
    if isinstance(f, Just):
        return Just(f.term, f.xs, kids[0])
    return f


# -- variables --------------------------------------------------------------


def free_vars(f: Formula) -> frozenset:
    """Free individual variables; for ``t:_X A`` this is exactly ``X``."""
    got = f.__dict__.get("_fv")
    if got is None:
        got = _free_vars(f)
        object.__setattr__(f, "_fv", got)
    return got


def _free_vars(f: Formula) -> frozenset:
    if isinstance(f, Atom):
        return frozenset(f.args)
    if isinstance(f, Bottom):
        return frozenset()
    if isinstance(f, Just):
        return f.xs
    if isinstance(f, QUANT):
        return free_vars(f.body) - {f.var}
    out = frozenset()
    for c in children(f):
        out |= free_vars(c)
    return out


def free_basic(f: Formula) -> frozenset:
    return frozenset(v for v in free_vars(f) if v.is_basic)


def all_vars(f: Formula) -> set:
    """Every individual variable occurring anywhere, bound, free, in subscripts or gen."""
    out = set()
    for g in subformulas(f):
        if isinstance(g, Atom):
            out.update(g.args)
        elif isinstance(g, QUANT):
            out.add(g.var)
        elif isinstance(g, Just):
            out.update(g.xs)
            out.update(term_gen_vars(g.term))
    return out


def witness_vars(f: Formula) -> frozenset:
    return frozenset(v for v in all_vars(f) if v.is_witness)


def terms_of(f: Formula) -> Iterator[Term]:
    for g in subformulas(f):
        if isinstance(g, Just):
            yield g.term


def free_for(y: Var, x: Var, f: Formula) -> bool:
    """Whether ``y`` may replace the free occurrences of ``x`` in ``f``."""
    if x not in free_vars(f):
        return True
    if isinstance(f, Atom):
        return True
    if isinstance(f, QUANT):
        return f.var != y and free_for(y, x, f.body)
    if isinstance(f, Just):
        if not free_for(y, x, f.body):
            return False
        return y not in free_vars(f.body) or y in f.xs
    return all(free_for(y, x, c) for c in children(f))


def substitute(f: Formula, pairs, check: bool = True) -> Formula:
    """Simultaneously replace free occurrences of each target by its replacement.

    ``pairs`` is a mapping or a list of ``(target, replacement)``.  With
    ``check`` set, a replacement that is not free for its target raises
    :class:`CaptureError`.
    """
    sigma = dict(pairs.items() if isinstance(pairs, Mapping) else pairs)
    sigma = {k: v for k, v in sigma.items() if k != v}
    if not sigma:
        return f
    return _subst(f, sigma, check)


def _subst(f: Formula, sigma: dict, check: bool) -> Formula:
    fv = free_vars(f)
    live = {k: v for k, v in sigma.items() if k in fv}
    if not live:
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(live.get(a, a) for a in f.args))
    if isinstance(f, QUANT):
        if check and f.var in live.values():
            raise CaptureError(f"variable {f.var.name} would be captured", f)
        return type(f)(f.var, _subst(f.body, live, check))
    if isinstance(f, Just):
        inner = {k: v for k, v in live.items() if k in f.xs}
        if check:
            body_fv = free_vars(f.body)
            for v in inner.values():
                if v in body_fv and v not in f.xs:
                    raise CaptureError(
                        f"{v.name} occurs in the body of a justification but not in its subscript", f
                    )
        xs = frozenset(inner.get(v, v) for v in f.xs)
        return Just(f.term, xs, _subst(f.body, inner, check))
    return _rebuild(f, [_subst(c, live, check) for c in children(f)])


def replace_everywhere(f: Formula, old: Var, new: Var) -> Formula:
    """Replace every occurrence of ``old``, free or not (used for witness variables)."""
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(new if a == old else a for a in f.args))
    if isinstance(f, QUANT):
        v = new if f.var == old else f.var
        return type(f)(v, replace_everywhere(f.body, old, new))
    if isinstance(f, Just):
        xs = frozenset(new if v == old else v for v in f.xs)
        return Just(f.term, xs, replace_everywhere(f.body, old, new))
    return _rebuild(f, [replace_everywhere(c, old, new) for c in children(f)])


def variable_variant(f: Formula, g: Formula):
    """Bijection ``fv(f) -> fv(g)`` whose renaming turns ``f`` into ``g``, or None."""
    sigma: dict = {}
    pending: list = []
    if not _align(f, g, frozenset(), frozenset(), sigma, pending):
        return None
    # subscript members that never occur in a body: pair leftovers in sorted order
    for xs, ys in pending:
        mapped = {sigma[v] for v in xs if v in sigma}
        free_x = sorted(v for v in xs if v not in sigma)
        free_y = sorted(ys - mapped)
        if len(free_x) != len(free_y) or not mapped <= ys:
            return None
        for a, b in zip(free_x, free_y):
            sigma[a] = b
    fv_f, fv_g = free_vars(f), free_vars(g)
    if set(sigma) != set(fv_f):
        return None
    if len(set(sigma.values())) != len(sigma) or set(sigma.values()) != set(fv_g):
        return None
    try:
        if substitute(f, sigma) != g:
            return None
    except CaptureError:
        return None
    return sigma


def _align(f, g, bound_f, bound_g, sigma, pending) -> bool:
    if type(f) is not type(g):
        return False
    if isinstance(f, Atom):
        if f.pred != g.pred or len(f.args) != len(g.args):
            return False
        for a, b in zip(f.args, g.args):
            if a in bound_f or b in bound_g:
                if a != b:
                    return False
                continue
            if sigma.setdefault(a, b) != b:
                return False
        return True
    if isinstance(f, QUANT):
        if f.var != g.var:
            return False
        return _align(f.body, g.body, bound_f | {f.var}, bound_g | {g.var}, sigma, pending)
    if isinstance(f, Just):
        if f.term != g.term or len(f.xs) != len(g.xs):
            return False
        # inside the body, variables outside the subscript are not free
        inner_bf = (bound_f | free_vars(f.body)) - f.xs
        inner_bg = (bound_g | free_vars(g.body)) - g.xs
        if not _align(f.body, g.body, inner_bf, inner_bg, sigma, pending):
            return False
        pending.append((f.xs, g.xs))
        return True
    return all(_align(a, b, bound_f, bound_g, sigma, pending) for a, b in zip(children(f), children(g)))


def is_closed_henkin(f: Formula) -> bool:
    return not free_basic(f)


def universal_closure(f: Formula) -> Formula:
    """Prefix ``forall`` over the free basic variables, lexicographically outermost first."""
    for v in sorted(free_basic(f), reverse=True):
        f = Forall(v, f)
    return f


def fresh_basic(avoid: Iterable[Var], stem: str = "v") -> Var:
    used = {v.name for v in avoid}
    i = 0
    while f"{stem}{i}" in used:
        i += 1
    return Var(f"{stem}{i}")
