"""Concrete syntax: terms, formulas, derivation files, constant-specification
files and model files.

Grammar::

    t ::= ident | (t . t) | (t + t) | !t | ?t | b(t) | gen[x](t)
    A ::= P(x,...) | false | ~A | (A -> A) | (A & A) | (A | A) | (A <-> A)
        | forall x. A | exists x. A | [t]{x,...} A

Justification variables are ``p<digits>``; any other identifier in term
position is a constant.  Basic variables are lowercase identifiers, witness
variables start with ``@``.  Outside parentheses ``->`` is right associative
and binds loosest, then ``<->``, ``|``, ``&``; prefix operators bind tightest.
The printer always parenthesizes binary connectives.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .syntax import (
    FALSE, And, App, Atom, Bang, Bar, Bottom, Exists, Forall, Formula, GenTerm, Iff,
    Implies, Just, JustConst, JustVar, Not, Or, Query, Sum, Term, Var,
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    length: int

    def __str__(self):
        return f"{self.line}:{self.column}"


class ParseError(ValueError):
    def __init__(self, msg: str, span: SourceSpan, expected=()):
        self.msg = msg
        self.span = span
        self.expected = frozenset(expected)
        exp = f" (expected one of: {', '.join(sorted(self.expected))})" if self.expected else ""
        super().__init__(f"{span}: {msg}{exp}")


class DuplicateIndexError(ParseError):
    pass


class UnknownSectionError(ParseError):
    pass


# -- tokenizer --------------------------------------------------------------

_TOKEN = re.compile(
    r"(?P<ws>\s+)|(?P<witness>@[A-Za-z_][A-Za-z0-9_]*)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<punct><->|->|[()\[\]{}.,+!?~&|:;])"
)


@dataclass(frozen=True)
class Tok:
    kind: str  # ident, witness, punct, eof
    text: str
    line: int
    col: int

    @property
    def span(self) -> SourceSpan:
        return SourceSpan(self.line, self.col, len(self.text))


def tokenize(text: str, line: int = 1, col0: int = 1) -> list:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", SourceSpan(line, col0 + pos, 1))
        kind = m.lastgroup
        if kind != "ws":
            out.append(Tok(kind, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(Tok("eof", "", line, col0 + len(text)))
    return out


_JVAR = re.compile(r"p\d+$")
_BASIC = re.compile(r"[a-z][A-Za-z0-9_]*$")


class _Parser:
    def __init__(self, text: str, logic: str | None = None, line: int = 1, col0: int = 1):
        self.toks = tokenize(text, line, col0)
        self.i = 0
        self.logic = logic

    @property
    def tok(self) -> Tok:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def fail(self, msg: str, expected=(), tok: Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.span, expected)

    def eat(self, text: str) -> Tok:
        if self.tok.text != text or self.tok.kind == "eof":
            self.fail(f"unexpected {self.tok.text or 'end of input'!r}", {repr(text)})
        t = self.tok
        self.i += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind != "eof" and self.tok.text == text

    def end(self):
        if self.tok.kind != "eof":
            self.fail(f"trailing input {self.tok.text!r}", {"end of input"})

    # terms
    def term(self) -> Term:
        t = self.tok
        if t.kind == "ident":
            if t.text == "b" and self.peek().text == "(":
                if self.logic == "FOJT45":
                    self.fail("b(...) is not a primitive term in FOJT45")
                self.i += 1
                self.eat("(")
                body = self.term()
                self.eat(")")
                return Bar(body)
            if t.text == "gen" and self.peek().text == "[":
                self.i += 1
                self.eat("[")
                v = self.variable()
                if v.is_witness:
                    self.fail("gen subscript must be a basic variable", tok=self.toks[self.i - 1])
                self.eat("]")
                self.eat("(")
                body = self.term()
                self.eat(")")
                return GenTerm(v, body)
            self.i += 1
            return JustVar(t.text) if _JVAR.match(t.text) else JustConst(t.text)
        if t.text == "(":
            self.i += 1
            left = self.term()
            op = self.tok
            if op.text not in (".", "+"):
                self.fail(f"unexpected {op.text or 'end of input'!r}", {"'.'", "'+'"})
            self.i += 1
            right = self.term()
            self.eat(")")
            return App(left, right) if op.text == "." else Sum(left, right)
        if t.text == "!":
            self.i += 1
            return Bang(self.term())
        if t.text == "?":
            if self.logic == "FOLPb":
                self.fail("?-terms are only admitted in FOJT45")
            self.i += 1
            return Query(self.term())
        self.fail(f"unexpected {t.text or 'end of input'!r} in term", {"identifier", "'('", "'!'", "'?'"})

    def variable(self) -> Var:
        t = self.tok
        if t.kind == "witness":
            self.i += 1
            return Var(t.text)
        if t.kind == "ident" and _BASIC.match(t.text):
            self.i += 1
            return Var(t.text)
        self.fail(f"expected a variable, got {t.text or 'end of input'!r}", {"variable"})

    # formulas
    def formula(self) -> Formula:
        left = self.disj()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.formula())
        if self.at("<->"):
            self.i += 1
            return Iff(left, self.disj())
        return left

    def disj(self) -> Formula:
        f = self.conj()
        while self.at("|"):
            self.i += 1
            f = Or(f, self.conj())
        return f

    def conj(self) -> Formula:
        f = self.unary()
        while self.at("&"):
            self.i += 1
            f = And(f, self.unary())
        return f

    def unary(self) -> Formula:
        t = self.tok
        if t.text == "~" and t.kind == "punct":
            self.i += 1
            return Not(self.unary())
        if t.text == "(" and t.kind == "punct":
            self.i += 1
            f = self.formula()
            self.eat(")")
            return f
        if t.text == "[" and t.kind == "punct":
            self.i += 1
            term = self.term()
            self.eat("]")
            self.eat("{")
            xs = []
            if not self.at("}"):
                xs.append(self.variable())
                while self.at(","):
                    self.i += 1
                    xs.append(self.variable())
            close = self.eat("}")
            if len(set(xs)) != len(xs):
                self.fail("duplicate variable in subscript", tok=close)
            return Just(term, frozenset(xs), self.unary())
        if t.kind == "ident":
            if t.text in ("forall", "exists") and self.peek().text != "(":
                self.i += 1
                vt = self.tok
                v = self.variable()
                if v.is_witness:
                    self.fail("witness variables cannot be quantified", tok=vt)
                self.eat(".")
                body = self.unary()
                return Forall(v, body) if t.text == "forall" else Exists(v, body)
            if t.text == "false" and self.peek().text != "(":
                self.i += 1
                return FALSE
            if self.peek().text == "(":
                self.i += 2
                args = []
                if not self.at(")"):
                    args.append(self.variable())
                    while self.at(","):
                        self.i += 1
                        args.append(self.variable())
                self.eat(")")
                return Atom(t.text, tuple(args))
            self.fail(f"unexpected identifier {t.text!r}", {"'('"}, tok=self.peek())
        self.fail(
            f"unexpected {t.text or 'end of input'!r}",
            {"predicate", "'false'", "'~'", "'('", "'['", "'forall'", "'exists'"},
        )


def parse_term(text: str, logic: str | None = None) -> Term:
    p = _Parser(text, logic)
    t = p.term()
    p.end()
    return t


def parse_formula(text: str, logic: str | None = None, line: int = 1, col0: int = 1) -> Formula:
    p = _Parser(text, logic, line, col0)
    f = p.formula()
    p.end()
    return f


def parse_varset(text: str) -> frozenset:
    """``{x,@a}``, ``x,y`` or an empty string."""
    s = text.strip()
    if s.startswith("{") and s.endswith("}"):
        s = s[1:-1]
    names = [n.strip() for n in s.split(",") if n.strip()]
    out = []
    for n in names:
        if not (n.startswith("@") or _BASIC.match(n)):
            raise ParseError(f"bad variable {n!r}", SourceSpan(1, 1, len(text)), {"variable"})
        out.append(Var(n))
    return frozenset(out)


# -- printing ---------------------------------------------------------------


def print_term(t: Term) -> str:
    parts: list = []
    _pt(t, parts)
    return "".join(parts)


def _pt(t: Term, out: list):
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, str):
            out.append(u)
        elif isinstance(u, (JustVar, JustConst)):
            out.append(u.name)
        elif isinstance(u, App):
            stack.extend([")", u.right, " . ", u.left, "("])
        elif isinstance(u, Sum):
            stack.extend([")", u.right, " + ", u.left, "("])
        elif isinstance(u, Bang):
            stack.extend([u.body, "!"])
        elif isinstance(u, Query):
            stack.extend([u.body, "?"])
        elif isinstance(u, Bar):
            stack.extend([")", u.body, "b("])
        elif isinstance(u, GenTerm):
            stack.extend([")", u.body, f"gen[{u.var.name}]("])
        else:
            raise TypeError(f"not a term: {u!r}")


_BINOP = {And: "&", Or: "|", Implies: "->", Iff: "<->"}


def print_varset(xs) -> str:
    return "{" + ",".join(sorted(v.name for v in xs)) + "}"


def print_formula(f: Formula) -> str:
    out: list = []
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, str):
            out.append(g)
        elif isinstance(g, Atom):
            out.append(f"{g.pred}({','.join(a.name for a in g.args)})")
        elif isinstance(g, Bottom):
            out.append("false")
        elif isinstance(g, Not):
            stack.extend([g.body, "~"])
        elif type(g) in _BINOP:
            stack.extend([")", g.right, f" {_BINOP[type(g)]} ", g.left, "("])
        elif isinstance(g, Forall):
            stack.extend([g.body, f"forall {g.var.name}. "])
        elif isinstance(g, Exists):
            stack.extend([g.body, f"exists {g.var.name}. "])
        elif isinstance(g, Just):
            stack.extend([g.body, f"]{print_varset(g.xs)} ", print_term(g.term), "["])
        else:
            raise TypeError(f"not a formula: {g!r}")
    return "".join(out)


# -- constant specification files -------------------------------------------


def parse_cs(text: str, source: str | None = None):
    """Explicit constant specification: lines ``<const> : <formula>``."""
    from .axioms import ConstantSpecification

    entries = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if ":" not in line:
            raise ParseError("expected '<const> : <formula>'", SourceSpan(ln, 1, len(raw)), {"':'"})
        name, rest = line.split(":", 1)
        name = name.strip()
        if not re.match(r"[A-Za-z_][A-Za-z0-9_]*$", name):
            raise ParseError(f"bad constant name {name!r}", SourceSpan(ln, 1, max(1, len(name))))
        col = line.index(":") + 2
        entries.append((name, parse_formula(rest, line=ln, col0=col)))
    return ConstantSpecification.explicit(entries, source=source)


def print_cs(cs) -> str:
    return "".join(f"{c} : {print_formula(f)}\n" for c, f in cs.entries)


# -- derivation files -------------------------------------------------------

_STEP = re.compile(r"\s*(\d+)\.\s")
_HYP = re.compile(r"\s*hyp\s+(\d+)\s*:")


def parse_derivation(text: str, base_dir: str | None = None, cs=None):
    """Parse a derivation file.  ``cs`` overrides the header's constant specification."""
    from .axioms import ConstantSpecification
    from .kernel import Derivation, Step

    logic = None
    cs_spec = cs
    hyps: dict = {}
    steps: list = []
    seen: set = set()
    last = 0
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        words = line.split()
        span = SourceSpan(ln, 1, len(raw))
        if words[0] == "logic":
            if len(words) != 2 or words[1] not in ("FOLPb", "FOJT45"):
                raise ParseError("bad logic line", span, {"FOLPb", "FOJT45"})
            logic = words[1]
            continue
        if words[0] == "cs":
            if cs is not None:
                continue
            if len(words) == 2 and words[1] == "schematic":
                cs_spec = ConstantSpecification.schematic()
            elif len(words) == 3 and words[1] == "explicit":
                path = words[2]
                if base_dir and not os.path.isabs(path):
                    path = os.path.join(base_dir, path)
                try:
                    with open(path) as fh:
                        cs_spec = parse_cs(fh.read(), source=words[2])
                except OSError as e:
                    raise ParseError(f"cannot read constant specification: {e}", span) from e
            else:
                raise ParseError("bad cs line", span, {"schematic", "explicit <path>"})
            continue
        m = _HYP.match(line)
        if m:
            k = int(m.group(1))
            if k in hyps:
                raise DuplicateIndexError(f"duplicate hypothesis {k}", span)
            hyps[k] = parse_formula(line[m.end():], logic, ln, m.end() + 1)
            continue
        m = _STEP.match(line)
        if not m:
            raise ParseError("expected a header or a numbered step", span, {"logic", "cs", "hyp", "<n>."})
        n = int(m.group(1))
        if n in seen:
            raise DuplicateIndexError(f"duplicate step index {n}", SourceSpan(ln, m.start(1) + 1, len(m.group(1))))
        if n <= last:
            raise ParseError(f"step index {n} is not increasing", SourceSpan(ln, m.start(1) + 1, len(m.group(1))))
        seen.add(n)
        last = n
        if ";" not in line:
            raise ParseError("missing ';' before the rule", SourceSpan(ln, len(line), 1), {"';'"})
        semi = line.rindex(";")
        formula = parse_formula(line[m.end():semi], logic, ln, m.end() + 1)
        rule = _parse_rule(line[semi + 1:], ln, semi + 2)
        steps.append(Step(n, formula, rule))
    if logic is None:
        raise ParseError("missing 'logic' header", SourceSpan(1, 1, 0), {"logic"})
    if cs_spec is None:
        raise ParseError("missing 'cs' header", SourceSpan(1, 1, 0), {"cs"})
    if hyps and sorted(hyps) != list(range(1, len(hyps) + 1)):
        raise ParseError("hypotheses must be numbered 1..k", SourceSpan(1, 1, 0))
    return Derivation(logic, cs_spec, tuple(hyps[k] for k in sorted(hyps)), tuple(steps))


def _parse_rule(text: str, ln: int, col: int):
    from .kernel import Ax, Cs, Gen, Hyp, Mp, Taut

    words = text.replace(",", " ").split()
    span = SourceSpan(ln, col, len(text))
    rules = {"AX", "CS", "HYP", "MP", "GEN", "TAUT"}
    if not words or words[0] not in rules:
        raise ParseError("unknown rule", span, rules)
    name, args = words[0], words[1:]
    try:
        if name == "AX" and len(args) == 1:
            return Ax(args[0])
        if name == "CS" and len(args) == 1:
            return Cs(args[0])
        if name == "HYP" and len(args) == 1:
            return Hyp(int(args[0]))
        if name == "MP" and len(args) == 2:
            return Mp(int(args[0]), int(args[1]))
        if name == "GEN" and len(args) == 2:
            v = Var(args[1])
            if not _BASIC.match(args[1]):
                raise ParseError("GEN needs a basic variable", span, {"basic variable"})
            return Gen(int(args[0]), v)
        if name == "TAUT":
            return Taut(tuple(int(a) for a in args))
    except ValueError as e:
        if isinstance(e, ParseError):
            raise
        raise ParseError(f"bad arguments for {name}", span) from e
    raise ParseError(f"wrong number of arguments for {name}", span)


def print_rule(rule) -> str:
    from .kernel import Ax, Cs, Gen, Hyp, Mp, Taut

    if isinstance(rule, Ax):
        return f"AX {rule.schema}"
    if isinstance(rule, Cs):
        return f"CS {rule.const}"
    if isinstance(rule, Hyp):
        return f"HYP {rule.k}"
    if isinstance(rule, Mp):
        return f"MP {rule.i} {rule.j}"
    if isinstance(rule, Gen):
        return f"GEN {rule.i} {rule.var.name}"
    if isinstance(rule, Taut):
        return "TAUT " + ",".join(str(i) for i in rule.premises)
    raise TypeError(rule)


def print_derivation(d, cs_path: str | None = None, comments: dict | None = None) -> str:
    """Render a derivation file.  ``comments`` maps a step index to a note line."""
    lines = [f"logic {d.logic}"]
    if d.cs.mode == "schematic":
        lines.append("cs schematic")
    else:
        lines.append(f"cs explicit {cs_path or d.cs.source or 'cs.txt'}")
    for k, h in enumerate(d.hypotheses, 1):
        lines.append(f"hyp {k}: {print_formula(h)}")
    comments = dict(comments or {})
    for idx, label in getattr(d, "marks", ()):
        comments.setdefault(idx, label)
    for s in d.steps:
        if s.index in comments:
            lines.append(f"# {comments[s.index]}")
        lines.append(f"{s.index}. {print_formula(s.formula)} ; {print_rule(s.rule)}")
    return "\n".join(lines) + "\n"


# -- model files ------------------------------------------------------------

SECTIONS = ("LOGIC", "WORLDS", "REL", "DOMAIN", "INTERP", "EVIDENCE", "CS")
_HEADER = re.compile(r"([A-Z][A-Z0-9_]{2,})\b")
_INTERP = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*@\s*(\S+)\s*:\s*\((.*)\)\s*$")


def parse_model(text: str, base_dir: str | None = None):
    from .axioms import ConstantSpecification
    from .semantics import EvidenceSpec, FittingModel

    logic = None
    worlds: list = []
    rel: set = set()
    domain: list = []
    interp: dict = {}
    arity: dict = {}
    mode = None
    entries: list = []
    cs = ConstantSpecification.schematic()
    section = None
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        span = SourceSpan(ln, 1, len(raw))
        m = _HEADER.match(line)
        if m and "|" not in line and ":" not in line:
            name = m.group(1)
            if name not in SECTIONS:
                raise UnknownSectionError(f"unknown section {name}", SourceSpan(ln, 1, len(name)), SECTIONS)
            section = name
            rest = line[m.end():].split()
            if name == "LOGIC":
                if len(rest) != 1 or rest[0] not in ("FOLPb", "FOJT45"):
                    raise ParseError("bad LOGIC line", span, {"FOLPb", "FOJT45"})
                logic = rest[0]
            elif name == "WORLDS":
                for w in rest:
                    if w in worlds:
                        raise DuplicateIndexError(f"duplicate world {w}", span)
                    worlds.append(w)
            elif name == "DOMAIN":
                for d in rest:
                    if not d.startswith("@"):
                        raise ParseError(f"domain members are witness names, got {d!r}", span, {"@name"})
                    if d in domain:
                        raise DuplicateIndexError(f"duplicate domain member {d}", span)
                    domain.append(d)
            elif name == "EVIDENCE":
                if len(rest) != 1 or rest[0] not in ("mode=full", "mode=closure", "mode=table"):
                    raise ParseError("bad EVIDENCE line", span, {"mode=full", "mode=closure", "mode=table"})
                mode = rest[0].split("=")[1]
            elif name == "CS":
                if rest == ["schematic"]:
                    cs = ConstantSpecification.schematic()
                elif len(rest) == 2 and rest[0] == "explicit":
                    path = rest[1] if not base_dir else os.path.join(base_dir, rest[1])
                    with open(path) as fh:
                        cs = parse_cs(fh.read(), source=rest[1])
                else:
                    raise ParseError("bad CS line", span, {"schematic", "explicit <path>"})
            elif rest:
                raise ParseError(f"unexpected text after {name}", span)
            continue
        if section == "WORLDS":
            for w in line.split():
                if w in worlds:
                    raise DuplicateIndexError(f"duplicate world {w}", span)
                worlds.append(w)
        elif section == "DOMAIN":
            for d in line.split():
                if not d.startswith("@"):
                    raise ParseError(f"domain members are witness names, got {d!r}", span, {"@name"})
                domain.append(d)
        elif section == "REL":
            ws = line.split()
            if len(ws) != 2:
                raise ParseError("REL lines are pairs 'w v'", span)
            for w in ws:
                if w not in worlds:
                    raise ParseError(f"unknown world {w}", span, set(worlds))
            rel.add((ws[0], ws[1]))
        elif section == "INTERP":
            mi = _INTERP.match(line)
            if not mi:
                raise ParseError("expected 'P @ w : (d1,...,dn)'", span)
            pred, w, args = mi.group(1), mi.group(2), mi.group(3)
            if w not in worlds:
                raise ParseError(f"unknown world {w}", span, set(worlds))
            tup = tuple(a.strip() for a in args.split(",") if a.strip())
            for a in tup:
                if a not in domain:
                    raise ParseError(f"{a} is not in the domain", span, set(domain))
            if arity.setdefault(pred, len(tup)) != len(tup):
                raise ParseError(f"predicate {pred} used with two arities", span)
            interp.setdefault((pred, w), set()).add(tup)
        elif section == "EVIDENCE":
            parts = line.split("|")
            if len(parts) != 3:
                raise ParseError("evidence entries are 't | formula | w1 w2 ...'", span, {"'|'"})
            term = parse_term(parts[0].strip(), logic)
            col = len(parts[0]) + 2
            formula = parse_formula(parts[1], logic, ln, col)
            ws = parts[2].split()
            for w in ws:
                if w not in worlds:
                    raise ParseError(f"unknown world {w}", span, set(worlds))
            entries.append((term, formula, frozenset(ws)))
        else:
            raise ParseError("content outside of a section", span, SECTIONS)
    if logic is None:
        raise ParseError("missing LOGIC section", SourceSpan(1, 1, 0), {"LOGIC"})
    if not worlds:
        raise ParseError("missing WORLDS section", SourceSpan(1, 1, 0), {"WORLDS"})
    if not domain:
        raise ParseError("missing DOMAIN section", SourceSpan(1, 1, 0), {"DOMAIN"})
    mode = mode or "full"
    if mode == "full":
        ev = EvidenceSpec.full()
    elif mode == "closure":
        base = set()
        for t, f, ws in entries:
            for w in ws:
                base.add((t, f, w))
        ev = EvidenceSpec.closure(base)
    else:
        ev = EvidenceSpec.table(entries)
    return FittingModel(
        logic=logic,
        worlds=tuple(worlds),
        rel=frozenset(rel),
        domain=tuple(domain),
        interp={k: frozenset(v) for k, v in interp.items()},
        evidence=ev,
        cs=cs,
    )


def print_model(m) -> str:
    lines = [f"LOGIC {m.logic}", "WORLDS " + " ".join(m.worlds), "REL"]
    lines += [f"{w} {v}" for w, v in sorted(m.rel)]
    lines.append("DOMAIN " + " ".join(m.domain))
    lines.append("INTERP")
    for (pred, w), tups in sorted(m.interp.items()):
        for tup in sorted(tups):
            lines.append(f"{pred} @ {w} : ({','.join(tup)})")
    ev = m.evidence
    lines.append(f"EVIDENCE mode={ev.mode}")
    if ev.mode == "table":
        for t, f, ws in ev.entries:
            lines.append(f"{print_term(t)} | {print_formula(f)} | {' '.join(sorted(ws))}")
    elif ev.mode == "closure":
        grouped: dict = {}
        for t, f, w in ev.base:
            grouped.setdefault((print_term(t), print_formula(f)), set()).add(w)
        for (t, f), ws in sorted(grouped.items()):
            lines.append(f"{t} | {f} | {' '.join(sorted(ws))}")
    if m.cs.mode == "explicit":
        lines.append(f"CS explicit {m.cs.source or 'cs.txt'}")
    return "\n".join(lines) + "\n"
