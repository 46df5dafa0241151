"""Batch command line: check, transform, synthesize, evaluate and fuzz.

Every report is one ``key=value`` record per line.  Exit status 0 means
success or pass, 1 a rejection or violation, 2 a usage or parse error.
"""

from __future__ import annotations

import argparse
import os
import sys
import time

from . import harness, semantics, templates, transform
from .kernel import check
from .syntax import Var
from .textio import (
    ParseError, parse_derivation, parse_formula, parse_model, parse_term, parse_varset,
    print_derivation, print_formula, print_term,
)

OK, FAIL, USAGE = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error={message}", file=sys.stderr)
        raise SystemExit(USAGE)


def _read(path: str) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _load_derivation(path: str):
    return parse_derivation(_read(path), base_dir=os.path.dirname(os.path.abspath(path)))


def _write(d, out: str | None, cs_path: str | None = None):
    text = print_derivation(d, cs_path=cs_path)
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _emit(**kv):
    print(" ".join(f"{k}={v}" for k, v in kv.items()))


# -- subcommands -----------------------------------------------------------------


def cmd_check(a) -> int:
    d = _load_derivation(a.file)
    rep = check(d, no_taut=a.no_taut)
    if rep.accepted:
        _emit(verdict="accepted", steps=rep.steps,
              rules=",".join(f"{k}:{v}" for k, v in sorted(rep.rules.items())))
        return OK
    _emit(verdict="rejected", step=rep.step, reason=rep.reason)
    print(f"message={rep.message}")
    return FAIL


def cmd_internalize(a) -> int:
    d = _load_derivation(a.file)
    t, d2 = transform.internalize(d)
    _write(d2, a.output)
    _emit(term=print_term(t), steps=len(d2.steps))
    return OK


def cmd_deduce(a) -> int:
    d = _load_derivation(a.file)
    d2 = transform.deduction(d, a.hyp)
    _write(d2, a.output)
    _emit(conclusion=print_formula(d2.conclusion), steps=len(d2.steps))
    return OK


_SYNTH = {
    "cbarcan": transform.converse_barcan,
    "cburidan": transform.converse_buridan,
    "jt45barcan": transform.jt45_barcan,
}


def cmd_derive(a) -> int:
    logic = a.logic or ("FOJT45" if a.which == "jt45barcan" else "FOLPb")
    t = parse_term(a.term, logic)
    X = parse_varset(a.subscript)
    phi = parse_formula(a.formula, logic)
    s, d = _SYNTH[a.which](t, X, Var(a.var), phi, logic, use_taut=not a.no_taut)
    rep = check(d)
    if not rep.accepted:
        _emit(verdict="rejected", step=rep.step, reason=rep.reason)
        return FAIL
    _write(d, a.output)
    _emit(term=print_term(s), steps=len(d.steps), marks=len(d.marks))
    return OK


def cmd_model_eval(a) -> int:
    m = parse_model(_read(a.model), base_dir=os.path.dirname(os.path.abspath(a.model)))
    f = parse_formula(a.formula, m.logic)
    value = semantics.eval_formula(m, a.world, f)
    _emit(world=a.world, value=str(value).lower())
    return OK


def cmd_model_audit(a) -> int:
    m = parse_model(_read(a.model), base_dir=os.path.dirname(os.path.abspath(a.model)))
    rep = semantics.audit(m)
    print(rep)
    return OK if rep.passed else FAIL


def _phis(a, logic):
    return [parse_formula(p, logic) for p in (a.phi or [])]


def cmd_template(a) -> int:
    logic = a.logic
    F = templates.parse_template(a.template)
    phis = _phis(a, logic)
    if a.which == "member":
        ok = templates.member(F, phis, parse_formula(a.formula, logic))
        _emit(member=str(ok).lower())
        return OK if ok else FAIL
    if a.which == "combine":
        members = [parse_formula(p, logic) for p in a.member]
        theta, d = templates.combine(F, phis, members, logic)
    elif a.which == "semi":
        imp = _load_derivation(a.imp)
        theta, d = templates.semi_replacement(F, imp, phis, parse_formula(a.formula, logic), logic)
    elif a.which == "vacuous":
        theta, d = templates.vacuous_quantification(F, phis, parse_formula(a.formula, logic),
                                                    Var(a.var), logic)
    else:
        theta, d = templates.generalized_barcan(F, Var(a.var), parse_formula(a.phi_y, logic), phis,
                                                parse_formula(a.formula, logic), logic)
    rep = check(d)
    if not rep.accepted:
        _emit(verdict="rejected", step=rep.step, reason=rep.reason)
        return FAIL
    if a.output:
        _write(d, a.output)
    _emit(theta=print_formula(theta), steps=len(d.steps))
    return OK


def cmd_fuzz(a) -> int:
    cfg = harness.GenConfig(seed=a.seed, logic=a.logic, trials=a.trials, fault=a.fault,
                            max_worlds=a.max_worlds, max_domain=a.max_domain)
    t0 = time.perf_counter()
    rep = harness.run_soundness(cfg)
    print(rep)
    if a.replay and rep.violations:
        with open(a.replay, "w", encoding="utf-8") as fh:
            fh.write(rep.violations[0].replay())
    _emit(verdict="pass" if rep.passed else "violation", elapsed=f"{time.perf_counter() - t0:.1f}s")
    return OK if rep.passed else FAIL


# -- grammar ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="jlogic", description="Justification logic proof checker and model toolkit.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="check a derivation file")
    c.add_argument("file")
    c.add_argument("--no-taut", action="store_true", help="reject TAUT steps")
    c.set_defaults(run=cmd_check)

    c = sub.add_parser("internalize", help="internalize a derivation")
    c.add_argument("file")
    c.add_argument("-o", "--output")
    c.set_defaults(run=cmd_internalize)

    c = sub.add_parser("deduce", help="discharge one hypothesis")
    c.add_argument("file")
    c.add_argument("--hyp", type=int, required=True)
    c.add_argument("-o", "--output")
    c.set_defaults(run=cmd_deduce)

    c = sub.add_parser("derive", help="synthesize a Barcan-family derivation")
    c.add_argument("which", choices=sorted(_SYNTH))
    c.add_argument("--term", required=True)
    c.add_argument("--subscript", default="{}")
    c.add_argument("--var", required=True)
    c.add_argument("--formula", required=True)
    c.add_argument("--logic", choices=("FOLPb", "FOJT45"))
    c.add_argument("--no-taut", action="store_true", help="emit Hilbert steps instead of TAUT")
    c.add_argument("-o", "--output")
    c.set_defaults(run=cmd_derive)

    c = sub.add_parser("model", help="evaluate or audit a model file")
    msub = c.add_subparsers(dest="mcmd", required=True, parser_class=_Parser)
    e = msub.add_parser("eval")
    e.add_argument("model")
    e.add_argument("--world", required=True)
    e.add_argument("--formula", required=True)
    e.set_defaults(run=cmd_model_eval)
    e = msub.add_parser("audit")
    e.add_argument("model")
    e.set_defaults(run=cmd_model_audit)

    c = sub.add_parser("template", help="template membership and transformers")
    c.add_argument("which", choices=("member", "combine", "semi", "vacuous", "genbarcan"))
    c.add_argument("--template", required=True)
    c.add_argument("--phi", action="append", help="letter instance, in letter order (repeatable)")
    c.add_argument("--formula", help="the member to test or transform")
    c.add_argument("--member", action="append", default=[], help="member to combine (repeatable)")
    c.add_argument("--imp", help="derivation file of chi -> psi (semi)")
    c.add_argument("--var", help="quantified variable (vacuous, genbarcan)")
    c.add_argument("--phi-y", help="formula phi(y) for the last letter (genbarcan)")
    c.add_argument("--logic", default="FOLPb", choices=("FOLPb", "FOJT45"))
    c.add_argument("-o", "--output")
    c.set_defaults(run=cmd_template)

    c = sub.add_parser("fuzz", help="randomized soundness check")
    fsub = c.add_subparsers(dest="fcmd", required=True, parser_class=_Parser)
    e = fsub.add_parser("soundness")
    e.add_argument("--seed", type=int, default=42)
    e.add_argument("--trials", type=int, default=500)
    e.add_argument("--logic", default="FOLPb", choices=("FOLPb", "FOJT45"))
    e.add_argument("--max-worlds", type=int, default=4)
    e.add_argument("--max-domain", type=int, default=3)
    e.add_argument("--fault", choices=harness.FAULTS, help="inject a deliberate fault (harness self-test)")
    e.add_argument("--replay", help="write the first counterexample here")
    e.set_defaults(run=cmd_fuzz)
    return p


_NEEDS = {
    ("template", "member"): ("formula",),
    ("template", "combine"): ("member",),
    ("template", "semi"): ("imp", "formula"),
    ("template", "vacuous"): ("formula", "var"),
    ("template", "genbarcan"): ("formula", "var", "phi_y"),
}


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    for flag in _NEEDS.get((a.cmd, getattr(a, "which", None)), ()):
        if not getattr(a, flag):
            parser.print_usage(sys.stderr)
            print(f"error=missing --{flag.replace('_', '-')} for template {a.which}", file=sys.stderr)
            return USAGE
    try:
        return a.run(a)
    except (ParseError, OSError) as e:
        print(f"error={type(e).__name__} message={e}", file=sys.stderr)
        return USAGE
    except (transform.TransformError, templates.TemplateError, semantics.SemanticsError,
            ValueError) as e:
        _emit(verdict="rejected", error=type(e).__name__)
        print(f"message={e}")
        return FAIL


if __name__ == "__main__":
    sys.exit(main())
