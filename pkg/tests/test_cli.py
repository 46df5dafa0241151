import os
import subprocess
import sys

import pytest

from jlogic.cli import main

from conftest import CORPUS, ROOT, corpus_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_golden(capsys):
    code, out, _ = run(capsys, "check", corpus_path("converse_barcan.jd"))
    assert code == 0 and out.startswith("verdict=accepted steps=13")


def test_check_mutant(capsys):
    code, out, _ = run(capsys, "check", corpus_path("mutants", "converse_barcan_m01.jd"))
    assert code == 1
    assert "verdict=rejected step=" in out and "reason=" in out


def test_check_no_taut(capsys):
    code, out, _ = run(capsys, "check", "--no-taut", corpus_path("converse_barcan.jd"))
    assert code == 1 and "reason=TautDisabled" in out


def test_parse_error_exit_2(tmp_path, capsys):
    p = tmp_path / "bad.jd"
    p.write_text("logic FOLPb\ncs schematic\n1. P( ; AX A1.K\n")
    code, _, err = run(capsys, "check", str(p))
    assert code == 2 and "ParseError" in err


def test_usage_error_names_flag(capsys):
    with pytest.raises(SystemExit) as e:
        main(["derive", "cbarcan", "--term", "p0"])
    assert e.value.code == 2
    err = capsys.readouterr().err
    assert "usage:" in err and "--var" in err


def test_template_missing_flag(capsys):
    code, _, err = run(capsys, "template", "member", "--template", "p1", "--phi", "P()")
    assert code == 2 and "--formula" in err


def test_derive_and_internalize(tmp_path, capsys):
    out = tmp_path / "cb.jd"
    code, text, _ = run(capsys, "derive", "cbarcan", "--term", "p0", "--subscript", "{x}", "--var", "y",
                        "--formula", "R(x,y)", "-o", str(out))
    assert code == 0 and "term=(c_UI . p0)" in text and "marks=9" in text
    code, _, _ = run(capsys, "check", str(out))
    assert code == 0
    code, text, _ = run(capsys, "internalize", str(out), "-o", str(tmp_path / "i.jd"))
    assert code == 0 and text.startswith("term=")


def test_deduce(tmp_path, capsys):
    src = tmp_path / "h.jd"
    src.write_text("logic FOLPb\ncs schematic\nhyp 1: P()\nhyp 2: (P() -> Q())\n"
                   "1. P() ; HYP 1\n2. (P() -> Q()) ; HYP 2\n3. Q() ; MP 1 2\n")
    code, text, _ = run(capsys, "deduce", str(src), "--hyp", "1", "-o", str(tmp_path / "o.jd"))
    assert code == 0 and "conclusion=(P() -> Q())" in text
    code, text, _ = run(capsys, "deduce", str(src), "--hyp", "5")
    assert code == 1 and "HypNotFound" in text


def test_model_commands(tmp_path, capsys):
    p = tmp_path / "m.txt"
    p.write_text("LOGIC FOLPb\nWORLDS w v\nREL\nw w\nv v\nw v\nDOMAIN @a\nINTERP\nP @ w : (@a)\n"
                 "EVIDENCE mode=full\n")
    code, text, _ = run(capsys, "model", "eval", str(p), "--world", "w", "--formula", "[t]{} P(@a)")
    assert code == 0 and text.strip() == "world=w value=false"
    code, text, _ = run(capsys, "model", "eval", str(p), "--world", "v", "--formula", "P(@a) -> P(@a)")
    assert text.strip() == "world=v value=true"
    code, text, _ = run(capsys, "model", "audit", str(p))
    assert code == 0 and "audit=pass" in text


def test_template_commands(capsys):
    code, text, _ = run(capsys, "template", "member", "--template", "box p1", "--phi", "P(@a)",
                        "--formula", "[p0]{@a} P(@a)")
    assert code == 0 and text.strip() == "member=true"
    code, text, _ = run(capsys, "template", "member", "--template", "box p1", "--phi", "P(@a)",
                        "--formula", "[p0]{} P(@a)")
    assert code == 1
    code, text, _ = run(capsys, "template", "combine", "--template", "box p1", "--phi", "P(@a)",
                        "--member", "[p0]{@a} P(@a)", "--member", "[p1]{@a} P(@a)")
    assert code == 0 and text.startswith("theta=")
    code, text, _ = run(capsys, "template", "vacuous", "--template", "p1", "--phi", "A()",
                        "--formula", "A()", "--var", "y")
    assert code == 0 and "theta=A()" in text
    code, text, _ = run(capsys, "template", "genbarcan", "--template", "box p1", "--phi-y", "P(y)",
                        "--formula", "[p0]{} P(y)", "--var", "y")
    assert code == 0 and "forall y. P(y)" in text


def test_semi_template(tmp_path, capsys):
    imp = tmp_path / "imp.jd"
    imp.write_text("logic FOLPb\ncs schematic\n1. ((C() & D()) -> C()) ; AX A1.AND1\n")
    code, text, _ = run(capsys, "template", "semi", "--template", "box p1", "--imp", str(imp),
                        "--formula", "[p0]{} (C() & D())")
    assert code == 0 and "C()" in text


def test_fuzz_short(capsys, tmp_path):
    code, text, _ = run(capsys, "fuzz", "soundness", "--seed", "42", "--trials", "50", "--logic", "FOLPb")
    assert code == 0 and "violations=0" in text and "verdict=pass" in text
    replay = tmp_path / "cx.txt"
    code, text, _ = run(capsys, "fuzz", "soundness", "--trials", "80", "--fault", "skip_reflexivity",
                        "--replay", str(replay))
    assert code == 1 and replay.exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "jlogic", "check", os.path.join(CORPUS, "jt45_barcan.jd")],
                          cwd=ROOT, capture_output=True, text=True)
    assert proc.returncode == 0 and "verdict=accepted" in proc.stdout
