import json
import subprocess
import sys

import pytest

from fpblast import pipeline
from fpblast.cli import demo_fig1, main
from fpblast.difftest import run_difftest, select_cases
from fpblast.features import FEATURES, features_json
from fpblast.formats import FP8, FP16

from conftest import Z3, requires_z3


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_check_nan_eq_is_unsat(capsys, fixtures):
    code, out, _ = run_cli(capsys, "check", str(fixtures / "nan_eq.fps"))
    assert code == 20
    assert out.splitlines()[0] == "unsat"


def test_check_negative_is_sat_with_negative_model(capsys, fixtures):
    code, out, _ = run_cli(capsys, "check", str(fixtures / "negative.fps"))
    assert code == 10
    lines = out.splitlines()
    assert lines[0] == "sat"
    name, fmt, bits, hexa, dec = lines[1].split()
    assert (name, fmt) == ("x", "fp8")
    assert bits.startswith("#b1") and len(bits) == 10
    assert dec.startswith("-") and dec != "-0"


def test_check_closed_fig1_query(capsys, fixtures):
    code, out, _ = run_cli(capsys, "check", str(fixtures / "fig1.fps"))
    assert code == 20 and out.startswith("unsat")


def test_check_fig1_over_variables_needs_a_solver(capsys, fixtures):
    code, out, _ = run_cli(capsys, "check", str(fixtures / "fig1_vars.fps"))
    assert code == 0
    assert out.startswith("unknown") and "budget" in out


@requires_z3
@pytest.mark.parametrize("engine", ["smt:{}", "sat:{} -dimacs"])
def test_check_fig1_with_external_solver(capsys, fixtures, engine):
    code, out, _ = run_cli(capsys, "check", str(fixtures / "fig1_vars.fps"),
                           "--engine", engine.format(Z3))
    assert code == 20, out


@requires_z3
def test_exit_codes_stable_across_engines(capsys, fixtures):
    for name, want in (("nan_eq.fps", 20), ("negative.fps", 10)):
        for engine in ("brute", "smt:" + Z3, "sat:%s -dimacs" % Z3):
            assert run_cli(capsys, "check", str(fixtures / name), "--engine", engine)[0] == want


def test_check_prints_evals_and_bv_models(capsys, tmp_path):
    script = tmp_path / "s.fps"
    script.write_text('(declare-bv v 4)\n(assert (= v #x9))\n'
                      '(eval (fp.add RNE (fp fp8 "1") (fp fp8 "2")))\n(check)\n')
    code, out, _ = run_cli(capsys, "check", str(script))
    assert code == 10
    assert out.splitlines() == ["eval 1: #b01000100 #x44 3", "sat",
                                "v (_ BitVec 4) #b1001 #x9 9"]


def test_check_errors(capsys, tmp_path):
    bad = tmp_path / "bad.fps"
    bad.write_text("(declare-fp x 4 3)\n(assert (fp.rem x x))\n(check)\n")
    code, _, err = run_cli(capsys, "check", str(bad))
    assert code == 1 and "unsupported operator fp.rem" in err and "2:" in err
    code, _, err = run_cli(capsys, "check", str(tmp_path / "missing.fps"))
    assert code == 1 and "missing.fps" in err
    nocheck = tmp_path / "nocheck.fps"
    nocheck.write_text("(declare-fp x 4 3)\n")
    assert run_cli(capsys, "check", str(nocheck))[0] == 1


def test_check_unknown_engine_is_an_error(capsys, fixtures):
    code, _, err = run_cli(capsys, "check", str(fixtures / "nan_eq.fps"), "--engine", "cvc")
    assert code == 1 and "unknown engine" in err


@pytest.mark.parametrize("target,golden", [("smtlib", "nan_eq.smt2"), ("dimacs", "nan_eq.cnf")])
def test_blast_golden(capsys, fixtures, tmp_path, target, golden):
    out_path = tmp_path / golden
    code, out, _ = run_cli(capsys, "blast", str(fixtures / "nan_eq.fps"), "--to", target,
                           "-o", str(out_path))
    assert code == 0
    assert out_path.read_text() == (fixtures / golden).read_text()
    assert "nodes" in out and "free bits 8" in out


def test_blast_reports_unwritable_path(capsys, fixtures, tmp_path):
    target = tmp_path / "no" / "such" / "dir.smt2"
    code, _, err = run_cli(capsys, "blast", str(fixtures / "nan_eq.fps"), "--to", "smtlib",
                           "-o", str(target))
    assert code == 1 and str(target) in err


def test_demo_matches_golden(capsys, fixtures):
    code, out, _ = run_cli(capsys, "demo-fig1")
    assert code == 0
    assert out == (fixtures / "demo_fig1.txt").read_text()
    assert demo_fig1() == out


def test_features_json_matches_fixture(capsys, fixtures):
    code, out, _ = run_cli(capsys, "features", "--json")
    assert code == 0
    assert json.loads(out) == json.loads((fixtures / "features.json").read_text())
    rows = {r["feature"]: r["supported"] for r in json.loads(out)["features"]}
    assert rows["Remainder operator"] is False
    assert rows["Fused multiply-add operator"] is True
    assert rows["Convert to FP from real"] is False
    assert [k for k, v in rows.items() if not v] == [
        "Remainder operator", "Minimum operator", "Maximum operator",
        "Convert to FP from real", "Convert to real from FP"]


def test_features_table(capsys):
    code, out, _ = run_cli(capsys, "features")
    assert code == 0 and len(out.splitlines()) == len(FEATURES) + 1


def test_difftest_small_run(capsys):
    code, out, _ = run_cli(capsys, "difftest", "--format", "4,3", "--ops", "abs,neg,classify",
                           "--modes", "RNE")
    assert code == 0
    assert "total: 2304 cases, 0 mismatches" in out


def test_difftest_requires_samples_for_wide_formats(capsys):
    code, _, err = run_cli(capsys, "difftest", "--format", "fp32", "--ops", "add")
    assert code == 2 and "--samples" in err
    code, _, err = run_cli(capsys, "difftest", "--format", "fp8", "--ops", "rem")
    assert code == 2 and "unknown op" in err


def test_difftest_sampled_fp16(capsys):
    code, out, _ = run_cli(capsys, "difftest", "--format", "fp16", "--ops", "add",
                           "--modes", "RNE", "--samples", "2000", "--seed", "42")
    assert code == 0 and "total: 2000 cases, 0 mismatches" in out


def test_mutation_is_caught(monkeypatch, capsys):
    monkeypatch.setattr(pipeline, "_flip_rne_tie", True)
    report = run_difftest(FP8, ["add"], ["RNE"])
    assert report.mismatches > 0
    assert len(report.counterexamples) == 10
    code, out, _ = run_cli(capsys, "difftest", "--format", "fp8", "--ops", "add",
                           "--modes", "RNE")
    assert code == 1
    assert "first 10 counterexamples" in out and "mode=RNE" in out


def test_select_cases():
    names = {c.name for c in select_cases(FP8, ["binary"])}
    assert names == {"add", "sub", "mul", "div"}
    assert [c.name for c in select_cases(FP8, ["to_fp", "from_fp"])] == ["to_fp16", "from_fp16"]
    assert [c.name for c in select_cases(FP16, ["to_fp", "from_fp"])] == ["to_fp8", "from_fp8"]


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "fpblast", "features", "--json"],
                         capture_output=True, text=True, check=True)
    assert out.stdout == features_json()
