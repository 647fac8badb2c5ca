import json
import subprocess
import sys

import pytest

from adev.cli import main
from adev.parser import parse_program
from adev.syntax import alpha_eq


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_check_ok(capsys):
    code, out, _ = run(capsys, "check", "two_branch_enum", "normal_threshold")
    assert code == 0 and out.count(": ok :") == 2


def test_check_rejects_unsmooth_program(capsys):
    code, out, _ = run(capsys, "check", "--json", "smoothness_reject")
    assert code == 2
    j = json.loads(out)
    assert j["ok"] is False and "y" in j["message"]


def test_check_file(tmp_path, capsys):
    f = tmp_path / "p.adev"
    f.write_text(r"\theta : R. E (return theta)")
    assert run(capsys, "check", str(f))[0] == 0


def test_parse_error_exit_code(tmp_path, capsys):
    f = tmp_path / "bad.adev"
    f.write_text(r"\theta : R. E (return")
    code, _, err = run(capsys, "check", str(f))
    assert code == 2 and "error" in err


def test_missing_file(capsys):
    assert run(capsys, "check", "no/such/file.adev")[0] == 2


def test_usage_error(capsys):
    assert run(capsys, "grad")[0] == 2
    assert run(capsys, "frobnicate", "x")[0] == 2


def test_translate_normalize_prints_derivative_program(capsys):
    code, out, _ = run(capsys, "translate", "--normalize", "two_branch_reinforce")
    assert code == 0
    assert "dlogpdf" in out
    parse_program(out, "d")  # a source-level program


def test_translate_raw_round_trips(capsys):
    from adev import corpus
    from adev.transform import ad_term
    from adev.typecheck import check_entry

    code, out, _ = run(capsys, "translate", "two_branch_reinforce")
    expected = ad_term(check_entry(corpus.load("two_branch_reinforce")).term)
    assert code == 0 and alpha_eq(parse_program(out, "t", target=True).term, expected)


def test_translate_normalize_falls_back(capsys):
    code, out, err = run(capsys, "translate", "--normalize", "normal_threshold")
    assert code == 0 and "note:" in err and "normal_reinforce_D" in out


def test_grad_json(capsys):
    code, out, _ = run(capsys, "grad", "--json", "--n", "2000", "two_branch_reinforce")
    j = json.loads(out)
    assert code == 0
    assert {"program", "theta", "n", "mean", "stderr", "oracle", "z", "pass", "provenance",
            "wall_time", "seed"} <= set(j)
    assert j["provenance"] == "enumeration" and j["n"] == 2000


def test_grad_needs_theta_outside_corpus(tmp_path, capsys):
    f = tmp_path / "p.adev"
    f.write_text(r"\theta : R. E (return theta)")
    assert run(capsys, "grad", str(f))[0] == 2
    code, out, _ = run(capsys, "grad", "--theta", "1", "--n", "10", "--json", str(f))
    assert code == 0 and json.loads(out)["mean"] == 1.0


def test_fresh_seed(capsys):
    code, out, _ = run(capsys, "grad", "--json", "--n", "10", "--fresh-seed", "two_branch_reinforce")
    assert code == 0 and isinstance(json.loads(out)["seed"], int)


def test_validate_json(capsys):
    code, out, _ = run(capsys, "validate", "--json", "--n", "1000", "--theta", "0.7",
                       "two_branch_reinforce")
    j = json.loads(out)
    assert code == 0 and j["pass"] is True and j["theta"] == 0.7


def test_validate_fails_on_wrong_oracle(monkeypatch, capsys):
    import adev.cli as cli

    monkeypatch.setattr(cli, "validate", _wrong_validate)
    code, out, _ = run(capsys, "validate", "--n", "100", "two_branch_enum")
    assert code == 1 and "FAIL" in out


def _wrong_validate(p, theta, n, seed=0, **kw):
    from adev.harness import mc_gradient

    return mc_gradient(p, theta, n, seed, oracle=1.0, provenance="analytic")


def test_optimize_csv(tmp_path, capsys):
    path = tmp_path / "trace.csv"
    code, out, _ = run(capsys, "optimize", "--theta", "0.2", "--steps", "100",
                       "--csv", str(path), "--json", "two_branch_reinforce")
    assert code == 0
    assert abs(json.loads(out)["final"] - 0.5) < 0.1
    assert len(path.read_text().splitlines()) == 102


def test_witness_pass_and_unavailable(capsys):
    code, out, _ = run(capsys, "witness", "--points", "10", "sample_linear")
    assert code == 0 and "PASS" in out and "∫h1" in out
    code, out, _ = run(capsys, "witness", "--points", "5", "exp_est")
    assert code == 2 and "unavailable" in out


def test_plus_est_config(capsys):
    code, out, _ = run(capsys, "grad", "--json", "--n", "20", "--plus-est", "both-arms",
                       "--theta", "0.5", "times_est")
    assert code == 0


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "adev.cli", "check", "two_branch_enum"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "ok" in r.stdout
