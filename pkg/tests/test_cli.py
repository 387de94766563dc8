"""End-to-end behavior of the command-line interface."""

import json
import math
import shutil
import subprocess

import pytest

from conftest import CONFIG_DIR
from sl2t.cli import main

S0 = str(CONFIG_DIR / "s0.json")
CASE1 = str(CONFIG_DIR / "case1.json")
INDEFINITE = str(CONFIG_DIR / "indefinite.json")


def _rows(text):
    return [ln for ln in text.splitlines() if ln and not ln.startswith("#")]


def _run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# solve


def test_solve_table(capsys):
    code, out, _ = _run(capsys, "solve", S0, "--n-max", "5")
    assert code == 0
    rows = _rows(out)
    assert len(rows) == 5
    first = rows[0].split(",")
    assert first[0] == "1"
    assert float(first[2]) == pytest.approx(0.538, abs=2e-3)
    lo, hi = float(first[3]), float(first[4])
    assert lo < float(first[1]) < hi
    header = [ln for ln in out.splitlines() if ln.startswith("#")]
    assert any("digest" in ln for ln in header)
    assert any("columns: n,lambda_n,mu_n,bracket_lo,bracket_hi,abs_delta" in ln for ln in header)


def test_solve_output_is_byte_identical(tmp_path, capsys):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["solve", S0, "--n-max", "4", "--out", str(a)]) == 0
    assert main(["solve", S0, "--n-max", "4", "--out", str(b)]) == 0
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()
    assert len(_rows(a.read_text())) == 4


def test_solve_out_keeps_stdout_clean(tmp_path, capsys):
    out_file = tmp_path / "t.csv"
    code, out, _ = _run(capsys, "solve", S0, "--n-max", "2", "--out", str(out_file))
    assert code == 0
    assert out == ""
    assert out_file.exists()


def test_solve_rejects_nonpositive_count(capsys):
    code, _, err = _run(capsys, "solve", S0, "--n-max", "0")
    assert code == 1
    assert "--n-max" in err


def test_solve_accepts_tolerance_override(capsys):
    code, out, _ = _run(capsys, "solve", S0, "--n-max", "1",
                        "--tol-override", "rk_tol=1e-10",
                        "--tol-override", "quad_nodes=65")
    assert code == 0
    assert float(_rows(out)[0].split(",")[2]) == pytest.approx(0.5384369932, abs=1e-6)


def test_bad_override_key_is_usage_error(capsys):
    code, _, err = _run(capsys, "solve", S0, "--n-max", "1", "--tol-override", "bogus=1")
    assert code == 1
    assert "tol-override" in err
    code, _, err = _run(capsys, "solve", S0, "--n-max", "1", "--tol-override", "rk_tol=abc")
    assert code == 1


# ---------------------------------------------------------------------------
# asym


def test_asym_table(capsys):
    code, out, _ = _run(capsys, "asym", S0, "--n-max", "3")
    assert code == 0
    rows = [r.split(",") for r in _rows(out)]
    assert [r[1] for r in rows] == ["CASE4"] * 3
    want = [math.pi / 2, math.pi, 1.5 * math.pi]
    for row, mu in zip(rows, want):
        assert float(row[2]) == pytest.approx(mu, abs=1e-14)


def test_asym_cases_two_and_three_coincide(tmp_path, capsys):
    base = json.loads((CONFIG_DIR / "s0.json").read_text())
    case2 = dict(base, alpha=0.0, beta=[-1.0, 0.0], beta_prime=[0.0, 1.0])
    case3 = dict(base, alpha=math.pi / 2, beta=[0.0, 1.0], beta_prime=[1.0, 0.0])
    outs = []
    for name, cfg in (("c2.json", case2), ("c3.json", case3)):
        path = tmp_path / name
        path.write_text(json.dumps(cfg))
        code, out, _ = _run(capsys, "asym", str(path), "--n-max", "6")
        assert code == 0
        outs.append([r.split(",")[2] for r in _rows(out)])
    assert outs[0] == outs[1]


# ---------------------------------------------------------------------------
# compare


def test_compare_passes_on_baseline(capsys):
    code, out, _ = _run(capsys, "compare", S0, "--n-lo", "5", "--n-hi", "12")
    assert code == 0
    assert out.rstrip().endswith("# verdict: PASS")
    rows = [r.split(",") for r in _rows(out)]
    assert [r[0] for r in rows] == [str(n) for n in range(5, 13)]
    for r in rows:
        assert abs(float(r[1]) - float(r[2])) == pytest.approx(float(r[3]), abs=1e-15)
        assert float(r[4]) <= 1.0


def test_compare_phase_override_negative_control(capsys):
    code, out, _ = _run(capsys, "compare", S0, "--n-lo", "5", "--n-hi", "12",
                        "--phase-override", repr(7.0 / 3.0))
    assert code == 3
    assert out.rstrip().endswith("# verdict: FAIL")


def test_compare_window_validation(capsys):
    code, _, err = _run(capsys, "compare", S0, "--n-lo", "9", "--n-hi", "5")
    assert code == 1
    assert "--n-hi" in err


# ---------------------------------------------------------------------------
# eigenfunction


def test_eigenfunction_row_layout(capsys):
    code, out, _ = _run(capsys, "eigenfunction", S0, "--index", "1", "--samples", "2")
    assert code == 0
    rows = [r.split(",") for r in _rows(out)]
    assert len(rows) == 10  # 3 * 2 interior + 4 one-sided breakpoint rows
    xs = [float(r[0]) for r in rows]
    assert xs == sorted(xs)
    assert -1.0 < xs[0] and xs[-1] < 1.0
    pieces = [int(r[1]) for r in rows]
    assert pieces == sorted(pieces)
    header = out.splitlines()
    assert any(ln.startswith("# lambda_n:") for ln in header)
    assert any(ln.startswith("# normalization:") for ln in header)


def test_eigenfunction_onesided_rows_match_under_unit_jumps(capsys):
    code, out, _ = _run(capsys, "eigenfunction", S0, "--index", "2", "--samples", "3")
    assert code == 0
    rows = [r.split(",") for r in _rows(out)]
    h1_rows = [r for r in rows if float(r[0]) == pytest.approx(-1.0 / 3.0, abs=1e-15)]
    h2_rows = [r for r in rows if float(r[0]) == pytest.approx(1.0 / 3.0, abs=1e-15)]
    assert [int(r[1]) for r in h1_rows] == [1, 2]
    assert [int(r[1]) for r in h2_rows] == [2, 3]
    assert float(h1_rows[0][2]) == pytest.approx(float(h1_rows[1][2]), abs=1e-8)
    assert float(h2_rows[0][2]) == pytest.approx(float(h2_rows[1][2]), abs=1e-8)


def test_eigenfunction_flag_validation(capsys):
    assert _run(capsys, "eigenfunction", S0, "--index", "0")[0] == 1
    assert _run(capsys, "eigenfunction", S0, "--index", "1", "--samples", "0")[0] == 1


# ---------------------------------------------------------------------------
# verify


def test_verify_baseline_all_pass(capsys):
    code, out, _ = _run(capsys, "verify", S0)
    assert code == 0
    for stage in ("consistency", "wronskian-constancy", "symmetry",
                  "interface-wronskians", "orthogonality", "decay"):
        assert f"{stage}: PASS" in out
    assert "verify: PASS" in out
    assert "SKIPPED" not in out


def test_verify_indefinite_config_skips_form_stages(capsys):
    code, out, _ = _run(capsys, "verify", INDEFINITE)
    assert code == 0
    assert "symmetry: SKIPPED" in out
    assert "orthogonality: SKIPPED" in out
    assert "decay: SKIPPED" in out
    assert "consistency: PASS" in out
    assert "wronskian-constancy: PASS" in out
    assert "verify: PASS" in out


def test_verify_rejects_inadmissible_config(tmp_path, capsys):
    cfg = json.loads((CONFIG_DIR / "s0.json").read_text())
    cfg["beta"] = [1.0, 0.0]
    cfg["beta_prime"] = [0.0, 1.0]  # rho = -1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(cfg))
    code, out, err = _run(capsys, "verify", str(path))
    assert code == 2
    assert "config error" in err
    assert "PASS" not in out


# ---------------------------------------------------------------------------
# config and argument failure modes


def test_malformed_json_is_validation_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = _run(capsys, "solve", str(path), "--n-max", "1")
    assert code == 2
    assert "JSON" in err


def test_missing_config_file(capsys):
    code, _, err = _run(capsys, "solve", "/no/such/file.json", "--n-max", "1")
    assert code == 2
    assert "cannot read" in err


def test_unknown_subcommand_is_usage_error(capsys):
    assert main(["frobnicate"]) == 1
    capsys.readouterr()


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("sl2t")
    assert exe is not None, "console script should be installed with the package"
    ver = subprocess.run([exe, "--version"], capture_output=True, text=True)
    assert ver.returncode == 0
    assert ver.stdout.strip() == "sl2t 0.1.0"
    out_file = tmp_path / "roots.csv"
    run = subprocess.run(
        [exe, "solve", S0, "--n-max", "1", "--out", str(out_file)],
        capture_output=True, text=True,
    )
    assert run.returncode == 0
    assert len(_rows(out_file.read_text())) == 1
