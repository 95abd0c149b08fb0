import json
import subprocess
import sys

import pytest

from distorted_premiums.cli import RunConfig, main, run

CTE8 = '{"kind":"cte","alpha":0.8}'
FIG1 = '{"kind":"poly","coeffs":[0.7,0,0.9]}'
TWO = '{"kind":"discrete","values":[0,100],"probs":[0.9,0.1]}'


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_premium_identity(capsys):
    code, out, _ = _run(capsys, "premium", "--distortion", '{"kind":"cte","alpha":0}',
                        "--loss", '{"kind":"uniform"}')
    assert code == 0 and json.loads(out)["direct"] == pytest.approx(0.5)


def test_verify_two_point(capsys):
    code, out, _ = _run(capsys, "verify", "--distortion", CTE8, "--loss", TWO,
                        "--dual", "--trials", "2000", "--seed", "3")
    rec = json.loads(out)
    assert code == 0 and rec["failures"] == []
    for key in ("direct", "kusuoka", "comonotone", "inf_rep", "dual_candidate"):
        assert rec[key] == pytest.approx(50.0, abs=1e-9)
    assert abs(rec["zero_gap"]) < 1e-6


def test_invalid_distortion_names_invariant(capsys):
    code, _, err = _run(capsys, "premium", "--distortion", '{"kind":"poly","coeffs":[0.5,0,0.9]}',
                        "--loss", TWO)
    assert code == 1 and "normalization violated" in err


def test_missing_file(capsys):
    code, _, err = _run(capsys, "premium", "--distortion", "/nonexistent.json", "--loss", TWO)
    assert code == 1 and "does not exist" in err


def test_tolerance_failure_names_pair(monkeypatch):
    import distorted_premiums.cli as cli

    monkeypatch.setattr(cli, "CHECKS", (("direct", "comonotone", 0.0),))
    status, text = run(RunConfig("verify", FIG1, '{"kind":"uniform"}', grid=100))
    rec = json.loads(text)
    assert status == 2
    assert rec["failures"][0].startswith("direct vs comonotone: relative gap")


def test_reserve_csv(capsys):
    code, out, _ = _run(capsys, "reserve", "--distortion", '{"kind":"cte","alpha":0.9}',
                        "--age", "50", "--horizon", "5", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0] == "age,net,distorted_probs,distorted_outcomes"
    assert len(lines) == 7


def test_distance_and_distort(capsys, tmp_path):
    code, out, _ = _run(capsys, "distance", "--distortion", CTE8, "--loss", TWO)
    assert code == 0 and json.loads(out)["ks_standard"] == pytest.approx(0.4)
    target = tmp_path / "fig.csv"
    code, _, _ = _run(capsys, "distort", "--distortion", FIG1, "--loss", '{"kind":"normal"}',
                      "--grid", "41", "--format", "csv", "--out", str(target))
    rows = target.read_text().splitlines()
    assert code == 0 and rows[0].startswith("y,cdf_distorted_probs") and len(rows) == 42


def test_spec_files(capsys, tmp_path):
    (tmp_path / "d.json").write_text(CTE8)
    (tmp_path / "s.csv").write_text("0\n0\n0\n0\n100\n")
    code, out, _ = _run(capsys, "premium", "--distortion", str(tmp_path / "d.json"),
                        "--loss", str(tmp_path / "s.csv"))
    assert code == 0 and json.loads(out)["direct"] == pytest.approx(100.0)


def test_byte_identical_output():
    argv = [sys.executable, "-m", "distorted_premiums", "verify", "--distortion", FIG1,
            "--loss", '{"kind":"discrete","values":[1,2,5,9],"probs":[0.1,0.2,0.3,0.4]}',
            "--dual", "--trials", "1000", "--seed", "11"]
    a = subprocess.run(argv, capture_output=True, check=True).stdout
    b = subprocess.run(argv, capture_output=True, check=True).stdout
    assert a == b and len(a) > 0
