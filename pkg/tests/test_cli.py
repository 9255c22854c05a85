import io
import json

import pandas as pd
import pytest

from tsdae import cli
from tsdae.settings import settings


def _run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_analyze_example2(capsys, example2_path):
    code, out, _ = _run(capsys, "analyze", str(example2_path))
    assert code == 0
    report = json.loads(out)
    assert report["command"] == "analyze"
    assert report["index_flag"] == "index1"
    assert report["passed"] is True
    det = {row["t"]: row["det_G1"] for row in report["chain"]}
    assert det[2.0] == pytest.approx(-1024.0)
    assert all(c["passed"] for c in report["checks"])


def test_analyze_example1_flags_projector(capsys, example1_path):
    code, out, _ = _run(capsys, "analyze", str(example1_path))
    assert code == 1
    report = json.loads(out)
    warnings = {w["check"]: w for w in report["warnings"]}
    assert warnings["AP=A"]["entry"] == [3, 2]
    assert "kerP=kerA" in warnings
    failed = [c["name"] for c in report["checks"] if not c["passed"]]
    assert "identity A1invA=P" in failed


def test_analyze_csv_gives_chain_table(capsys, example2_path):
    code, out, _ = _run(capsys, "analyze", str(example2_path), "--format", "csv")
    assert code == 0
    df = pd.read_csv(io.StringIO(out))
    assert list(df.columns) == ["t", "r", "r1", "index_flag", "det_G1", "cond_G1"]
    assert len(df) == 11


def test_decouple_example1_succeeds_with_warnings(capsys, example1_path):
    code, out, _ = _run(capsys, "decouple", str(example1_path))
    assert code == 0
    report = json.loads(out)
    assert len(report["decoupled"]) == 20
    assert report["decoupled"][0]["Gf"][0][2] == pytest.approx(1.0)
    assert {w["check"] for w in report["warnings"]} == {"AP=A", "kerP=kerA", "A1inv-identities"}


def test_solve_csv(capsys, example2_path):
    code, out, _ = _run(capsys, "solve", str(example2_path), "--format", "csv")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("t,u_1,u_2,u_3,vsigma_1")
    assert len(lines) == 12


def test_solve_with_out_writes_trajectory_next_to_report(capsys, tmp_path, example2_path):
    target = tmp_path / "runs" / "ex2.json"
    code, out, _ = _run(capsys, "solve", str(example2_path), "--out", str(target))
    assert code == 0
    assert out == ""
    report = json.loads(target.read_text(encoding="utf-8"))
    csv_path = tmp_path / "runs" / "ex2.trajectory.csv"
    assert report["trajectory"]["csv_path"] == str(csv_path)
    assert csv_path.read_text(encoding="utf-8").startswith("t,u_1")


def test_solve_without_initial_data_is_an_input_error(capsys, tmp_path, example2_path):
    doc = json.loads(example2_path.read_text(encoding="utf-8"))
    del doc["initial"]
    path = tmp_path / "no_initial.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, out, err = _run(capsys, "solve", str(path))
    assert code == 2
    assert "tsdae: error:" in err
    assert json.loads(out)["error"]["error"] == "InputError"


def test_verify_example2_passes(capsys, example2_path):
    code, out, _ = _run(capsys, "verify", str(example2_path), "--workers", "2")
    assert code == 0
    report = json.loads(out)
    names = [c["name"] for c in report["checks"]]
    for name in ("reversibility", "invariance", "oracle", "homogeneity", "alternative projectors identities"):
        assert name in names
    assert report["trajectory"]["oracle_gap"] <= 1e-8


def test_verify_example1_fails(capsys, example1_path):
    code, out, _ = _run(capsys, "verify", str(example1_path), "--format", "text")
    assert code == 1
    assert out.startswith("tsdae verify: FAIL")


def test_missing_file_exits_with_input_error(capsys, tmp_path):
    code, out, err = _run(capsys, "analyze", str(tmp_path / "missing.json"))
    assert code == 2
    assert "not found" in err
    assert json.loads(out)["passed"] is False


def test_invalid_json_exits_with_input_error(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ not json", encoding="utf-8")
    code, _, err = _run(capsys, "analyze", str(path), "--format", "csv")
    assert code == 2
    assert "invalid JSON" in err


def test_missing_file_argument(capsys):
    code, _, _ = _run(capsys, "analyze")
    assert code == 2


def test_tolerance_override(capsys, example2_path):
    code, out, _ = _run(capsys, "analyze", str(example2_path), "--tol.rank=1e-7")
    assert code == 0
    assert json.loads(out)["tolerances"]["rank"] == 1e-7


def test_non_positive_tolerance_is_rejected(capsys, example2_path):
    code, _, _ = _run(capsys, "analyze", str(example2_path), "--tol.residual=-1")
    assert code == 2


def test_unknown_command_is_an_argparse_error():
    with pytest.raises(SystemExit) as info:
        cli.main(["integrate"])
    assert info.value.code == 2


def test_selftest_with_reduced_counts(capsys, monkeypatch):
    monkeypatch.setattr(settings, "selftest_random_instances", 5)
    monkeypatch.setattr(settings, "selftest_level1_instances", 5)
    monkeypatch.setattr(settings, "selftest_oracle_instances", 5)
    code, out, _ = _run(capsys, "selftest", "--seed", "7")
    report = json.loads(out)
    failed = [c for c in report["checks"] if not c["passed"]]
    assert failed == []
    assert code == 0
    names = [c["name"] for c in report["checks"]]
    assert "example2 Madv" in names
    assert "example1 detects AP=A" in names


@pytest.mark.slow
def test_selftest_full(capsys):
    code, out, _ = _run(capsys, "selftest", "--format", "csv")
    assert code == 0
    df = pd.read_csv(io.StringIO(out))
    assert df["passed"].all()
