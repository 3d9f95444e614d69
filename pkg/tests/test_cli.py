import json

import pytest

from app import EXIT_CONFIG, EXIT_NOT_ULTRA_MORSE, EXIT_OK, main
from database.db import create_session_factory
from database.db_manager import DatabaseManager
from database.models import RunStatus
from services.verify_manager import GROUPS


@pytest.fixture
def workspace(tmp_path, monkeypatch):
    db_url = f"sqlite:///{tmp_path / 'runs.db'}"
    monkeypatch.delenv("ABELIAN_CONFIG", raising=False)
    monkeypatch.delenv("ABELIAN_SEED", raising=False)
    monkeypatch.setenv("ABELIAN_DATABASE_URL", db_url)
    monkeypatch.setenv("ABELIAN_OUT_DIR", str(tmp_path / "out"))
    return tmp_path, db_url


def write_polynomial(path, terms):
    path.write_text(json.dumps({
        "degree": max(i + j for i, j, _ in terms),
        "coeffs": [{"i": i, "j": j, "re": c, "im": 0.0} for i, j, c in terms],
    }))
    return path


def runs(db_url):
    _, Session = create_session_factory(db_url)
    with Session() as s:
        return [(r.command, r.status, r.exit_code) for r in DatabaseManager(s).get_runs_by_status(RunStatus.PASSED)] + [
            (r.command, r.status, r.exit_code)
            for status in (RunStatus.FAILED, RunStatus.REJECTED)
            for r in DatabaseManager(s).get_runs_by_status(status)
        ]


def test_bounds_command(workspace, capsys):
    tmp_path, db_url = workspace
    assert main(["bounds"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "TheoremA1" in out
    document = json.loads((tmp_path / "out" / "bounds.json").read_text())
    assert document["entries"]["TheoremA"] == pytest.approx(80000)
    assert (tmp_path / "out" / "bounds.schema.json").exists()
    assert runs(db_url) == [("bounds", RunStatus.PASSED, 0)]


def test_appendix_constant_five(workspace):
    tmp_path, _ = workspace
    assert main(["bounds", "--c-appendix", "5"]) == EXIT_OK
    document = json.loads((tmp_path / "out" / "bounds.json").read_text())
    assert document["entries"]["TheoremA"] == pytest.approx(80)


def test_list_groups(workspace, capsys):
    assert main(["verify", "--list"]) == EXIT_OK
    assert capsys.readouterr().out.split() == list(GROUPS)


@pytest.mark.parametrize(
    "argv",
    [
        ["bounds", "--tol.foo=1"],
        ["bounds", "--tol.value=abc"],
        ["bounds", "--c-appendix", "7"],
        ["bounds", "--bogus"],
        ["nonsense"],
        ["verify", "--group", "nope"],
    ],
)
def test_invocation_errors_exit_with_one(workspace, argv):
    assert main(argv) == EXIT_CONFIG


def test_malformed_input(workspace):
    tmp_path, db_url = workspace
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["analyze", "--input", str(bad)]) == EXIT_CONFIG
    assert runs(db_url) == []


def test_non_ultra_morse_input_is_rejected(workspace):
    tmp_path, db_url = workspace
    # critical values -4, 0, 0, 4
    path = write_polynomial(tmp_path / "twin.json", [(3, 0, 1.0), (1, 0, -3.0), (0, 3, 1.0), (0, 1, -3.0)])
    assert main(["analyze", "--input", str(path)]) == EXIT_NOT_ULTRA_MORSE
    document = json.loads((tmp_path / "out" / "normalization.json").read_text())
    assert document["ultra_morse"] is False
    assert document["clause"] == "b"
    assert runs(db_url) == [("analyze", RunStatus.REJECTED, 2)]


def test_analyze_h_star(workspace):
    tmp_path, _ = workspace
    assert main(["analyze", "--tol.value=1e-8"]) == EXIT_OK
    document = json.loads((tmp_path / "out" / "normalization.json").read_text())
    assert document["ultra_morse"] is True
    assert document["report"]["nu"] == pytest.approx(1 / 16)
    assert (tmp_path / "out" / "critical_values.csv").exists()


def test_verify_group_failure_sets_the_exit_code(workspace):
    tmp_path, db_url = workspace
    assert main(["verify", "--group", "critical_points", "--tol.value", "1e0"]) == 1
    document = json.loads((tmp_path / "out" / "verify.json").read_text())
    assert [g["name"] for g in document["groups"]] == ["critical_points"]
    assert document["failed"] == 1
    assert runs(db_url) == [("verify", RunStatus.FAILED, 1)]


def test_verify_passing_group(workspace):
    assert main(["verify", "--group", "critical_points"]) == EXIT_OK


@pytest.mark.slow
def test_verify_bounds_group(workspace):
    assert main(["verify", "--group", "bounds", "--group", "mardesic"]) == EXIT_OK


@pytest.mark.slow
def test_verify_geometric_lemma_group(workspace):
    assert main(["verify", "--group", "geometric_lemma"]) == EXIT_OK
