import pytest

from database.db import create_session_factory, init_db
from database.db_manager import DatabaseManager
from database.models import RunStatus


@pytest.fixture
def db():
    engine, Session = create_session_factory("sqlite://")
    init_db(engine)
    session = Session()
    yield DatabaseManager(session)
    session.close()


def test_new_run_is_running(db):
    run = db.add_run("analyze", "abc123", "out")
    assert run.id is not None
    assert run.status == RunStatus.RUNNING
    assert run.finished_at is None
    assert db.get_run_by_id(run.id).input_digest == "abc123"


def test_finishing_a_run_stamps_the_time(db):
    run = db.add_run("verify", "abc123", "out")
    db.update_run_status(run.id, RunStatus.FAILED, 3)
    stored = db.get_run_by_id(run.id)
    assert stored.status == RunStatus.FAILED
    assert stored.exit_code == 3
    assert stored.finished_at is not None
    assert [r.id for r in db.get_runs_by_status(RunStatus.FAILED)] == [run.id]
    assert db.get_runs_by_status(RunStatus.RUNNING) == []


def test_audits_belong_to_their_run(db):
    run = db.add_run("verify", "abc123", "out")
    db.add_audit(run.id, "bounds", True, "all entries finite")
    db.add_audit(run.id, "petrov", False, "reality 1e-3")
    audits = db.get_audits_for_run(run.id)
    assert [(a.group, a.passed) for a in audits] == [("bounds", True), ("petrov", False)]
    assert db.get_run_by_id(run.id).audits[0].detail == "all entries finite"


def test_audit_for_a_missing_run(db):
    with pytest.raises(ValueError):
        db.add_audit(999, "bounds", True)
