from sqlalchemy.orm import Session
from .models import AnalysisRun, AuditRecord, RunStatus
from datetime import datetime
from typing import Optional
import logging

logger = logging.getLogger(__name__)

class DatabaseManager:
    def __init__(self, session: Session):
        self.session = session

    def add_run(self, command: str, input_digest: str, out_dir: str) -> AnalysisRun:
        """Add a new run to the ledger"""
        try:
            run = AnalysisRun(
                command=command,
                input_digest=input_digest,
                out_dir=str(out_dir),
                status=RunStatus.RUNNING
            )
            self.session.add(run)
            self.session.commit()
            logger.info(f"Recorded {command} run {run.id}")
            return run
        except Exception as e:
            self.session.rollback()
            logger.error(f"Error adding {command} run: {str(e)}")
            raise

    def get_run_by_id(self, run_id: int) -> Optional[AnalysisRun]:
        """Get run by ID"""
        return self.session.query(AnalysisRun).filter(AnalysisRun.id == run_id).first()

    def get_runs_by_status(self, status: RunStatus) -> list[AnalysisRun]:
        """Get runs by status"""
        return self.session.query(AnalysisRun).filter(AnalysisRun.status == status).all()

    def update_run_status(self, run_id: int, status: RunStatus, exit_code: int = None):
        """Update run status and stamp the finish time"""
        try:
            run = self.get_run_by_id(run_id)
            if run:
                run.status = status
                if exit_code is not None:
                    run.exit_code = exit_code
                if status in (RunStatus.PASSED, RunStatus.FAILED, RunStatus.REJECTED):
                    run.finished_at = datetime.utcnow()
                self.session.commit()
                logger.info(f"Updated run {run_id} status to {status}")
        except Exception as e:
            self.session.rollback()
            logger.error(f"Error updating run {run_id} status: {str(e)}")
            raise

    def add_audit(self, run_id: int, group: str, passed: bool, detail: str = "") -> AuditRecord:
        """Add an audit outcome to a run"""
        try:
            if not self.get_run_by_id(run_id):
                raise ValueError(f"Run with ID {run_id} not found")
            audit = AuditRecord(run_id=run_id, group=group, passed=bool(passed), detail=detail)
            self.session.add(audit)
            self.session.commit()
            return audit
        except Exception as e:
            self.session.rollback()
            logger.error(f"Error adding audit {group} for run {run_id}: {str(e)}")
            raise

    def get_audits_for_run(self, run_id: int) -> list[AuditRecord]:
        """Get audits of a run in insertion order"""
        return self.session.query(AuditRecord).filter(AuditRecord.run_id == run_id).order_by(AuditRecord.id).all()
