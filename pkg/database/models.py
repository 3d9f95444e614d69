from sqlalchemy import Column, Integer, String, DateTime, ForeignKey, Boolean, Text, Enum as SQLEnum
from sqlalchemy.orm import relationship, declarative_base
from datetime import datetime
import enum

Base = declarative_base()

class RunStatus(enum.Enum):
    PENDING = 'pending'
    RUNNING = 'running'
    PASSED = 'passed'
    FAILED = 'failed'
    REJECTED = 'rejected'

class AnalysisRun(Base):
    __tablename__ = 'analysis_runs'

    id = Column(Integer, primary_key=True)
    command = Column(String)
    input_digest = Column(String)
    status = Column(SQLEnum(RunStatus), default=RunStatus.PENDING)
    exit_code = Column(Integer)
    out_dir = Column(String)
    created_at = Column(DateTime, default=datetime.utcnow)
    finished_at = Column(DateTime)

    audits = relationship("AuditRecord", back_populates="run")

class AuditRecord(Base):
    __tablename__ = 'audit_records'

    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey('analysis_runs.id'))
    group = Column(String)
    passed = Column(Boolean)
    detail = Column(Text)
    created_at = Column(DateTime, default=datetime.utcnow)

    run = relationship("AnalysisRun", back_populates="audits")
