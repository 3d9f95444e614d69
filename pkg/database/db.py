import os
from dotenv import load_dotenv
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from .models import Base

load_dotenv()

# Database URL - SQLite run ledger unless overridden
DATABASE_URL = os.getenv("ABELIAN_DATABASE_URL", "sqlite:///./abelian_runs.db")


def create_session_factory(url: str = DATABASE_URL):
    """Create an engine for url and return (engine, session factory)"""
    connect_args = {"check_same_thread": False} if url.startswith("sqlite") else {}
    engine = create_engine(url, connect_args=connect_args)
    return engine, sessionmaker(bind=engine)


# Default engine and session factory
engine, Session = create_session_factory()


def init_db(bind=None):
    """Initialize database by creating all tables"""
    Base.metadata.create_all(bind if bind is not None else engine)
