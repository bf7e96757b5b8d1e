"""Run ledger connection, session management and event logging."""

import logging
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Optional

from sqlalchemy.pool import StaticPool
from sqlmodel import Session as SQLSession
from sqlmodel import SQLModel, create_engine

from vortexsheet.config import config
from vortexsheet.models import RunRecord, SystemLog

logger = logging.getLogger("vortexsheet")

_engine = None
_ledger_url: Optional[str] = f"sqlite:///{config.ledger_db_file}" if config.ledger_enabled else None
_current_run_id: Optional[int] = None


def configure_ledger(url: Optional[str]) -> None:
    """Point the ledger at a database URL, or disable it with None."""
    global _engine, _ledger_url, _current_run_id
    if _engine is not None:
        _engine.dispose()
    _engine = None
    _ledger_url = url
    _current_run_id = None


def ledger_enabled() -> bool:
    return _ledger_url is not None


def get_engine():
    """Create the engine on first use."""
    global _engine
    if _engine is None and _ledger_url is not None:
        if _ledger_url in ("sqlite://", "sqlite:///:memory:"):
            _engine = create_engine(
                _ledger_url,
                connect_args={"check_same_thread": False},
                poolclass=StaticPool,
            )
        else:
            if _ledger_url.startswith("sqlite:///"):
                Path(_ledger_url[len("sqlite:///"):]).parent.mkdir(parents=True, exist_ok=True)
            _engine = create_engine(_ledger_url)
    return _engine


def create_tables():
    """Create all database tables."""
    SQLModel.metadata.create_all(get_engine())


def get_session():
    """Get a database session."""
    return SQLSession(get_engine())


def init_database():
    """Initialize the ledger tables if the ledger is enabled."""
    if not ledger_enabled():
        return
    create_tables()


def log_system_event(level: str, message: str, component: str):
    """Log a system event.

    Always emitted on the ``vortexsheet.<component>`` logger; persisted when
    the ledger is enabled. Ledger failures never break a computation.
    """
    logging.getLogger(f"vortexsheet.{component}").log(
        logging.getLevelName(level.upper()), message
    )
    if not ledger_enabled():
        return
    try:
        with get_session() as session:
            session.add(
                SystemLog(level=level.upper(), message=message, component=component, run_id=_current_run_id)
            )
            session.commit()
    except Exception as e:
        logger.debug(f"Failed to persist log event: {e}")


def start_run(subcommand: str, config_digest: str) -> Optional[int]:
    """Open a ledger row for a run."""
    global _current_run_id
    if not ledger_enabled():
        return None
    try:
        init_database()
        with get_session() as session:
            record = RunRecord(subcommand=subcommand, config_digest=config_digest)
            session.add(record)
            session.commit()
            session.refresh(record)
            _current_run_id = record.id
            return record.id
    except Exception as e:
        logger.warning(f"Run ledger unavailable: {e}")
        return None


def finish_run(run_id: Optional[int], exit_code: int, artifacts: Iterable[str] = ()):
    """Close a ledger row with its exit code and artifact list."""
    global _current_run_id
    if run_id is None or not ledger_enabled():
        return
    try:
        with get_session() as session:
            record = session.get(RunRecord, run_id)
            if record is not None:
                record.exit_code = exit_code
                record.artifacts = "\n".join(str(a) for a in artifacts)
                record.finished_at = datetime.now(timezone.utc)
                session.add(record)
                session.commit()
    except Exception as e:
        logger.warning(f"Failed to close run {run_id}: {e}")
    finally:
        _current_run_id = None
