"""Database models for the vortexsheet run ledger."""

from datetime import datetime, timezone
from typing import Optional

from sqlmodel import Field, SQLModel


def _now() -> datetime:
    return datetime.now(timezone.utc)


class RunRecord(SQLModel, table=True):
    """One command-line invocation."""
    id: Optional[int] = Field(default=None, primary_key=True)
    subcommand: str = Field(index=True)
    config_digest: str  # sha256 of the effective RunConfig JSON
    exit_code: int = 0
    artifacts: str = ""  # newline-separated paths
    started_at: datetime = Field(default_factory=_now)
    finished_at: Optional[datetime] = None


class SystemLog(SQLModel, table=True):
    """System log model for tracking operations."""
    id: Optional[int] = Field(default=None, primary_key=True)
    level: str  # INFO, WARNING, ERROR
    message: str
    component: str  # symbol, sobolev, evolve, cli, etc.
    created_at: datetime = Field(default_factory=_now)
    run_id: Optional[int] = Field(foreign_key="runrecord.id", default=None)
