from sqlmodel import SQLModel, Field
from datetime import datetime
from typing import Optional
from uuid import uuid4
import enum


class RunStatus(str, enum.Enum):
    RUNNING = "running"
    COMPLETE = "complete"
    PARTIAL = "partial"
    FAILED = "failed"


class ExperimentRun(SQLModel, table=True):
    """One invocation of a pipeline stage or of the full experiment."""
    __tablename__ = "experiment_runs"

    id: str = Field(default_factory=lambda: str(uuid4()), primary_key=True)
    command: str = Field(index=True)
    config_json: str
    status: RunStatus = Field(default=RunStatus.RUNNING)
    detail: Optional[str] = None
    created_at: datetime = Field(default_factory=datetime.utcnow)
    finished_at: Optional[datetime] = None
