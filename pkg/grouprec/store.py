"""Read/write helpers for the SQLite artifact store.

Every helper opens its own session on the workdir's database, like the
tool functions of a service layer, and returns detached records.
"""
import logging
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Iterator, List, Optional, Sequence

from sqlalchemy import delete
from sqlmodel import select

from .database import get_session
from .errors import GroupRecError, MissingArtifactError
from .models import ExperimentRun, GroupRecord, RecommendationRecord, RunStatus

logger = logging.getLogger(__name__)


def start_run(workdir, command: str, config_json: str) -> str:
    with get_session(workdir) as session:
        run = ExperimentRun(command=command, config_json=config_json)
        session.add(run)
        session.commit()
        session.refresh(run)
        return run.id


def finish_run(workdir, run_id: str, status: RunStatus, detail: Optional[str] = None) -> None:
    with get_session(workdir) as session:
        run = session.get(ExperimentRun, run_id)
        if not run:
            logger.warning("Run %s not found", run_id)
            return
        run.status = status
        run.detail = detail
        run.finished_at = datetime.utcnow()
        session.commit()


@dataclass
class RunHandle:
    id: str
    status: RunStatus = RunStatus.COMPLETE
    detail: Optional[str] = None


@contextmanager
def tracked_run(workdir, command: str, config_json: str) -> Iterator[RunHandle]:
    """Record a stage invocation; a GroupRecError marks it failed and propagates."""
    run = RunHandle(start_run(workdir, command, config_json))
    try:
        yield run
    except GroupRecError as exc:
        finish_run(workdir, run.id, RunStatus.FAILED, exc.detail)
        raise
    finish_run(workdir, run.id, run.status, run.detail)


def list_runs(workdir) -> List[ExperimentRun]:
    with get_session(workdir) as session:
        runs = session.exec(select(ExperimentRun).order_by(ExperimentRun.created_at)).all()
        session.expunge_all()
        return list(runs)


def save_groups(workdir, repetition: int, records: Sequence[GroupRecord]) -> int:
    """Replace the groups (and their recommendations) of one repetition."""
    with get_session(workdir) as session:
        session.execute(delete(RecommendationRecord).where(RecommendationRecord.repetition == repetition))
        session.execute(delete(GroupRecord).where(GroupRecord.repetition == repetition))
        session.add_all([GroupRecord(**record.model_dump()) for record in records])
        session.commit()
    logger.info("Stored %d groups for repetition %d", len(records), repetition)
    return len(records)


def load_groups(workdir, repetition: int) -> List[GroupRecord]:
    with get_session(workdir) as session:
        query = (
            select(GroupRecord)
            .where(GroupRecord.repetition == repetition)
            .order_by(GroupRecord.kind, GroupRecord.size, GroupRecord.position)
        )
        records = session.exec(query).all()
        session.expunge_all()
    if not records:
        raise MissingArtifactError(f"groups of repetition {repetition}", "groups")
    return list(records)


def save_recommendations(workdir, repetition: int, rows: Sequence[RecommendationRecord]) -> int:
    """Replace the recommendation lists of one repetition."""
    with get_session(workdir) as session:
        session.execute(delete(RecommendationRecord).where(RecommendationRecord.repetition == repetition))
        session.add_all([RecommendationRecord(**row.model_dump()) for row in rows])
        session.commit()
    logger.info("Stored %d recommendation rows for repetition %d", len(rows), repetition)
    return len(rows)


def load_recommendations(workdir, repetition: int) -> List[RecommendationRecord]:
    with get_session(workdir) as session:
        query = (
            select(RecommendationRecord)
            .where(RecommendationRecord.repetition == repetition)
            .order_by(
                RecommendationRecord.group_id,
                RecommendationRecord.algorithm,
                RecommendationRecord.gamma,
                RecommendationRecord.param,
                RecommendationRecord.rank,
            )
        )
        rows = session.exec(query).all()
        session.expunge_all()
    if not rows:
        raise MissingArtifactError(f"recommendations of repetition {repetition}", "recommend")
    return list(rows)
