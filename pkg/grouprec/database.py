from sqlmodel import SQLModel, Session, create_engine
from sqlalchemy.orm import sessionmaker
from sqlalchemy.pool import NullPool
from contextlib import contextmanager
from functools import lru_cache
from pathlib import Path

from .config import database_url_for

# Import all models to ensure they are registered with SQLModel metadata
from .models import ExperimentRun, GroupRecord, RecommendationRecord  # noqa: F401


def _create_engine(url: str):
    if url.startswith("sqlite"):
        return create_engine(
            url,
            echo=False,
            connect_args={"check_same_thread": False},
        )

    return create_engine(
        url,
        echo=False,
        pool_pre_ping=True,
        poolclass=NullPool,
    )


@lru_cache(maxsize=None)
def _session_factory(url: str) -> sessionmaker:
    engine = _create_engine(url)
    SQLModel.metadata.create_all(bind=engine)
    return sessionmaker(autocommit=False, autoflush=False, bind=engine, class_=Session)


@contextmanager
def get_session(workdir):
    """Session on the artifact store of ``workdir``; tables are created on first use.

    Usage:
        with get_session(workdir) as session:
            ...
    """
    Path(workdir).mkdir(parents=True, exist_ok=True)
    session = _session_factory(database_url_for(Path(workdir)))()
    try:
        yield session
    finally:
        session.close()
