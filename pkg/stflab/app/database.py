from pathlib import Path
from sqlmodel import SQLModel, Session, create_engine
from sqlalchemy.engine import Engine, make_url
from contextlib import contextmanager
from typing import Generator
from .config import settings


def build_engine(database_url: str, echo: bool = False) -> Engine:
    """Engine for the run ledger; file-backed SQLite gets its parent directory created."""
    url = make_url(database_url)
    connect_args = {}
    if url.get_backend_name() == "sqlite":
        connect_args["check_same_thread"] = False
        if url.database and url.database != ":memory:":
            Path(url.database).parent.mkdir(parents=True, exist_ok=True)
    return create_engine(database_url, echo=echo, connect_args=connect_args)


engine = build_engine(settings.database_url, echo=settings.debug)


def create_db_and_tables():
    # The run table must be registered on the metadata before create_all
    from .models.run import ExperimentRun  # noqa: F401

    SQLModel.metadata.create_all(engine)


@contextmanager
def get_session() -> Generator[Session, None, None]:
    with Session(engine) as session:
        try:
            yield session
            session.commit()
        except Exception:
            session.rollback()
            raise
        finally:
            session.close()


def init_database():
    create_db_and_tables()
