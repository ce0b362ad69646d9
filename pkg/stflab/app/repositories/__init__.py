from .base import BaseRepository
from .run_repo import ExperimentRunRepository

__all__ = ["BaseRepository", "ExperimentRunRepository"]
