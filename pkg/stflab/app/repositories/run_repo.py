from typing import List, Optional
from sqlmodel import Session, select
from .base import BaseRepository
from ..models.run import ExperimentRun


class ExperimentRunRepository(BaseRepository[ExperimentRun]):
    def __init__(self, session: Session):
        super().__init__(session, ExperimentRun)

    def get_by_estimator(self, estimator: str, command: Optional[str] = None) -> List[ExperimentRun]:
        statement = select(ExperimentRun).where(ExperimentRun.estimator == estimator)
        if command:
            statement = statement.where(ExperimentRun.command == command)
        statement = statement.order_by(ExperimentRun.zoom, ExperimentRun.id)
        return self.session.exec(statement).all()

    def get_latest(self, limit: int = 20) -> List[ExperimentRun]:
        statement = select(ExperimentRun).order_by(ExperimentRun.id.desc()).limit(limit)
        return self.session.exec(statement).all()

    def best_psnr(self, command: Optional[str] = None) -> Optional[ExperimentRun]:
        statement = select(ExperimentRun)
        if command:
            statement = statement.where(ExperimentRun.command == command)
        statement = statement.order_by(ExperimentRun.psnr_db.desc(), ExperimentRun.id)
        return self.session.exec(statement).first()
