from sqlmodel import SQLModel, Field
from datetime import datetime, timezone
from typing import Optional


class ExperimentRun(SQLModel, table=True):
    __tablename__ = "experiment_runs"

    id: Optional[int] = Field(default=None, primary_key=True)
    command: str = Field(nullable=False, index=True)
    estimator: str = Field(nullable=False, index=True)
    filter: str = Field(nullable=False)
    footprint: str = Field(nullable=False)
    noise: str = Field(nullable=False)
    zoom: float = Field(nullable=False)
    seed: int = Field(default=0)
    frames: int = Field(default=1)
    mse: float = Field(nullable=False)
    psnr_db: float = Field(nullable=False)
    created_at: datetime = Field(default_factory=lambda: datetime.now(timezone.utc))

    def __repr__(self):
        return (
            f"<ExperimentRun {self.command} {self.estimator} "
            f"zoom={self.zoom} psnr={self.psnr_db:.2f}>"
        )

    @property
    def label(self) -> str:
        return f"{self.estimator}/{self.footprint}/{self.noise}"
