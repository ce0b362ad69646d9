from typing import List
import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from .wave import FootprintTable


class OptParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    sigma: float = Field(default=1.4, gt=0.0)
    candidates_per_lane: int = Field(default=32, ge=16, le=32)
    stage2_trials: int = Field(default=10000, ge=1)
    restarts: int = Field(default=30, ge=1)
    footprint_size: int = Field(default=9, ge=1)
    seed: int = 0
    edge_relax: float = Field(default=1.5, ge=1.0)
    corner_relax: float = Field(default=2.0, ge=1.0)


class UsageHistogram(BaseModel):
    model_config = ConfigDict(frozen=True)

    counts: List[int]
    mean: float
    stddev: float

    @classmethod
    def from_counts(cls, counts) -> "UsageHistogram":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(
            counts=counts.tolist(),
            mean=float(counts.mean()),
            stddev=float(counts.std()),
        )


class OptimizationResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    table: FootprintTable
    score: float
    best_restart: int
    stage2_scores: List[float]
    restart_scores: List[float]
    descent_trace: List[float]
