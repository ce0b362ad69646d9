from enum import Enum
from typing import Tuple
from pydantic import BaseModel, ConfigDict, model_validator
from .texture import FilterKind, FilterSupport


class Estimator(str, Enum):
    ONE_TAP = "onetap"
    IS = "is"
    MIS = "mis"
    PAIRWISE_MIS = "pmis"
    REGRESSION = "regression"
    WIS = "wis"


class SamplingMode(str, Enum):
    FILTER = "filter"
    UNIFORM = "uniform"


class EstimatorKind(BaseModel):
    model_config = ConfigDict(frozen=True)

    variant: Estimator = Estimator.WIS
    clamp: bool = False
    exact_filtering: bool = False

    @property
    def label(self) -> str:
        label = self.variant.value
        if self.clamp:
            label += "+clamp"
        if self.exact_filtering:
            label += "+exact"
        return label

    @classmethod
    def parse(cls, text: str) -> "EstimatorKind":
        """Parse labels such as ``wis``, ``is+clamp`` or ``wis+exact``."""
        name, *flags = text.strip().lower().split("+")
        unknown = set(flags) - {"clamp", "exact"}
        if unknown:
            raise ValueError(f"Unknown estimator flags: {sorted(unknown)}")
        return cls(variant=Estimator(name), clamp="clamp" in flags, exact_filtering="exact" in flags)

    def check_filter(self, kind: FilterKind):
        if self.exact_filtering and kind is not FilterKind.BILINEAR:
            raise ValueError("Exact filtering is only supported with the bilinear filter")


class EstimatorContext(BaseModel):
    """The current lane's view: its filter, lookup point and support."""

    model_config = ConfigDict(frozen=True)

    filter: FilterKind
    lookup_point: Tuple[float, float]
    support: FilterSupport
    texture_id: str = "albedo"
    sampling: SamplingMode = SamplingMode.FILTER

    @model_validator(mode="after")
    def _support_matches(self) -> "EstimatorContext":
        if len(self.support.entries) != self.filter.support_size:
            raise ValueError(
                f"{self.filter.value} support must hold {self.filter.support_size} entries"
            )
        return self

