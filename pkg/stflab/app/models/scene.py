from enum import Enum
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Tuple, Union
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from .texture import Texture


class AlbedoShading(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["albedo"] = "albedo"


class BlinnPhongShading(BaseModel):
    model_config = ConfigDict(frozen=True)

    mode: Literal["blinn_phong"] = "blinn_phong"
    exponent: float = Field(default=32.0, gt=0.0)
    light_dir: Tuple[float, float, float] = (0.3, 0.4, 0.866)
    view_dir: Tuple[float, float, float] = (0.0, 0.0, 1.0)


Shading = Annotated[Union[AlbedoShading, BlinnPhongShading], Field(discriminator="mode")]


class SceneSpec(BaseModel):
    """Scene JSON as written on disk; texture fields are file paths."""

    albedo: Path
    normal_map: Optional[Path] = None
    zoom: float = Field(default=1.0, ge=1.0)
    uv_offset: Tuple[float, float] = (0.0, 0.0)
    shading: Shading = Field(default_factory=AlbedoShading)
    resolution: Tuple[int, int] = (256, 256)


class Scene(BaseModel):
    """Magnified textured plane: pixel (x, y) looks up uv = (x + 0.5) / (zoom * dims) + uv_offset."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    albedo: Texture
    normal_map: Optional[Texture] = None
    zoom: float = Field(default=1.0, ge=1.0)
    uv_offset: Tuple[float, float] = (0.0, 0.0)
    shading: Shading = Field(default_factory=AlbedoShading)
    resolution: Tuple[int, int] = (256, 256)

    @model_validator(mode="after")
    def _check(self) -> "Scene":
        if self.resolution[0] < 1 or self.resolution[1] < 1:
            raise ValueError("Scene resolution must be positive")
        if self.normal_map is not None and self.normal_map.channels != 3:
            raise ValueError("Normal map must have 3 channels")
        return self

    def with_zoom(self, zoom: float) -> "Scene":
        return self.model_copy(update={"zoom": zoom})


class Metrics(BaseModel):
    model_config = ConfigDict(frozen=True)

    mse: float
    psnr_db: float


class FrameDiagnostics(BaseModel):
    """Per-pixel pre-shading quantities for the albedo texture."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    filtered: np.ndarray
    hull_lo: np.ndarray
    hull_hi: np.ndarray
    exact_mask: np.ndarray

    @property
    def exact_fraction(self) -> float:
        return float(np.mean(self.exact_mask))


class FrameResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    image: np.ndarray
    reference: np.ndarray
    metrics: Metrics
    diagnostics: Optional[FrameDiagnostics] = None


class TaylorFunction(str, Enum):
    SQUARE = "square"
    EXP = "exp"


class TaylorReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    mu: float
    var: float
    empirical_bias: float
    predicted_bias: float
    sampled_bias: Optional[float] = None

    @property
    def remainder(self) -> float:
        return self.empirical_bias - self.predicted_bias


class StudyRow(BaseModel):
    """One configuration of a sweep or study, averaged over trials."""

    model_config = ConfigDict(frozen=True)

    estimator: str
    footprint: str
    noise: str
    zoom: float
    spp: int = 1
    trials: int = Field(ge=1)
    mse: float
    psnr_db: float

    @classmethod
    def csv_header(cls) -> List[str]:
        return list(cls.model_fields)

    def csv_row(self) -> list:
        return [getattr(self, name) for name in self.model_fields]
