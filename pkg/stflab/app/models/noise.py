from enum import Enum
from typing import Literal, Optional, Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator


class NoiseVariant(str, Enum):
    SCALAR = "scalar"
    QUAD = "quad"


class StbnParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    spatial_sigma: float = Field(default=1.9, gt=0.0)
    temporal_sigma: float = Field(default=0.8, gt=0.0)
    quad_boost: float = Field(default=1.0, ge=1.0)
    seed: int = 0

    @classmethod
    def for_variant(cls, variant: NoiseVariant, **kwargs) -> "StbnParams":
        if variant is NoiseVariant.QUAD:
            kwargs.setdefault("quad_boost", 2.0)
        return cls(**kwargs)


class NoiseMask(BaseModel):
    """Scalar (x, y, frame) mask; values stored as a (t, y, x) array in [0, 1)."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    dims: Tuple[int, int, int]
    values: np.ndarray

    @model_validator(mode="after")
    def _check_values(self) -> "NoiseMask":
        width, height, depth = self.dims
        if min(self.dims) < 1:
            raise ValueError(f"Noise mask dims must be positive, got {self.dims}")
        if self.values.shape != (depth, height, width):
            raise ValueError(
                f"Noise mask values shape {self.values.shape} does not match dims {self.dims}"
            )
        if np.any(self.values < 0.0) or np.any(self.values >= 1.0):
            raise ValueError("Noise mask values must lie in [0, 1)")
        return self

    @classmethod
    def from_array(cls, values: np.ndarray) -> "NoiseMask":
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 2:
            values = values[None]
        depth, height, width = values.shape
        values = values.copy()
        values.setflags(write=False)
        return cls(dims=(width, height, depth), values=values)

    @property
    def width(self) -> int:
        return self.dims[0]

    @property
    def height(self) -> int:
        return self.dims[1]

    @property
    def depth(self) -> int:
        return self.dims[2]

    def has_rank_property(self) -> bool:
        count = self.width * self.height
        expected = (np.arange(count) + 0.5) / count
        for t in range(self.depth):
            if not np.allclose(np.sort(self.values[t].ravel()), expected, atol=1e-6):
                return False
        return True

    def __repr__(self):
        return f"<NoiseMask {self.width}x{self.height}x{self.depth}>"


class NoiseSource(BaseModel):
    """Per-pixel random source: hashed white noise or a tiled mask."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    kind: Literal["white", "mask"] = "white"
    seed: int = 0
    mask: Optional[NoiseMask] = None
    label: str = "white"

    @model_validator(mode="after")
    def _mask_present(self) -> "NoiseSource":
        if self.kind == "mask" and self.mask is None:
            raise ValueError("Mask noise source requires a mask")
        return self

    def with_seed(self, seed: int) -> "NoiseSource":
        return NoiseSource(kind=self.kind, seed=seed, mask=self.mask, label=self.label)
