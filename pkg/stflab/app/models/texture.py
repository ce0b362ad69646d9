from enum import Enum
from typing import List, Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class AddressMode(str, Enum):
    CLAMP = "clamp"
    WRAP = "wrap"


class FilterKind(str, Enum):
    BILINEAR = "bilinear"
    BICUBIC_BSPLINE = "bspline"

    @property
    def taps_1d(self) -> int:
        return 2 if self is FilterKind.BILINEAR else 4

    @property
    def support_size(self) -> int:
        return self.taps_1d * self.taps_1d


class TextureFormat(str, Enum):
    PNG = "png"
    PFM = "pfm"
    RAW_F32 = "raw-f32"


class Texture(BaseModel):
    """Multi-channel texel grid stored row-major as a (height, width, channels) array."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    width: int = Field(ge=1)
    height: int = Field(ge=1)
    channels: int = Field(ge=1, le=4)
    data: np.ndarray
    address_mode: AddressMode = AddressMode.CLAMP

    @model_validator(mode="before")
    @classmethod
    def _reshape_data(cls, values: dict) -> dict:
        if not isinstance(values, dict) or "data" not in values:
            return values
        array = np.array(values["data"], dtype=np.float64)
        try:
            expected = (int(values["height"]), int(values["width"]), int(values["channels"]))
        except (KeyError, TypeError, ValueError):
            return values
        if array.size != expected[0] * expected[1] * expected[2]:
            raise ValueError(
                f"Texture data length {array.size} does not match "
                f"{expected[1]}x{expected[0]}x{expected[2]}"
            )
        return {**values, "data": array.reshape(expected)}

    @field_validator("data")
    @classmethod
    def _finite_float(cls, value: np.ndarray) -> np.ndarray:
        array = np.asarray(value, dtype=np.float64)
        if not np.all(np.isfinite(array)):
            raise ValueError("Texture data must be finite")
        array.setflags(write=False)
        return array

    @classmethod
    def from_array(cls, array: np.ndarray, address_mode: AddressMode = AddressMode.CLAMP):
        array = np.asarray(array, dtype=np.float64)
        if array.ndim == 2:
            array = array[:, :, None]
        if array.ndim != 3:
            raise ValueError(f"Expected a 2D or 3D array, got shape {array.shape}")
        height, width, channels = array.shape
        return cls(
            width=width, height=height, channels=channels, data=array, address_mode=address_mode
        )

    def with_address_mode(self, address_mode: AddressMode) -> "Texture":
        return Texture(
            width=self.width,
            height=self.height,
            channels=self.channels,
            data=self.data,
            address_mode=address_mode,
        )

    def __repr__(self):
        return f"<Texture {self.width}x{self.height}x{self.channels} {self.address_mode.value}>"


class SupportEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    texel: Tuple[int, int]
    weight: float = Field(ge=0.0, le=1.0 + 1e-9)


class FilterSupport(BaseModel):
    """Texels (with weights) a reconstruction filter touches at one lookup point."""

    model_config = ConfigDict(frozen=True)

    entries: List[SupportEntry]
    lookup_point: Tuple[float, float]

    @model_validator(mode="after")
    def _normalized(self) -> "FilterSupport":
        total = sum(entry.weight for entry in self.entries)
        if abs(total - 1.0) > 1e-6:
            raise ValueError(f"Filter support weights sum to {total}, expected 1")
        return self

    @property
    def coords(self) -> np.ndarray:
        return np.array([entry.texel for entry in self.entries], dtype=np.int64)

    @property
    def weights(self) -> np.ndarray:
        return np.array([entry.weight for entry in self.entries], dtype=np.float64)

    def weight_of(self, texel: Tuple[int, int]) -> float:
        for entry in self.entries:
            if entry.texel == tuple(texel):
                return entry.weight
        return 0.0
