from enum import Enum
from typing import List, Tuple
import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class FootprintKind(str, Enum):
    QUAD = "quad"
    SQUARE_WAVE = "square"
    SPARSE = "sparse"
    SELF = "self"


class WaveConfig(BaseModel):
    model_config = ConfigDict(frozen=True)

    lanes: int = Field(default=32, ge=1)
    shape: Tuple[int, int] = (8, 4)

    @model_validator(mode="after")
    def _shape_matches_lanes(self) -> "WaveConfig":
        cols, rows = self.shape
        if cols < 1 or rows < 1 or cols * rows != self.lanes:
            raise ValueError(f"Wave shape {cols}x{rows} does not hold {self.lanes} lanes")
        return self

    @property
    def cols(self) -> int:
        return self.shape[0]

    @property
    def rows(self) -> int:
        return self.shape[1]

    @classmethod
    def from_shape(cls, cols: int, rows: int) -> "WaveConfig":
        return cls(lanes=cols * rows, shape=(cols, rows))

    def lane_xy(self, lane: int) -> Tuple[int, int]:
        return lane % self.cols, lane // self.cols

    def lane_at(self, x: int, y: int) -> int:
        return y * self.cols + x

    def __repr__(self):
        return f"<WaveConfig {self.cols}x{self.rows}>"


class FootprintTable(BaseModel):
    """Per-lane list of lanes each lane reads texel samples from, owning lane first."""

    model_config = ConfigDict(frozen=True)

    lanes: int = Field(ge=1)
    shape: Tuple[int, int]
    footprint_size: int = Field(ge=1)
    kind: FootprintKind
    table: List[List[int]]

    @field_validator("table")
    @classmethod
    def _plain_ints(cls, value: List[List[int]]) -> List[List[int]]:
        return [[int(lane) for lane in row] for row in value]

    @model_validator(mode="after")
    def _check_invariants(self) -> "FootprintTable":
        cols, rows = self.shape
        if cols * rows != self.lanes:
            raise ValueError(f"Footprint shape {cols}x{rows} does not hold {self.lanes} lanes")
        if len(self.table) != self.lanes:
            raise ValueError(f"Footprint table has {len(self.table)} rows, expected {self.lanes}")
        if self.footprint_size > self.lanes:
            raise ValueError("Footprint size exceeds wave lane count")
        for lane, row in enumerate(self.table):
            if len(row) != self.footprint_size:
                raise ValueError(
                    f"Lane {lane} footprint has {len(row)} entries, expected {self.footprint_size}"
                )
            if lane not in row:
                raise ValueError(f"Lane {lane} is missing from its own footprint")
            if len(set(row)) != len(row):
                raise ValueError(f"Lane {lane} footprint repeats a lane")
            if any(other < 0 or other >= self.lanes for other in row):
                raise ValueError(f"Lane {lane} footprint reads outside the wave")
        return self

    @property
    def wave_config(self) -> WaveConfig:
        return WaveConfig(lanes=self.lanes, shape=self.shape)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.table, dtype=np.int64)

    def __repr__(self):
        return f"<FootprintTable {self.kind.value} size={self.footprint_size} lanes={self.lanes}>"


class FootprintSet(BaseModel):
    """Several tables cycled over frames."""

    model_config = ConfigDict(frozen=True)

    frames: List[FootprintTable] = Field(min_length=1)

    @model_validator(mode="after")
    def _same_wave(self) -> "FootprintSet":
        first = self.frames[0]
        for table in self.frames[1:]:
            if table.shape != first.shape or table.footprint_size != first.footprint_size:
                raise ValueError("All footprint frames must share wave shape and footprint size")
        return self

    def for_frame(self, frame_index: int) -> FootprintTable:
        return self.frames[frame_index % len(self.frames)]


class WaveTiling(BaseModel):
    """Row-major tiling of a framebuffer by waves; padding lanes sit right of and below the image."""

    model_config = ConfigDict(frozen=True)

    config: WaveConfig
    width: int = Field(ge=1)
    height: int = Field(ge=1)

    @property
    def waves_x(self) -> int:
        return -(-self.width // self.config.cols)

    @property
    def waves_y(self) -> int:
        return -(-self.height // self.config.rows)

    @property
    def wave_count(self) -> int:
        return self.waves_x * self.waves_y

    @property
    def padded_size(self) -> Tuple[int, int]:
        return self.waves_x * self.config.cols, self.waves_y * self.config.rows

    def lane_pixels(self) -> np.ndarray:
        """Pixel coords of every lane as a (waves, lanes, 2) int array."""
        lanes = np.arange(self.config.lanes)
        local = np.stack([lanes % self.config.cols, lanes // self.config.cols], axis=-1)
        waves = np.arange(self.wave_count)
        origins = np.stack(
            [(waves % self.waves_x) * self.config.cols, (waves // self.waves_x) * self.config.rows],
            axis=-1,
        )
        return origins[:, None, :] + local[None, :, :]

    def active_mask(self) -> np.ndarray:
        pixels = self.lane_pixels()
        return (pixels[..., 0] < self.width) & (pixels[..., 1] < self.height)


class LaneSample(BaseModel):
    """One lane's stochastically selected texel."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    texel_coords: Tuple[int, int]
    value: np.ndarray
    pmf: float = Field(gt=0.0, le=1.0 + 1e-9)
    texture_id: str = "albedo"

    @field_validator("value", mode="before")
    @classmethod
    def _as_vector(cls, value) -> np.ndarray:
        array = np.atleast_1d(np.asarray(value, dtype=np.float64)).copy()
        array.setflags(write=False)
        return array


class LaneRecord(BaseModel):
    model_config = ConfigDict(frozen=True)

    lane: int = Field(ge=0)
    pixel: Tuple[int, int]
    sample: LaneSample
    active: bool = True
