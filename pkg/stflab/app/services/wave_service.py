import json
import logging
from pathlib import Path
from typing import List, Sequence, Tuple, Union
from ..models.wave import (
    FootprintKind,
    FootprintSet,
    FootprintTable,
    LaneRecord,
    LaneSample,
    WaveConfig,
    WaveTiling,
)
from ..utils.logging import log_contract_violation


logger = logging.getLogger(__name__)


class InactiveLaneError(ValueError):
    pass


def _ordered(lane: int, members: List[int]) -> List[int]:
    # owning lane first, the rest in row-major order
    return [lane] + sorted(member for member in members if member != lane)


class WaveService:
    @staticmethod
    def lane_to_pixel(cfg: WaveConfig, wave_origin: Tuple[int, int], lane: int) -> Tuple[int, int]:
        if lane < 0 or lane >= cfg.lanes:
            raise ValueError(f"Lane {lane} out of range for a {cfg.lanes}-lane wave")
        x, y = cfg.lane_xy(lane)
        return wave_origin[0] + x, wave_origin[1] + y

    @staticmethod
    def build_quad_footprint(cfg: WaveConfig) -> FootprintTable:
        if cfg.cols % 2 or cfg.rows % 2:
            raise ValueError(f"Quad footprints need an even wave shape, got {cfg.cols}x{cfg.rows}")

        table = []
        for lane in range(cfg.lanes):
            x, y = cfg.lane_xy(lane)
            qx, qy = x - x % 2, y - y % 2
            quad = [cfg.lane_at(qx + dx, qy + dy) for dy in (0, 1) for dx in (0, 1)]
            table.append(_ordered(lane, quad))

        return FootprintTable(
            lanes=cfg.lanes, shape=cfg.shape, footprint_size=4, kind=FootprintKind.QUAD, table=table
        )

    @staticmethod
    def build_square_footprint(cfg: WaveConfig, size: int) -> FootprintTable:
        """size x size block around each lane, shifted to stay inside the wave near edges."""
        if size < 1 or size > min(cfg.cols, cfg.rows):
            raise ValueError(f"Square footprint size {size} does not fit a {cfg.cols}x{cfg.rows} wave")

        before = (size - 1) // 2
        table = []
        for lane in range(cfg.lanes):
            x, y = cfg.lane_xy(lane)
            x0 = min(max(x - before, 0), cfg.cols - size)
            y0 = min(max(y - before, 0), cfg.rows - size)
            block = [cfg.lane_at(x0 + dx, y0 + dy) for dy in range(size) for dx in range(size)]
            table.append(_ordered(lane, block))

        return FootprintTable(
            lanes=cfg.lanes,
            shape=cfg.shape,
            footprint_size=size * size,
            kind=FootprintKind.SQUARE_WAVE,
            table=table,
        )

    @staticmethod
    def build_self_footprint(cfg: WaveConfig) -> FootprintTable:
        return FootprintTable(
            lanes=cfg.lanes,
            shape=cfg.shape,
            footprint_size=1,
            kind=FootprintKind.SELF,
            table=[[lane] for lane in range(cfg.lanes)],
        )

    @staticmethod
    def footprint_from_spec(name: str, cfg: WaveConfig) -> FootprintSet:
        """Resolve ``quad``, ``self``, ``square2``..``square4`` or ``sparse:<table.json>``."""
        name = name.strip()
        if name == "quad":
            tables = [WaveService.build_quad_footprint(cfg)]
        elif name == "self":
            tables = [WaveService.build_self_footprint(cfg)]
        elif name.startswith("square") and name[len("square"):].isdigit():
            tables = [WaveService.build_square_footprint(cfg, int(name[len("square"):]))]
        elif name.startswith("sparse:"):
            footprints = WaveService.load_footprints(Path(name.split(":", 1)[1]))
            if footprints.frames[0].shape != cfg.shape:
                raise ValueError(
                    f"Footprint table shape {footprints.frames[0].shape} does not match wave {cfg.shape}"
                )
            return footprints
        else:
            raise ValueError(f"Unknown footprint '{name}'")
        return FootprintSet(frames=tables)

    @staticmethod
    def wave_read(records: Sequence[LaneRecord], table: FootprintTable, lane: int) -> List[LaneSample]:
        """Samples of the lanes in ``lane``'s footprint, in footprint order."""
        if len(records) != table.lanes:
            raise ValueError(f"Expected {table.lanes} lane records, got {len(records)}")

        shared = []
        for other in table.table[lane]:
            record = records[other]
            if not record.active:
                log_contract_violation("wave_read", f"lane {lane} read inactive lane {other}")
                raise InactiveLaneError(f"Lane {lane} read from inactive lane {other}")
            shared.append(record.sample)
        return shared

    @staticmethod
    def sharing_groups(table: FootprintTable) -> List[List[int]]:
        """Lanes grouped by identical footprint sets, e.g. the four lanes of each quad."""
        groups = {}
        for lane, row in enumerate(table.table):
            groups.setdefault(frozenset(row), []).append(lane)
        return sorted(groups.values())

    @staticmethod
    def wave_tiling(cfg: WaveConfig, width: int, height: int) -> WaveTiling:
        return WaveTiling(config=cfg, width=width, height=height)

    @staticmethod
    def save_footprints(
        footprints: Union[FootprintTable, FootprintSet, Sequence[FootprintTable]], path: Path
    ) -> Path:
        if isinstance(footprints, FootprintTable):
            payload = footprints.model_dump(mode="json")
        else:
            frames = footprints.frames if isinstance(footprints, FootprintSet) else list(footprints)
            if len(frames) == 1:
                payload = frames[0].model_dump(mode="json")
            else:
                payload = {"frames": [table.model_dump(mode="json") for table in frames]}

        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2))
        return path

    @staticmethod
    def load_footprints(path: Path) -> FootprintSet:
        path = Path(path)
        if not path.is_file():
            raise FileNotFoundError(f"Footprint file {path} not found")
        payload = json.loads(path.read_text())
        if "frames" in payload:
            return FootprintSet.model_validate(payload)
        return FootprintSet(frames=[FootprintTable.model_validate(payload)])
