"""
Unit tests for the wave simulator and sharing footprints
"""

import pytest
import numpy as np
from pydantic import ValidationError
from stflab.app.models import (
    FootprintKind,
    FootprintSet,
    FootprintTable,
    LaneRecord,
    LaneSample,
    WaveConfig,
)
from stflab.app.services import InactiveLaneError, WaveService


def _records(cfg, inactive=()):
    return [
        LaneRecord(
            lane=lane,
            pixel=cfg.lane_xy(lane),
            sample=LaneSample(texel_coords=(lane, 0), value=[float(lane)], pmf=0.25),
            active=lane not in inactive,
        )
        for lane in range(cfg.lanes)
    ]


def test_wave_config_shape_must_hold_lanes():
    """Test wave shape and lane count agree"""
    with pytest.raises(ValidationError, match="does not hold"):
        WaveConfig(lanes=32, shape=(8, 2))


def test_lane_to_pixel(wave_cfg):
    """Test row-major lane to pixel mapping"""
    assert WaveService.lane_to_pixel(wave_cfg, (0, 0), 0) == (0, 0)
    assert WaveService.lane_to_pixel(wave_cfg, (0, 0), 9) == (1, 1)
    assert WaveService.lane_to_pixel(wave_cfg, (16, 8), 31) == (23, 11)
    assert WaveService.lane_to_pixel(WaveConfig.from_shape(16, 2), (0, 0), 17) == (1, 1)


def test_lane_to_pixel_out_of_range(wave_cfg):
    """Test lanes outside the wave are rejected"""
    with pytest.raises(ValueError, match="out of range"):
        WaveService.lane_to_pixel(wave_cfg, (0, 0), 32)


def test_quad_footprint(wave_cfg):
    """Test fixed 2x2 quads anchored at even coordinates"""
    table = WaveService.build_quad_footprint(wave_cfg)

    assert table.kind is FootprintKind.QUAD
    assert table.footprint_size == 4
    assert table.table[0] == [0, 1, 8, 9]
    assert table.table[9] == [9, 0, 1, 8]

    small = WaveService.build_quad_footprint(WaveConfig.from_shape(4, 4))
    assert set(small.table[5]) == {0, 1, 4, 5}


def test_quad_footprint_partition(wave_cfg):
    """Test the four lanes of each quad share the same set"""
    table = WaveService.build_quad_footprint(wave_cfg)
    groups = WaveService.sharing_groups(table)

    assert len(groups) == 8
    assert [0, 1, 8, 9] in groups
    for group in groups:
        assert all(set(table.table[lane]) == set(group) for lane in group)


def test_quad_footprint_odd_shape():
    """Test quads need an even wave shape"""
    with pytest.raises(ValueError, match="even"):
        WaveService.build_quad_footprint(WaveConfig.from_shape(3, 3))


def test_square_footprint_interior(wave_cfg):
    """Test an interior lane gets the block centered on it"""
    table = WaveService.build_square_footprint(wave_cfg, 3)
    lane = wave_cfg.lane_at(3, 1)

    assert table.table[lane] == [11, 2, 3, 4, 10, 12, 18, 19, 20]


def test_square_footprint_clamped(wave_cfg):
    """Test blocks near edges shift to stay inside the wave"""
    three = WaveService.build_square_footprint(wave_cfg, 3)
    assert three.table[0] == [0, 1, 2, 8, 9, 10, 16, 17, 18]

    two = WaveService.build_square_footprint(wave_cfg, 2)
    assert two.table[wave_cfg.lane_at(7, 3)] == [31, 22, 23, 30]


def test_square_footprint_too_large(wave_cfg):
    """Test a block larger than the wave is rejected"""
    with pytest.raises(ValueError, match="does not fit"):
        WaveService.build_square_footprint(wave_cfg, 5)


def test_footprint_invariants_hold(wave_cfg):
    """Test self-inclusion, containment and uniform size for every builder"""
    tables = [
        WaveService.build_quad_footprint(wave_cfg),
        WaveService.build_self_footprint(wave_cfg),
    ] + [WaveService.build_square_footprint(wave_cfg, size) for size in (2, 3, 4)]

    for table in tables:
        sizes = {len(row) for row in table.table}
        assert sizes == {table.footprint_size}
        for lane, row in enumerate(table.table):
            assert row[0] == lane
            assert all(0 <= other < wave_cfg.lanes for other in row)


def test_footprint_table_rejects_missing_self():
    """Test a lane must appear in its own footprint"""
    rows = [[(lane + 1) % 8] for lane in range(8)]
    with pytest.raises(ValidationError, match="missing from its own footprint"):
        FootprintTable(lanes=8, shape=(4, 2), footprint_size=1, kind=FootprintKind.SPARSE, table=rows)


def test_footprint_table_rejects_outside_wave():
    """Test footprints cannot read lanes outside the wave"""
    rows = [[lane, 9] for lane in range(8)]
    with pytest.raises(ValidationError, match="outside the wave"):
        FootprintTable(lanes=8, shape=(4, 2), footprint_size=2, kind=FootprintKind.SPARSE, table=rows)


def test_footprint_table_rejects_ragged_rows():
    """Test all footprints have the same size"""
    rows = [[lane] for lane in range(8)]
    rows[3] = [3, 4]
    with pytest.raises(ValidationError, match="expected 1"):
        FootprintTable(lanes=8, shape=(4, 2), footprint_size=1, kind=FootprintKind.SPARSE, table=rows)


def test_footprint_table_rejects_repeats():
    """Test a footprint cannot list a lane twice"""
    rows = [[lane, lane] for lane in range(8)]
    with pytest.raises(ValidationError, match="repeats"):
        FootprintTable(lanes=8, shape=(4, 2), footprint_size=2, kind=FootprintKind.SPARSE, table=rows)


def test_footprint_set_cycles_frames(wave_cfg):
    """Test frame tables cycle with the frame index"""
    quad = WaveService.build_quad_footprint(wave_cfg)
    square = WaveService.build_square_footprint(wave_cfg, 2)
    footprints = FootprintSet(frames=[quad, square])

    assert footprints.for_frame(0) is quad
    assert footprints.for_frame(3) is square


def test_footprint_set_rejects_mixed_sizes(wave_cfg):
    """Test frames must share wave shape and footprint size"""
    with pytest.raises(ValidationError, match="must share"):
        FootprintSet(
            frames=[
                WaveService.build_quad_footprint(wave_cfg),
                WaveService.build_square_footprint(wave_cfg, 3),
            ]
        )


def test_wave_read_returns_footprint_samples(wave_cfg):
    """Test wave_read follows the footprint order"""
    table = WaveService.build_quad_footprint(wave_cfg)
    shared = WaveService.wave_read(_records(wave_cfg), table, 9)

    assert [sample.texel_coords[0] for sample in shared] == [9, 0, 1, 8]


def test_wave_read_identical_samples(wave_cfg):
    """Test lanes that drew the same texel share identical samples"""
    sample = LaneSample(texel_coords=(2, 2), value=[0.5], pmf=1.0)
    records = [
        LaneRecord(lane=lane, pixel=wave_cfg.lane_xy(lane), sample=sample)
        for lane in range(wave_cfg.lanes)
    ]
    shared = WaveService.wave_read(records, WaveService.build_quad_footprint(wave_cfg), 0)

    assert len(shared) == 4
    assert all(item.texel_coords == (2, 2) and item.value[0] == 0.5 for item in shared)


def test_wave_read_inactive_lane(wave_cfg):
    """Test reading an inactive lane is an error"""
    table = WaveService.build_quad_footprint(wave_cfg)
    records = _records(wave_cfg, inactive={9})

    with pytest.raises(InactiveLaneError, match="inactive lane 9"):
        WaveService.wave_read(records, table, 0)

    assert len(WaveService.wave_read(records, table, 2)) == 4


def test_wave_read_record_count(wave_cfg):
    """Test wave_read needs one record per lane"""
    with pytest.raises(ValueError, match="lane records"):
        WaveService.wave_read(_records(wave_cfg)[:10], WaveService.build_self_footprint(wave_cfg), 0)


def test_lane_sample_requires_positive_pmf():
    """Test samples must have been drawn with nonzero probability"""
    with pytest.raises(ValidationError):
        LaneSample(texel_coords=(0, 0), value=[1.0], pmf=0.0)


def test_wave_tiling_padding(wave_cfg):
    """Test framebuffers are padded to whole waves"""
    tiling = WaveService.wave_tiling(wave_cfg, 20, 6)

    assert (tiling.waves_x, tiling.waves_y) == (3, 2)
    assert tiling.padded_size == (24, 8)
    assert tiling.wave_count == 6

    pixels = tiling.lane_pixels()
    assert pixels.shape == (6, 32, 2)
    assert tuple(pixels[4, 9]) == (9, 5)
    assert int(tiling.active_mask().sum()) == 120


def test_footprint_from_spec(wave_cfg, tmp_path):
    """Test footprint names resolve to tables"""
    assert WaveService.footprint_from_spec("quad", wave_cfg).frames[0].kind is FootprintKind.QUAD
    assert WaveService.footprint_from_spec("square3", wave_cfg).frames[0].footprint_size == 9
    assert WaveService.footprint_from_spec("self", wave_cfg).frames[0].footprint_size == 1

    path = WaveService.save_footprints(WaveService.build_square_footprint(wave_cfg, 2), tmp_path / "t.json")
    loaded = WaveService.footprint_from_spec(f"sparse:{path}", wave_cfg)
    assert loaded.frames[0].table == WaveService.build_square_footprint(wave_cfg, 2).table

    with pytest.raises(ValueError, match="Unknown footprint"):
        WaveService.footprint_from_spec("hexagon", wave_cfg)
    with pytest.raises(ValueError, match="does not match wave"):
        WaveService.footprint_from_spec(f"sparse:{path}", WaveConfig.from_shape(16, 2))


def test_save_and_load_frame_set(wave_cfg, tmp_path):
    """Test multi-frame tables are stored under a frames key"""
    tables = [WaveService.build_quad_footprint(wave_cfg), WaveService.build_square_footprint(wave_cfg, 2)]
    path = WaveService.save_footprints(tables, tmp_path / "frames.json")

    loaded = WaveService.load_footprints(path)

    assert '"frames"' in path.read_text()
    assert [table.table for table in loaded.frames] == [table.table for table in tables]


def test_load_footprints_missing(tmp_path):
    """Test loading a missing table file"""
    with pytest.raises(FileNotFoundError, match="not found"):
        WaveService.load_footprints(tmp_path / "missing.json")


def test_footprint_table_json_layout(wave_cfg):
    """Test the serialized table keeps plain lane ids"""
    payload = WaveService.build_quad_footprint(wave_cfg).model_dump(mode="json")

    assert payload["kind"] == "quad"
    assert payload["shape"] == [8, 4]
    assert payload["table"][9] == [9, 0, 1, 8]
    assert np.asarray(payload["table"]).shape == (32, 4)
