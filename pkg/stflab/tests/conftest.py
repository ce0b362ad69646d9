"""
Shared fixtures for all tests
"""

import json
import pytest
import tempfile
import os
from contextlib import contextmanager
import numpy as np
from sqlmodel import Session, create_engine, SQLModel
from click.testing import CliRunner

from stflab.app.models import (
    ExperimentRun,
    FilterKind,
    NoiseSource,
    Scene,
    Texture,
    WaveConfig,
)
from stflab.app.services import TextureService, WaveService


@pytest.fixture(scope="function")
def test_db():
    """Create a temporary test database"""
    with tempfile.NamedTemporaryFile(suffix=".db", delete=False) as f:
        test_db_path = f.name

    test_engine = create_engine(f"sqlite:///{test_db_path}")
    SQLModel.metadata.create_all(test_engine)

    yield test_engine

    test_engine.dispose()
    os.unlink(test_db_path)


@pytest.fixture
def test_session(test_db):
    """Create a test database session"""
    with Session(test_db) as session:
        yield session


@pytest.fixture
def mock_get_session(test_session):
    """Mock the get_session function to use test session"""

    @contextmanager
    def _get_session():
        yield test_session

    return _get_session


@pytest.fixture
def cli_runner():
    """Create a Click CLI test runner"""
    return CliRunner()


@pytest.fixture
def wave_cfg():
    """Default 8x4 wave"""
    return WaveConfig(lanes=32, shape=(8, 4))


@pytest.fixture
def quad_footprints(wave_cfg):
    return WaveService.footprint_from_spec("quad", wave_cfg)


@pytest.fixture
def self_footprints(wave_cfg):
    return WaveService.footprint_from_spec("self", wave_cfg)


@pytest.fixture
def ramp_texture():
    """8x8 single-channel ramp along x"""
    return TextureService.make_test_texture("ramp", 8)


@pytest.fixture
def constant_texture():
    """8x8 constant 0.5 texture"""
    return TextureService.make_test_texture("constant", 8, value=0.5)


@pytest.fixture
def noise_texture():
    """16x16 high-frequency random texture"""
    return TextureService.make_test_texture("noise", 16, seed=7)


@pytest.fixture
def two_by_two_texture():
    """2x2 texture with values 0, 1 / 2, 3"""
    return Texture.from_array(np.array([[0.0, 1.0], [2.0, 3.0]]))


@pytest.fixture
def noise_scene(noise_texture):
    """Zoomed-in scene over the random texture, one wave row tall padding included"""
    return Scene(albedo=noise_texture, zoom=4.0, resolution=(36, 18))


@pytest.fixture
def constant_scene(constant_texture):
    return Scene(albedo=constant_texture, zoom=2.0, resolution=(16, 8))


@pytest.fixture
def white_noise():
    return NoiseSource(kind="white", seed=3, label="white")


@pytest.fixture
def bilinear():
    return FilterKind.BILINEAR


@pytest.fixture
def scene_dir(tmp_path):
    """Temporary asset directory with textures and a scene JSON"""
    albedo = TextureService.make_test_texture("noise", 16, channels=3, seed=1)
    normals = TextureService.make_test_texture("normals", 16, seed=1)
    TextureService.save_texture(albedo, tmp_path / "albedo.pfm")
    TextureService.save_texture(normals, tmp_path / "normals.pfm")
    scene = {
        "albedo": "albedo.pfm",
        "normal_map": "normals.pfm",
        "zoom": 4.0,
        "uv_offset": [0.0, 0.0],
        "shading": {"mode": "blinn_phong", "exponent": 16.0},
        "resolution": [32, 16],
    }
    (tmp_path / "scene.json").write_text(json.dumps(scene))
    return tmp_path


@pytest.fixture
def sample_run(test_session):
    """Create a recorded experiment run"""
    run = ExperimentRun(
        command="sweep",
        estimator="wis",
        filter="bilinear",
        footprint="quad",
        noise="white",
        zoom=16.0,
        seed=0,
        frames=1,
        mse=0.001,
        psnr_db=30.0,
    )
    test_session.add(run)
    test_session.commit()
    test_session.refresh(run)
    return run


@pytest.fixture(autouse=True)
def setup_env(monkeypatch):
    """Setup test environment variables"""
    monkeypatch.setenv("DATABASE_URL", "sqlite:///:memory:")
    monkeypatch.setenv("APP_ENV", "testing")
    monkeypatch.setenv("DEBUG", "false")
    monkeypatch.delenv("SENTRY_DSN", raising=False)
