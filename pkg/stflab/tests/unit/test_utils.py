"""
Unit tests for logging helpers and file formats
"""

import pytest
import numpy as np
from unittest.mock import patch
from stflab.app.utils import (
    UnsupportedFormatError,
    init_sentry,
    log_action,
    log_artifact_written,
    log_contract_violation,
    log_error,
    log_experiment,
)
from stflab.app.utils import io


def test_init_sentry_with_dsn(monkeypatch):
    """Test Sentry initialization with DSN"""
    monkeypatch.setattr("stflab.app.config.settings.sentry_dsn", "https://fake@sentry.io/123")
    monkeypatch.setattr("stflab.app.config.settings.app_env", "production")

    with patch("sentry_sdk.init") as mock_init:
        init_sentry()
        mock_init.assert_called_once()
        args, kwargs = mock_init.call_args
        assert kwargs["dsn"] == "https://fake@sentry.io/123"
        assert kwargs["environment"] == "production"


def test_init_sentry_without_dsn(monkeypatch):
    """Test Sentry initialization without DSN"""
    monkeypatch.setattr("stflab.app.config.settings.sentry_dsn", None)

    with patch("sentry_sdk.init") as mock_init:
        init_sentry()
        mock_init.assert_not_called()


def test_log_action_decorator_success():
    """Test log_action decorator on successful execution"""

    @log_action("Render frame")
    def render(value):
        return value * 2

    with patch("stflab.app.utils.logging.logger.info") as mock_log:
        assert render(5) == 10
        mock_log.assert_called_once()
        assert mock_log.call_args[0][0].startswith("Render frame - Success - ")


def test_log_action_decorator_failure(monkeypatch):
    """Test log_action decorator on failure"""
    monkeypatch.setattr("stflab.app.config.settings.sentry_dsn", "https://fake@sentry.io/123")

    @log_action("Render frame")
    def failing():
        raise ValueError("Bad lane")

    with patch("stflab.app.utils.logging.logger.error") as mock_log:
        with patch("sentry_sdk.capture_exception") as mock_sentry:
            with pytest.raises(ValueError, match="Bad lane"):
                failing()
            assert "Failed" in mock_log.call_args[0][0]
            mock_sentry.assert_called_once()


def test_log_artifact_written(tmp_path):
    """Test artifact logging names the kind and path"""
    with patch("stflab.app.utils.logging.logger.info") as mock_log:
        log_artifact_written("noise mask", tmp_path / "m.bin", "dims=(8, 8, 1)")
        message = mock_log.call_args[0][0]
        assert "noise mask" in message
        assert "m.bin" in message
        assert "dims=(8, 8, 1)" in message


def test_log_experiment_without_sentry():
    """Test experiment logging stays local without a DSN"""
    with patch("stflab.app.utils.logging.logger.info") as mock_log:
        with patch("sentry_sdk.capture_message") as mock_sentry:
            log_experiment("sweep", {"zoom": 16}, {"psnr_db": 31.2})
            assert "Experiment sweep" in mock_log.call_args[0][0]
            mock_sentry.assert_not_called()


def test_log_error_with_context(monkeypatch):
    """Test logging error with context"""
    monkeypatch.setattr("stflab.app.config.settings.sentry_dsn", "https://fake@sentry.io/123")

    with patch("stflab.app.utils.logging.logger.error") as mock_log:
        with patch("sentry_sdk.push_scope"):
            with patch("sentry_sdk.capture_exception") as mock_capture:
                log_error(ValueError("Test error"), {"command": {"name": "render"}})
                mock_log.assert_called_once()
                mock_capture.assert_called_once()


def test_log_contract_violation():
    """Test contract violations are warnings"""
    with patch("stflab.app.utils.logging.logger.warning") as mock_log:
        log_contract_violation("wave_read", "lane 3 read inactive lane 9")
        assert "Contract violation - wave_read" in mock_log.call_args[0][0]


def test_decorators_preserve_function_metadata():
    """Test that decorators preserve function metadata"""

    @log_action("Example")
    def example_function():
        """Example docstring"""

    assert example_function.__name__ == "example_function"
    assert example_function.__doc__ == "Example docstring"


def test_srgb_to_linear():
    """Test the sRGB transfer curve at both segments"""
    values = io.srgb_to_linear(np.array([0.0, 0.04045, 0.5, 1.0]))
    np.testing.assert_allclose(values, [0.0, 0.04045 / 12.92, 0.214041, 1.0], atol=1e-6)


def test_mask_bin_header(tmp_path):
    """Test mask files carry the magic and dims"""
    path = tmp_path / "mask.bin"
    io.write_mask_bin(path, np.full((2, 3, 4), 0.25))

    blob = path.read_bytes()
    assert blob[:4] == b"STFT"
    assert len(blob) == 20 + 2 * 3 * 4 * 4
    assert io.read_mask_bin(path).shape == (2, 3, 4)


def test_mask_bin_rejects_short_file(tmp_path):
    """Test truncated mask files are rejected"""
    path = tmp_path / "short.bin"
    path.write_bytes(b"STFT")
    with pytest.raises(UnsupportedFormatError, match="too short"):
        io.read_mask_bin(path)


def test_csv_round_formatting(tmp_path):
    """Test floats are written with fixed precision"""
    path = tmp_path / "rows.csv"
    io.write_csv(path, ["estimator", "mse"], [["wis", 0.1234567891], ["onetap", 2]])

    header, rows = io.read_csv(path)

    assert header == ["estimator", "mse"]
    assert rows == [["wis", "0.123457"], ["onetap", "2"]]


def test_read_csv_missing(tmp_path):
    """Test reading a missing CSV"""
    with pytest.raises(FileNotFoundError, match="not found"):
        io.read_csv(tmp_path / "missing.csv")
