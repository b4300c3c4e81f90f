"""Tests for logging configuration."""

import json
from unittest.mock import patch

import numpy as np
import structlog

from src.core.logging import (
    bind_context,
    clear_context,
    configure_logging,
    frame_context,
    get_logger,
    unbind_context,
)


class TestLogging:
    """Tests for logging module."""

    @patch("src.core.logging.structlog")
    @patch("src.core.logging.logging")
    def test_configure_logging(self, mock_logging, mock_structlog):
        """Test logging configuration."""
        configure_logging("DEBUG")

        mock_structlog.configure.assert_called_once()
        mock_logging.basicConfig.assert_called_once()
        call_args = mock_logging.basicConfig.call_args
        assert call_args[1]["level"] == mock_logging.DEBUG

    @patch("src.core.logging.structlog")
    @patch("src.core.logging.logging")
    def test_configure_logging_json(self, mock_logging, mock_structlog):
        """JSON output swaps the console renderer for the JSON renderer."""
        configure_logging("info", json_output=True)

        processors = mock_structlog.configure.call_args[1]["processors"]
        assert processors[-1] is mock_structlog.processors.JSONRenderer.return_value
        mock_structlog.dev.ConsoleRenderer.assert_not_called()

    @patch("src.core.logging.structlog")
    def test_get_logger(self, mock_structlog):
        get_logger("test_logger")
        mock_structlog.get_logger.assert_called_once_with("test_logger")

    @patch("src.core.logging.structlog")
    def test_bind_context(self, mock_structlog):
        bind_context(frame="0003", command="calibrate-thermal")
        mock_structlog.contextvars.bind_contextvars.assert_called_once_with(
            frame="0003", command="calibrate-thermal"
        )

    @patch("src.core.logging.structlog")
    def test_unbind_context(self, mock_structlog):
        unbind_context("frame", "command")
        mock_structlog.contextvars.unbind_contextvars.assert_called_once_with("frame", "command")

    @patch("src.core.logging.structlog")
    def test_clear_context(self, mock_structlog):
        clear_context()
        mock_structlog.contextvars.clear_contextvars.assert_called_once()


class TestFrameContext:
    def setup_method(self):
        structlog.contextvars.clear_contextvars()

    def test_frame_bound_inside_block(self):
        with frame_context("0007"):
            assert structlog.contextvars.get_contextvars() == {"frame": "0007"}
        assert structlog.contextvars.get_contextvars() == {}

    def test_frame_unbound_on_error(self):
        try:
            with frame_context("0007"):
                raise ValueError("boom")
        except ValueError:
            pass
        assert "frame" not in structlog.contextvars.get_contextvars()


class TestJsonRendering:
    def test_numpy_values_are_serialisable(self, capsys):
        configure_logging("INFO", json_output=True)
        get_logger("test").info(
            "solve_done", cost=np.float64(0.25), count=np.int64(3), step=np.zeros(3)
        )

        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["cost"] == 0.25
        assert record["count"] == 3
        assert record["step"] == [0.0, 0.0, 0.0]

    def test_large_arrays_are_summarised(self, capsys):
        configure_logging("INFO", json_output=True)
        get_logger("test").info("cloud", points=np.zeros((100, 3)))

        record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
        assert record["points"] == "<ndarray shape=(100, 3) dtype=float64>"
