"""Shared fixtures for the generated-scene calibration runs."""

import pytest

from src.config import Settings
from src.core.logging import configure_logging


@pytest.fixture(scope="session", autouse=True)
def quiet_solvers():
    """Per-iteration solver records would flood the captured output."""
    configure_logging("WARNING")


@pytest.fixture(scope="module")
def settings() -> Settings:
    return Settings()
