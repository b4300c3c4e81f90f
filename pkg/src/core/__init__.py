"""Core infrastructure modules."""

from .logging import (
    bind_context,
    clear_context,
    configure_logging,
    frame_context,
    get_logger,
    unbind_context,
)
from .performance import PerformanceMonitor, measure_time

__all__ = [
    # Logging
    "bind_context",
    "clear_context",
    "configure_logging",
    "frame_context",
    "get_logger",
    "unbind_context",
    # Performance
    "PerformanceMonitor",
    "measure_time",
]
