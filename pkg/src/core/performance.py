"""Performance monitoring utilities for the calibration pipelines.

This module provides a decorator and a context manager that log elapsed
wall-clock time of pipeline stages.
"""

import functools
import time
from collections.abc import Callable
from typing import Any, TypeVar

from src.core.logging import get_logger

logger = get_logger(__name__)

F = TypeVar("F", bound=Callable[..., Any])


def measure_time(func: F) -> F:
    """Decorator to measure and log function execution time.

    Usage:
        @measure_time
        def calibrate_laser(...):
            ...
    """

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        start_time = time.perf_counter()
        try:
            return func(*args, **kwargs)
        finally:
            elapsed = time.perf_counter() - start_time
            logger.info("timed", operation=func.__name__, seconds=round(elapsed, 3))

    return wrapper  # type: ignore[return-value]


class PerformanceMonitor:
    """Context manager for monitoring performance of code blocks.

    Usage:
        with PerformanceMonitor("rough_calibration") as monitor:
            pose = rough_calibrate(...)
        monitor.elapsed
    """

    def __init__(self, operation_name: str):
        self.operation_name = operation_name
        self.start_time = 0.0
        self.elapsed = 0.0

    def __enter__(self):
        self.start_time = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.elapsed = time.perf_counter() - self.start_time
        logger.info("timed", operation=self.operation_name, seconds=round(self.elapsed, 3))
        return False
