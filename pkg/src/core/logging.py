"""Structured logging for calibration runs.

Every record goes to stderr so that stdout stays free for command output.
Pipeline code binds the running command and the current frame id as context;
numpy scalars and small arrays in event fields are converted to plain Python
values before rendering, so the JSON renderer never chokes on solver output.
"""

import logging
import sys
from collections.abc import Iterator
from contextlib import contextmanager
from typing import Any

import numpy as np
import structlog
from structlog.typing import EventDict, WrappedLogger

# Arrays larger than this are summarised instead of dumped into the log line
MAX_INLINE_ARRAY = 16


def _plain_numpy(_: WrappedLogger, __: str, event_dict: EventDict) -> EventDict:
    for key, value in event_dict.items():
        if isinstance(value, np.generic):
            event_dict[key] = value.item()
        elif isinstance(value, np.ndarray):
            if value.size <= MAX_INLINE_ARRAY:
                event_dict[key] = value.tolist()
            else:
                event_dict[key] = f"<ndarray shape={value.shape} dtype={value.dtype}>"
    return event_dict


def configure_logging(log_level: str = "INFO", json_output: bool = False) -> None:
    """Configure structlog and the stdlib root logger.

    Args:
        log_level: Logging level name (DEBUG, INFO, WARNING, ERROR), any case
        json_output: Render one JSON object per line instead of console text
    """
    level = getattr(logging, log_level.upper())
    renderer: Any = (
        structlog.processors.JSONRenderer()
        if json_output
        else structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())
    )
    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.StackInfoRenderer(),
            structlog.dev.set_exc_info,
            structlog.processors.TimeStamper(fmt="iso"),
            _plain_numpy,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(level),
        context_class=dict,
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )

    # scipy and Pillow log through the stdlib
    logging.basicConfig(format="%(message)s", stream=sys.stderr, level=level)


def get_logger(name: str) -> structlog.typing.FilteringBoundLogger:
    return structlog.get_logger(name)


def bind_context(**kwargs: Any) -> None:
    """Bind context variables to all subsequent log messages.

    Example:
        bind_context(command="calibrate-thermal")
        logger.info("rough_calibration_done")  # carries command=calibrate-thermal
    """
    structlog.contextvars.bind_contextvars(**kwargs)


def unbind_context(*keys: str) -> None:
    structlog.contextvars.unbind_contextvars(*keys)


def clear_context() -> None:
    structlog.contextvars.clear_contextvars()


@contextmanager
def frame_context(frame_id: str) -> Iterator[None]:
    """Tag every record emitted inside the block with ``frame=frame_id``."""
    bind_context(frame=frame_id)
    try:
        yield
    finally:
        unbind_context("frame")
