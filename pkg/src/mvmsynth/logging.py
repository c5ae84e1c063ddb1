"""Logging helpers for mvmsynth.

Every module logs to a child of the ``mvmsynth`` logger
(``logging.getLogger("mvmsynth.training")`` etc.). Applications that embed the
package keep full control; the CLI calls :func:`configure_logging` once.
"""

from __future__ import annotations

import logging
import time
from collections.abc import Iterator
from contextlib import contextmanager

LOGGER_NAME = "mvmsynth"
DEFAULT_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_DATEFMT = "%H:%M:%S"

# matplotlib and PIL are chatty at DEBUG (font scans, PNG chunks)
NOISY_LOGGERS: tuple[str, ...] = ("matplotlib", "PIL")

_handler: logging.Handler | None = None


def get_logger(name: str | None = None) -> logging.Logger:
    """Return the package logger, or one of its children (``mvmsynth.<name>``)."""
    if name:
        return logging.getLogger(f"{LOGGER_NAME}.{name}")
    return logging.getLogger(LOGGER_NAME)


def configure_logging(
    level: str | None = None,
    *,
    force: bool = False,
    fmt: str = DEFAULT_FORMAT,
    datefmt: str = DEFAULT_DATEFMT,
    capture_warnings: bool = True,
) -> logging.Logger:
    """Attach one stream handler to the ``mvmsynth`` logger tree.

    Later calls only change the level; ``force`` replaces the handler.
    Plotting libraries are held at WARNING, and with ``capture_warnings``
    numpy / torch warnings are emitted through the same handler.
    """
    global _handler
    logger = get_logger()
    if level:
        logger.setLevel(level.upper())
    if _handler is not None and not force:
        return logger

    warnings_logger = logging.getLogger("py.warnings")
    if _handler is not None:
        logger.removeHandler(_handler)
        warnings_logger.removeHandler(_handler)
    _handler = logging.StreamHandler()
    _handler.setFormatter(logging.Formatter(fmt=fmt, datefmt=datefmt))
    logger.addHandler(_handler)
    logger.propagate = False

    for name in NOISY_LOGGERS:
        noisy = logging.getLogger(name)
        if noisy.getEffectiveLevel() < logging.WARNING:
            noisy.setLevel(logging.WARNING)
    if capture_warnings:
        logging.captureWarnings(True)
        if not warnings_logger.handlers:
            warnings_logger.addHandler(_handler)
            warnings_logger.propagate = False
    return logger


class Timer:
    """Wall-clock timer; ``elapsed`` keeps running until the block exits."""

    def __init__(self) -> None:
        self.start = time.perf_counter()
        self.end: float | None = None

    @property
    def elapsed(self) -> float:
        end = self.end if self.end is not None else time.perf_counter()
        return end - self.start


@contextmanager
def log_duration(
    logger: logging.Logger, what: str, level: int = logging.INFO
) -> Iterator[Timer]:
    """Time a block and log ``"<what> finished in Xs"`` when it exits."""
    timer = Timer()
    try:
        yield timer
    finally:
        timer.end = time.perf_counter()
        logger.log(level, "%s finished in %.2fs", what, timer.elapsed)
