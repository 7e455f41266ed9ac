"""Logging configuration for hardy-refine.

Diagnostics (panel counts, kink splits, PSD clips, findings) go to stderr so
that report files stay byte-identical between runs.
"""

import logging
import sys
from enum import Enum
from typing import TextIO

ROOT_LOGGER = "hardy_refine"


class LogLevel(Enum):
    """Log level configuration for the CLI."""

    # Only errors
    SILENT = "silent"
    # Warnings (non-converged integrals, findings) and above
    QUIET = "quiet"
    # Info and above
    DEFAULT = "default"
    # Debug messages from every module
    VERBOSE = "verbose"

    def to_level_filter(self) -> int:
        """Convert LogLevel to Python logging level."""
        mapping = {
            LogLevel.SILENT: logging.ERROR,
            LogLevel.QUIET: logging.WARNING,
            LogLevel.DEFAULT: logging.INFO,
            LogLevel.VERBOSE: logging.DEBUG,
        }
        return mapping[self]


class ColoredFormatter(logging.Formatter):
    """Verbose formatter: seconds since start, worker process, module and level."""

    COLORS = {
        "DEBUG": "\033[36m",  # cyan
        "INFO": "\033[32m",  # green
        "WARNING": "\033[33m",  # yellow
        "ERROR": "\033[31m",  # red
        "CRITICAL": "\033[35m",  # magenta
        "RESET": "\033[0m",
    }

    def __init__(self, use_colors: bool = True):
        """Initialize the formatter.

        Args:
            use_colors: Whether to use ANSI colors in output.
        """
        super().__init__()
        self.use_colors = use_colors

    def format(self, record: logging.LogRecord) -> str:
        """Format a log record as ``[elapsed][worker][module][LEVEL] message``."""
        elapsed = f"{record.relativeCreated / 1000:9.3f}s"

        name = record.name
        if name.startswith(ROOT_LOGGER + "."):
            name = name[len(ROOT_LOGGER) + 1 :]

        # Suite instances run in a process pool; the main process is left out.
        prefix = f"[{elapsed}]"
        if record.processName != "MainProcess":
            prefix += f"[{record.processName}]"

        level = record.levelname
        if self.use_colors:
            color = self.COLORS.get(level, "")
            reset = self.COLORS["RESET"]
            return f"{prefix}[{color}{name}{reset}][{level}] {record.getMessage()}"
        return f"{prefix}[{name}][{level}] {record.getMessage()}"


class QuietFormatter(logging.Formatter):
    """Message-only formatter for the non-verbose levels."""

    def format(self, record: logging.LogRecord) -> str:
        if record.levelno >= logging.WARNING:
            return f"{record.levelname.lower()}: {record.getMessage()}"
        return record.getMessage()


def set_up_logging(
    level: LogLevel = LogLevel.DEFAULT,
    stream: TextIO | None = None,
) -> None:
    """Set up logging for hardy-refine.

    Args:
        level: The log level to use.
        stream: Output stream (defaults to stderr).
    """
    if stream is None:
        stream = sys.stderr

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(level.to_level_filter())
    logger.handlers.clear()

    handler = logging.StreamHandler(stream)
    handler.setLevel(level.to_level_filter())

    use_colors = hasattr(stream, "isatty") and stream.isatty()
    if level == LogLevel.VERBOSE:
        handler.setFormatter(ColoredFormatter(use_colors=use_colors))
    else:
        handler.setFormatter(QuietFormatter())

    logger.addHandler(handler)
    logger.propagate = False


def get_logger(name: str | None = None) -> logging.Logger:
    """Get a logger instance.

    Args:
        name: Optional name for the logger (prefixed with 'hardy_refine.').

    Returns:
        Logger instance.
    """
    if name:
        return logging.getLogger(f"{ROOT_LOGGER}.{name}")
    return logging.getLogger(ROOT_LOGGER)


def debug(msg: str, *args, logger_name: str | None = None, **kwargs) -> None:
    """Log a debug message."""
    get_logger(logger_name).debug(msg, *args, **kwargs)


def info(msg: str, *args, logger_name: str | None = None, **kwargs) -> None:
    """Log an info message."""
    get_logger(logger_name).info(msg, *args, **kwargs)


def error(msg: str, *args, logger_name: str | None = None, **kwargs) -> None:
    """Log an error message."""
    get_logger(logger_name).error(msg, *args, **kwargs)
