"""Logging setup and helpers shared by the scheduling stages"""

import logging
import logging.handlers
import os
import re
import time
from contextlib import contextmanager
from pathlib import Path
from typing import Iterable, Iterator

LOG_FILE_NAME = "menroll.log"
LOG_FORMAT = "%(asctime)s [%(levelname)s] %(name)s - %(message)s"
# A full rolling run logs a few hundred lines
LOG_MAX_BYTES = 1024 * 1024
LOG_BACKUPS = 3

_CONTROL_CHARS = re.compile(r"[\x00-\x08\x0b\x0c\x0e-\x1f\x7f]")


def log_dir() -> Path:
    """``MENROLL_LOG_DIR`` or ``~/.menroll/logs``"""
    configured = os.getenv("MENROLL_LOG_DIR")
    return Path(configured) if configured else Path.home() / ".menroll" / "logs"


def debug_enabled() -> bool:
    return os.getenv("MENROLL_DEBUG", "").lower() in ("1", "true", "yes", "on")


def _configure_root(directory: Path) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    formatter = logging.Formatter(LOG_FORMAT)
    handlers = [
        logging.handlers.RotatingFileHandler(
            str(directory / LOG_FILE_NAME), maxBytes=LOG_MAX_BYTES, backupCount=LOG_BACKUPS
        ),
        logging.StreamHandler(),
    ]
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if debug_enabled() else logging.INFO)
    for handler in handlers:
        handler.setFormatter(formatter)
        root.addHandler(handler)


def get_logger(name: str) -> logging.Logger:
    """Module logger; the first call configures file and console output"""

    if not logging.getLogger().handlers:
        try:
            _configure_root(log_dir())
        except OSError as exc:  # pragma: no cover - logging failure is non-critical
            logging.basicConfig(level=logging.INFO, format=LOG_FORMAT)
            logging.getLogger(__name__).error(f"Failed to configure file logging: {exc}")

    return logging.getLogger(name)


def sanitize_for_logging(value: str, max_length: int = 200) -> str:
    """Scenario-supplied text (names, station ids, paths) made safe for a log line

    Args:
        value: The string to sanitize
        max_length: Maximum length of the output string

    Returns:
        Single-line string without control characters
    """
    text = value if isinstance(value, str) else str(value)
    text = _CONTROL_CHARS.sub("", text.replace("\n", "\\n").replace("\r", "\\r"))
    if len(text) > max_length:
        text = text[:max_length] + "..."
    return text


def format_steps(steps: Iterable[int], limit: int = 8) -> str:
    """Step indices as ranges, e.g. ``"3-6, 9, 17-19"``

    At most ``limit`` ranges are shown; the rest are counted.
    """
    ordered = sorted({int(s) for s in steps})
    if not ordered:
        return "none"
    runs = []
    start = prev = ordered[0]
    for s in ordered[1:]:
        if s != prev + 1:
            runs.append((start, prev))
            start = s
        prev = s
    runs.append((start, prev))
    shown = [str(a) if a == b else f"{a}-{b}" for a, b in runs[:limit]]
    if len(runs) > limit:
        shown.append(f"... ({len(runs) - limit} more)")
    return ", ".join(shown)


@contextmanager
def log_stage(logger: logging.Logger, label: str) -> Iterator[None]:
    """Log the wall time of a stage at INFO, or its failure at ERROR"""
    started = time.monotonic()
    logger.debug(f"{label}: started")
    try:
        yield
    except Exception as exc:
        logger.error(f"{label}: failed after {time.monotonic() - started:.2f}s ({type(exc).__name__})")
        raise
    logger.info(f"{label}: done in {time.monotonic() - started:.2f}s")
