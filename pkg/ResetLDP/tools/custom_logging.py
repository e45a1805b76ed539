"""Logger setup for the command line runs."""
import enum
import logging
import sys
from typing import Optional

from .resources import plugin_name
from .settings import get_setting

LOG_FORMAT = "%(asctime)s - [%(levelname)-7s] - %(name)s - %(message)s"
DETAILS_FORMAT = "%(details)s"


class LogTarget(enum.Enum):
    """Log targets and their default levels"""

    STREAM = {"id": "stream", "default": "INFO"}
    FILE = {"id": "file", "default": "DEBUG"}

    @property
    def id(self) -> str:
        return self.value["id"]

    @property
    def default_level(self) -> str:
        return self.value["default"]


class DetailsFormatter(logging.Formatter):
    """Appends the ``details`` extra of a record, when given."""

    def format(self, record: logging.LogRecord) -> str:
        message = super().format(record)
        details = getattr(record, "details", None)
        if details and details != record.getMessage():
            message = f"{message}\n    {details}"
        return message


def get_log_level_key(target: LogTarget) -> str:
    return f"{target.id}_log_level"


def get_log_level_name(target: LogTarget) -> str:
    return str(get_setting(get_log_level_key(target), target.default_level)).upper()


def get_log_level(target: LogTarget) -> int:
    return logging.getLevelName(get_log_level_name(target))


def setup_logger(
    logger_name: Optional[str] = None, log_file: Optional[str] = None
) -> logging.Logger:
    """Attach a stderr handler, and a file handler when a log file is given."""
    logger = logging.getLogger(logger_name or plugin_name())
    teardown_logger(logger.name)
    logger.propagate = False

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(DetailsFormatter(LOG_FORMAT))
    stream_handler.setLevel(get_log_level(LogTarget.STREAM))
    logger.addHandler(stream_handler)
    levels = [stream_handler.level]

    if log_file:
        file_handler = logging.FileHandler(log_file, encoding="utf-8")
        file_handler.setFormatter(DetailsFormatter(LOG_FORMAT))
        file_handler.setLevel(get_log_level(LogTarget.FILE))
        logger.addHandler(file_handler)
        levels.append(file_handler.level)

    logger.setLevel(min(levels))
    return logger


def setup_task_logger(
    logger_name: Optional[str] = None, log_file: Optional[str] = None
) -> logging.Logger:
    """Separate logger for chunked background work, e.g. simulation chunks."""
    return setup_logger(f"{logger_name or plugin_name()}_task", log_file)


def teardown_logger(logger_name: str) -> None:
    logger = logging.getLogger(logger_name)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
