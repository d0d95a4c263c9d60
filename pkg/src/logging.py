import logging
import sys
from enum import StrEnum


LOG_FORMAT_DEBUG = "%(levelname)s:%(name)s:%(message)s:%(funcName)s:%(lineno)d"
LOG_FORMAT = "%(levelname)s:%(name)s:%(message)s"


class LogLevels(StrEnum):
    info = "INFO"
    warn = "WARN"
    error = "ERROR"
    debug = "DEBUG"


def configure_logging(log_level: str = LogLevels.error, stream=None):
    """
    Sends workbench logs to stderr, leaving stdout to the report. Safe to
    call once per command run: the previous handlers are replaced.
    """
    log_level = str(log_level).upper()
    log_levels = [level.value for level in LogLevels]
    stream = stream or sys.stderr

    if log_level not in log_levels:
        logging.basicConfig(level=LogLevels.error, format=LOG_FORMAT, stream=stream, force=True)
        return

    if log_level == LogLevels.debug:
        logging.basicConfig(level=log_level, format=LOG_FORMAT_DEBUG, stream=stream, force=True)
        return

    logging.basicConfig(level=log_level, format=LOG_FORMAT, stream=stream, force=True)
