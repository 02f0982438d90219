"""
Logging setup for carreau-stokes

Diagnostics always go to stderr; standard output is reserved for data.
"""

import logging
import sys
from typing import IO, Optional, Union

try:
    from pythonjsonlogger.json import JsonFormatter
except ImportError:  # python-json-logger < 3
    from pythonjsonlogger.jsonlogger import JsonFormatter

PACKAGE_LOGGER = "carreau_stokes"
TEXT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
JSON_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"


def configure_logging(level: Union[int, str] = logging.WARNING, json_format: bool = True,
                      stream: Optional[IO[str]] = None) -> logging.Logger:
    """Install a single stderr handler on the package logger

    Extra fields passed via `extra=` (Picard increments, theta range, ...)
    become top-level keys of each JSON record.
    """
    logger = logging.getLogger(PACKAGE_LOGGER)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler = logging.StreamHandler(stream if stream is not None else sys.stderr)
    if json_format:
        handler.setFormatter(JsonFormatter(JSON_FORMAT))
    else:
        handler.setFormatter(logging.Formatter(TEXT_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False
    return logger
