"""Loguru configuration for command-line runs."""

import sys

from loguru import logger

from rac_grid.shared.settings import settings


def configure_logging(level: str | None = None) -> None:
    """Route loguru output to stderr at the configured level."""
    logger.remove()
    logger.add(sys.stderr, format=settings.log_format, level=(level or settings.log_level).upper())
