"""
Single place to configure logging.
"""
import logging
import sys

from .config import settings

def get_logger(name: str) -> logging.Logger:
    logger = logging.getLogger(f"mvtangent.{name}")
    if logger.handlers:
        return logger  # already configured

    logger.setLevel(getattr(logging, settings.log_level.upper(), logging.INFO))
    # stdout carries the CLI's JSON artifacts
    handler = logging.StreamHandler(sys.stderr)
    formatter = logging.Formatter(
        "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
    )
    handler.setFormatter(formatter)
    logger.addHandler(handler)
    logger.propagate = False
    return logger
