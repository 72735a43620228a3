#!/usr/bin/env python3
"""
Logging utilities for the higher-derivative Klein-Gordon toolkit

All toolkit loggers are children of one package logger ('hdkg') that owns
the handlers. Console output goes to stderr; stdout carries CLI reports.
"""

import logging
import sys
from typing import Optional
from pathlib import Path

try:
    from ..config import config
except ImportError:
    # Handle direct execution
    import os
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from config import config

ROOT_LOGGER = 'hdkg'

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logger(
    name: str = ROOT_LOGGER,
    log_file: Optional[str] = None,
    level: Optional[int] = None
) -> logging.Logger:
    """
    Configure the package logger once and return `name` beneath it

    Args:
        name: 'hdkg' or a dotted child such as 'hdkg.solver'
        log_file: Optional log file path (falls back to LOG_FILE)
        level: Optional log level override

    Returns:
        Logger that propagates to the package handlers
    """
    root = logging.getLogger(ROOT_LOGGER)
    if not root.handlers:
        log_level = level or config.get_log_level()
        root.setLevel(log_level)
        root.propagate = False
        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)

        console_handler = logging.StreamHandler(sys.stderr)
        console_handler.setFormatter(formatter)
        root.addHandler(console_handler)

        log_file = log_file or config.LOG_FILE or None
        if log_file:
            try:
                Path(log_file).parent.mkdir(parents=True, exist_ok=True)
                file_handler = logging.FileHandler(log_file, encoding='utf-8')
                file_handler.setFormatter(formatter)
                root.addHandler(file_handler)
            except OSError as e:
                root.warning(f"Could not setup file logging: {e}")

    return logging.getLogger(name)


def set_log_level(level: int) -> None:
    """Change the level of every toolkit logger at once (--log-level)"""
    setup_logger().setLevel(level)


def get_model_logger() -> logging.Logger:
    """Dispersion roots and propagators"""
    return setup_logger(f'{ROOT_LOGGER}.model')


def get_solver_logger() -> logging.Logger:
    """Grids, solvers, energy-momentum tensor and mode dynamics"""
    return setup_logger(f'{ROOT_LOGGER}.solver')


def get_cli_logger() -> logging.Logger:
    """Command-line front end"""
    return setup_logger(f'{ROOT_LOGGER}.cli')
