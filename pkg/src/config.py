#!/usr/bin/env python3
"""
Configuration module for the higher-derivative Klein-Gordon toolkit
Centralized configuration management with environment variables
"""

import os
import logging
from typing import Optional

import psutil
from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _positive_int(raw: str) -> Optional[int]:
    try:
        value = int(str(raw).strip())
    except ValueError:
        return None
    return value if value >= 1 else None


class Config:
    """Application configuration class"""

    VERSION = "1.0.0"

    # Development Settings
    LOG_LEVEL: str = os.getenv('LOG_LEVEL', 'INFO')
    LOG_FILE: str = os.getenv('LOG_FILE', '')

    # Worker pool for parameter sweeps (empty -> number of logical CPUs)
    HDKG_THREADS: str = os.getenv('HDKG_THREADS', '')

    # Root report cache (parsed by cache_size, checked by validate)
    HDKG_CACHE_SIZE: str = os.getenv('HDKG_CACHE_SIZE', '64')
    DEFAULT_CACHE_SIZE = 64

    # Order caps
    POLY_MAX_ORDER = 20       # 20! < 2**63, exact integer coefficients
    EMT_MAX_ORDER = 4         # 7!! = 105 pairings per contraction
    EMT_GRID_MAX_ORDER = 2    # closed forms only on grids
    ODE_MAX_ORDER = 10

    # Pole / shell / guard thresholds (q = a^2 p^2 units unless noted)
    DELTA_POLE = 1e-9
    DELTA_SHELL = 1e-6
    AMPLIFICATION_CAP = 1e12
    BLOWUP_THRESHOLD = 1e12
    POPULATED_MODE_RTOL = 1e-13

    # Root finding
    REAL_ROOT_TOL = 1e-8
    NEWTON_MAX_ITER = 100
    NEWTON_RTOL = 1e-14

    # Grids
    COMMENSURABILITY_RTOL = 1e-9
    REALITY_TOL = 1e-12

    # Propagator
    DEFAULT_FEYNMAN_EPS = 1e-6

    @classmethod
    def validate(cls) -> bool:
        """Validate environment-provided configuration parameters"""
        problems = []

        if cls.LOG_LEVEL.upper() not in ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL'):
            problems.append(f"LOG_LEVEL={cls.LOG_LEVEL!r}")

        if cls.HDKG_THREADS and _positive_int(cls.HDKG_THREADS) is None:
            problems.append(f"HDKG_THREADS={cls.HDKG_THREADS!r}")

        if _positive_int(cls.HDKG_CACHE_SIZE) is None:
            problems.append(f"HDKG_CACHE_SIZE={cls.HDKG_CACHE_SIZE!r}")

        if problems:
            raise ValueError(
                f"Invalid configuration: {', '.join(problems)}"
            )

        return True

    @classmethod
    def get_log_level(cls) -> int:
        """Get logging level from configuration"""
        level_map = {
            'DEBUG': logging.DEBUG,
            'INFO': logging.INFO,
            'WARNING': logging.WARNING,
            'ERROR': logging.ERROR,
            'CRITICAL': logging.CRITICAL
        }
        return level_map.get(cls.LOG_LEVEL.upper(), logging.INFO)

    @classmethod
    def worker_count(cls) -> int:
        """Upper bound on worker threads for independent sweep cells"""
        threads = _positive_int(cls.HDKG_THREADS)
        if threads is not None:
            return threads
        return max(1, psutil.cpu_count(logical=True) or 1)

    @classmethod
    def cache_size(cls) -> int:
        """Root report cache entries; a malformed value falls back to the default"""
        size = _positive_int(cls.HDKG_CACHE_SIZE)
        return cls.DEFAULT_CACHE_SIZE if size is None else size

    @classmethod
    def caps(cls) -> dict:
        """Order caps reported by `--version`"""
        return {
            'poly_max_order': cls.POLY_MAX_ORDER,
            'emt_max_order': cls.EMT_MAX_ORDER,
            'emt_grid_max_order': cls.EMT_GRID_MAX_ORDER,
            'ode_max_order': cls.ODE_MAX_ORDER,
        }


# Create global config instance
config = Config()
