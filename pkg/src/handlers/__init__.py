#!/usr/bin/env python3
"""
Handlers package for the hdkg command line
Input validation, output formatting and the command implementations
"""

from .validators import InputValidator, ValidationResult, RunConfig, read_config_file, build_run_config
from .formatters import OutputFormatter, encode_grid, read_grid, read_modes, write_atomic
from .commands import cmd_roots, cmd_propagator, cmd_solve, cmd_emt, cmd_evolve

__all__ = [
    # Validation
    'InputValidator',
    'ValidationResult',
    'RunConfig',
    'read_config_file',
    'build_run_config',

    # Formatting and file I/O
    'OutputFormatter',
    'encode_grid',
    'read_grid',
    'read_modes',
    'write_atomic',

    # Commands
    'cmd_roots',
    'cmd_propagator',
    'cmd_solve',
    'cmd_emt',
    'cmd_evolve',
]
