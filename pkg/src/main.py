#!/usr/bin/env python3
"""
Higher-derivative Klein-Gordon toolkit - command line entry point

Exit codes: 0 success, 2 validation error, 3 mathematical obstruction
(shell collision, amplification guard, pole), 1 internal failure.
"""

import argparse
import json
import logging
import sys
import os
from typing import List, Optional, TextIO

# Add src directory to path for imports
sys.path.insert(0, os.path.dirname(__file__))

from config import config
from utils.logger import get_cli_logger, set_log_level
from services.models import HDKGError
from handlers.commands import cmd_roots, cmd_propagator, cmd_solve, cmd_emt, cmd_evolve

# Initialize logger
logger = get_cli_logger()


def version_text() -> str:
    caps = config.caps()
    lines = [f"hdkg {config.VERSION}"]
    lines.extend(f"{name}={value}" for name, value in caps.items())
    return '\n'.join(lines)


def _add_model_flags(parser: argparse.ArgumentParser, with_grid: bool = True) -> None:
    parser.add_argument('--config', help="run-config file (key = value lines)")
    parser.add_argument('--N', dest='order', help="order N")
    parser.add_argument('--a', help="length scale a > 0")
    parser.add_argument('--D', dest='dims', help="space-time dimension")
    parser.add_argument('--kind', help="finite_order | infinite_order")
    if with_grid:
        parser.add_argument('--shape', help="grid points per axis, e.g. 128,128")
        parser.add_argument('--box', help="box lengths per axis, e.g. 6.28,6.28")
        parser.add_argument('--tau', help="shell box: T = L = 2 pi a tau / sqrt(q_N)")
        parser.add_argument('--out-dir', dest='out_dir', help="output directory")
        parser.add_argument('--format', help="csv | json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='hdkg',
        description="Higher-derivative Klein-Gordon toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('--version', action='version', version=version_text())
    parser.add_argument('--log-level', dest='log_level', help="DEBUG, INFO, WARNING, ERROR")
    sub = parser.add_subparsers(dest='command', required=True)

    roots = sub.add_parser('roots', help="real roots q_N and mass scales over an order range")
    roots.add_argument('--from', dest='order_from', required=True)
    roots.add_argument('--to', dest='order_to', required=True)
    roots.add_argument('--a', default='1.0')
    roots.add_argument('--format', default='csv')
    roots.add_argument('--out', help="output file (default: stdout)")
    roots.set_defaults(handler=cmd_roots)

    prop = sub.add_parser('propagator', help="propagator scan over p^2")
    prop.add_argument('--N', dest='order', required=True)
    prop.add_argument('--a', default='1.0')
    prop.add_argument('--kind', default='finite_order')
    prop.add_argument('--from', dest='p_from', required=True)
    prop.add_argument('--to', dest='p_to', required=True)
    prop.add_argument('--count', default='101')
    prop.add_argument('--contour', default='feynman_eps')
    prop.add_argument('--eps', default=repr(config.DEFAULT_FEYNMAN_EPS))
    prop.add_argument('--out', help="output file (default: stdout)")
    prop.set_defaults(handler=cmd_propagator)

    solve = sub.add_parser('solve', help="homogeneous or sourced solution on a grid")
    solve.add_argument('mode_kind', choices=('homogeneous', 'sourced'))
    _add_model_flags(solve)
    solve.add_argument('--mode', action='append', default=[], help="AMPLITUDE:n1[,n2] spatial lattice indices")
    solve.add_argument('--source', help="source grid binary")
    solve.add_argument('--source-constant', dest='source_constant', help="constant source value")
    solve.add_argument('--source-mode', dest='source_mode', action='append', default=[],
                       help="AMPLITUDE:m,n1[,n2] space-time lattice indices")
    solve.add_argument('--contour', default='none')
    solve.add_argument('--eps', default=repr(config.DEFAULT_FEYNMAN_EPS))
    solve.add_argument('--realize', action='store_true', help="keep the real part of a contour solution")
    solve.set_defaults(handler=cmd_solve)

    emt = sub.add_parser('emt', help="energy-momentum tensor of a field file")
    _add_model_flags(emt)
    emt.add_argument('--field', required=True, help="modes .json or grid binary")
    emt.set_defaults(handler=cmd_emt)

    evolve = sub.add_parser('evolve', help="RK4 evolution of one spatial mode")
    _add_model_flags(evolve, with_grid=False)
    evolve.add_argument('--k', default='0.0')
    evolve.add_argument('--initial', required=True, help="comma-separated state or 'eigen'")
    evolve.add_argument('--t-end', dest='t_end', required=True)
    evolve.add_argument('--dt', required=True)
    evolve.add_argument('--out', help="trajectory CSV (default: stdout)")
    evolve.add_argument('--spectrum-out', dest='spectrum_out', help="spectrum JSON")
    evolve.set_defaults(handler=cmd_evolve)
    return parser


def main(argv: Optional[List[str]] = None, stdout: Optional[TextIO] = None, stderr: Optional[TextIO] = None) -> int:
    """Parse, dispatch, map errors to exit codes"""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    args = parser.parse_args(argv)

    try:
        config.validate()
    except ValueError as e:
        stderr.write(f"error: {e}\n")
        return 2
    if args.log_level:
        set_log_level(getattr(logging, str(args.log_level).upper(), logging.INFO))

    try:
        return args.handler(args, stdout=stdout)
    except HDKGError as e:
        logger.debug(f"{type(e).__name__}: {e.message}")
        stderr.write(f"error: {e.message}\n")
        if e.details:
            stderr.write(json.dumps(e.details, sort_keys=True, default=str) + '\n')
        return e.exit_code
    except Exception as e:
        logger.error(f"❌ Unexpected failure in {args.command}: {e}")
        stderr.write(f"error: internal failure: {e}\n")
        return 1


if __name__ == '__main__':
    sys.exit(main())
