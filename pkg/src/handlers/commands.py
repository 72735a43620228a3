#!/usr/bin/env python3
"""
Command implementations behind the CLI

Each command validates all of its inputs, computes, and only then writes
its outputs. Errors propagate as HDKGError subclasses; main maps them to
exit codes.
"""

import math
import os
import sys
from argparse import Namespace
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

try:
    from ..config import config
    from ..services.models import (
        ModelParams, OperatorKind, ValidationError, DomainError, RangeError, ParityError
    )
    from ..services.dispersion import root_report, check_order
    from ..services.propagator import (
        ContourKind, OperatorSymbol, PropagatorSpec, scan_propagator, symbol_value
    )
    from ..services.fields import PlaneWaveMode, ModeField, GridSpec, GridField, sample, residual_norm
    from ..services.solver import (
        homogeneous_solution, shell_box, lattice_wavevector, realize,
        solve_sourced_spectral_with_diagnostics, solve_sourced_odd_with_diagnostics
    )
    from ..services.energy_momentum import (
        emt_general, emt_closed, divergence, emt_summary,
        noether_identity_residual, noether_identity_residual_modes
    )
    from ..services.mode_dynamics import (
        build_mode_ode, integrate, spectrum_report, oscillatory_frequencies, eigen_initial_state
    )
    from ..utils.logger import get_cli_logger
    from .validators import InputValidator, RunConfig, read_config_file, build_run_config
    from .formatters import (
        OutputFormatter, encode_grid, read_grid, read_modes, write_atomic, write_outputs
    )
except ImportError:
    # Fallback for direct execution
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from config import config
    from services.models import (
        ModelParams, OperatorKind, ValidationError, DomainError, RangeError, ParityError
    )
    from services.dispersion import root_report, check_order
    from services.propagator import (
        ContourKind, OperatorSymbol, PropagatorSpec, scan_propagator, symbol_value
    )
    from services.fields import PlaneWaveMode, ModeField, GridSpec, GridField, sample, residual_norm
    from services.solver import (
        homogeneous_solution, shell_box, lattice_wavevector, realize,
        solve_sourced_spectral_with_diagnostics, solve_sourced_odd_with_diagnostics
    )
    from services.energy_momentum import (
        emt_general, emt_closed, divergence, emt_summary,
        noether_identity_residual, noether_identity_residual_modes
    )
    from services.mode_dynamics import (
        build_mode_ode, integrate, spectrum_report, oscillatory_frequencies, eigen_initial_state
    )
    from utils.logger import get_cli_logger
    from handlers.validators import InputValidator, RunConfig, read_config_file, build_run_config
    from handlers.formatters import (
        OutputFormatter, encode_grid, read_grid, read_modes, write_atomic, write_outputs
    )

logger = get_cli_logger()


def _emit(text: str, out_path: Optional[str], stdout: Optional[TextIO]) -> None:
    if out_path:
        write_atomic(out_path, text.encode('utf-8'))
    else:
        (stdout or sys.stdout).write(text)


def _run_config(args: Namespace) -> RunConfig:
    """RunConfig from --config plus the model/grid/output flags present on args"""
    file_values = read_config_file(args.config) if getattr(args, 'config', None) else {}
    overrides = {
        'order': getattr(args, 'order', None),
        'a': getattr(args, 'a', None),
        'dims': getattr(args, 'dims', None),
        'kind': getattr(args, 'kind', None),
        'shape': getattr(args, 'shape', None),
        'box_lengths': getattr(args, 'box', None),
        'tau': getattr(args, 'tau', None),
        'output_dir': getattr(args, 'out_dir', None),
        'output_format': getattr(args, 'format', None),
    }
    return build_run_config(file_values, overrides)


# ---------------------------------------------------------------------------
# roots
# ---------------------------------------------------------------------------

def _root_row(order: int, a: float) -> Dict[str, Any]:
    report = root_report(order)
    row = report.to_dict()
    row['mass_scale'] = None if report.q_N is None else math.sqrt(report.q_N) / a
    return row


def cmd_roots(args: Namespace, stdout: Optional[TextIO] = None) -> int:
    """Root table over an order range (fanned out over HDKG_THREADS workers)"""
    low = InputValidator.validate_int(args.order_from).unwrap('--from')
    high = InputValidator.validate_int(args.order_to).unwrap('--to')
    a = InputValidator.validate_real(args.a, positive=True).unwrap('--a')
    fmt = InputValidator.validate_format(args.format).unwrap('--format')
    if high < low:
        raise DomainError(f"Empty order range [{low}, {high}]", {'from': low, 'to': high})
    for order in (low, high):
        check_order(order)

    orders = list(range(low, high + 1))
    with ThreadPoolExecutor(max_workers=config.worker_count()) as pool:
        rows = list(pool.map(lambda n: _root_row(n, a), orders))

    logger.info(
        f"🔍 Root analysis N={low}..{high}\n"
        f"   ├─ Odd orders with a shell: {sum(1 for r in rows if r['q_N'] is not None)}\n"
        f"   └─ Workers: {config.worker_count()}"
    )
    if fmt == 'json':
        text = OutputFormatter.format_json({'a': a, 'rows': rows})
    else:
        text = OutputFormatter.format_roots_csv(rows)
    _emit(text, args.out, stdout)
    return 0


# ---------------------------------------------------------------------------
# propagator
# ---------------------------------------------------------------------------

def cmd_propagator(args: Namespace, stdout: Optional[TextIO] = None) -> int:
    """p_squared,re_D,im_D over a uniform scan"""
    order = InputValidator.validate_int(args.order, minimum=0).unwrap('--N')
    a = InputValidator.validate_real(args.a, positive=True).unwrap('--a')
    kind = InputValidator.validate_kind(args.kind).unwrap('--kind')
    contour = InputValidator.validate_contour(args.contour).unwrap('--contour')
    eps = InputValidator.validate_real(args.eps).unwrap('--eps')
    p_from = InputValidator.validate_real(args.p_from).unwrap('--from')
    p_to = InputValidator.validate_real(args.p_to).unwrap('--to')
    count = InputValidator.validate_int(args.count).unwrap('--count')
    if count < 1 or p_to < p_from:
        raise DomainError(
            f"Empty scan range: from={p_from!r}, to={p_to!r}, count={count}",
            {'from': p_from, 'to': p_to, 'count': count}
        )
    if kind == OperatorKind.FINITE_ORDER:
        check_order(order)

    spec = PropagatorSpec(ModelParams(order=order, a=a), contour=contour, eps=eps, kind=kind)
    values = np.linspace(p_from, p_to, count) if count > 1 else np.array([p_from])
    rows, poles = scan_propagator(spec, [float(v) for v in values])
    _emit(OutputFormatter.format_propagator_csv(rows, poles), args.out, stdout)
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------

def _grid_spec(run: RunConfig, params: ModelParams) -> GridSpec:
    shape = run.shape or (64,) * run.dims
    if run.tau is not None:
        return GridSpec(shell_box(params, run.tau), shape)
    if run.box_lengths is None:
        raise ValidationError("A grid box is required (grid.box / --box, or grid.tau / --tau)")
    return GridSpec(run.box_lengths, shape)


def _parse_modes(tokens: Sequence[str], index_count: int) -> List[Tuple[complex, Tuple[int, ...]]]:
    if not tokens:
        raise ValidationError("At least one --mode is required")
    return [InputValidator.validate_mode_token(token, index_count).unwrap('--mode') for token in tokens]


def _source_grid(args: Namespace, run: RunConfig, params: ModelParams) -> GridField:
    given = [name for name in ('source', 'source_constant', 'source_mode') if getattr(args, name, None)]
    if len(given) != 1:
        raise ValidationError(
            "Give exactly one of --source, --source-constant, --source-mode",
            {'given': given}
        )
    if args.source:
        J = read_grid(args.source)
        if J.dims != params.dims:
            raise DomainError(
                f"Source grid has D={J.dims}, model has D={params.dims}",
                {'grid_dims': J.dims, 'model_dims': params.dims}
            )
        return J

    spec = _grid_spec(run, params)
    if args.source_constant is not None:
        value = InputValidator.validate_real(args.source_constant).unwrap('--source-constant')
        return GridField(spec, np.full(spec.shape, value))

    modes = []
    for amplitude, indices in _parse_modes(args.source_mode, spec.dims):
        omega = 2.0 * math.pi * indices[0] / spec.box_lengths[0]
        k = lattice_wavevector(spec.box_lengths, indices[1:])
        modes.append(PlaneWaveMode(amplitude=amplitude, k=k, omega=omega, conjugate_pair=True))
    return sample(ModeField(modes=tuple(modes), params=params), spec)


def _grid_outputs(directory: str, g: GridField, fmt: str) -> Dict[str, bytes]:
    outputs = {os.path.join(directory, 'field.bin'): encode_grid(g)}
    if fmt == 'csv' and g.dims == 2:
        outputs[os.path.join(directory, 'field.csv')] = OutputFormatter.format_grid_csv(g).encode('utf-8')
    return outputs


def cmd_solve(args: Namespace, stdout: Optional[TextIO] = None) -> int:
    """Homogeneous (odd N) or sourced solve; writes field.bin and diagnostics.json"""
    run = _run_config(args)
    params = run.params

    if args.mode_kind == 'homogeneous':
        if run.kind != OperatorKind.FINITE_ORDER:
            raise ParityError("The infinite-order equation has only the trivial homogeneous solution phi = 0")
        spec = _grid_spec(run, params)
        spectrum = [
            (amplitude, lattice_wavevector(spec.box_lengths, indices))
            for amplitude, indices in _parse_modes(args.mode, spec.dims - 1)
        ]
        mf = homogeneous_solution(params, spectrum)
        g = sample(mf, spec)
        report = residual_norm(params, g)
        symbol = OperatorSymbol(params)
        diagnostics = {
            'kind': 'homogeneous',
            'order': params.order,
            'residual': report.norm,
            'degenerate': report.degenerate,
            'max_shell_symbol': max(abs(symbol_value(symbol, m.p_squared)) for m in mf.modes),
            'mode_count': len(mf.modes),
        }
        outputs = _grid_outputs(run.output_dir, g, run.output_format)
        outputs[os.path.join(run.output_dir, 'modes.json')] = \
            OutputFormatter.format_json(OutputFormatter.modes_document(mf, spec)).encode('utf-8')
    else:
        J = _source_grid(args, run, params)
        contour = InputValidator.validate_contour(args.contour).unwrap('--contour')
        if run.kind == OperatorKind.FINITE_ORDER and params.is_odd:
            eps = InputValidator.validate_real(args.eps).unwrap('--eps')
            phi, solve_diag = solve_sourced_odd_with_diagnostics(params, J, contour, eps)
            if args.realize:
                phi = realize(phi)
        else:
            phi, solve_diag = solve_sourced_spectral_with_diagnostics(params, run.kind, J)
        diagnostics = solve_diag.to_dict()
        diagnostics.update({'kind': 'sourced', 'order': params.order, 'operator': run.kind.value})
        outputs = _grid_outputs(run.output_dir, phi, run.output_format)

    text = OutputFormatter.format_json(diagnostics)
    outputs[os.path.join(run.output_dir, 'diagnostics.json')] = text.encode('utf-8')
    write_outputs(outputs)
    (stdout or sys.stdout).write(text)
    return 0


# ---------------------------------------------------------------------------
# emt
# ---------------------------------------------------------------------------

def cmd_emt(args: Namespace, stdout: Optional[TextIO] = None) -> int:
    """Energy-momentum tensor of a modes document (N <= 4) or a grid file (N <= 2)"""
    run = _run_config(args)
    params = run.params
    if params.order > config.EMT_MAX_ORDER:
        raise RangeError(
            f"Energy-momentum tensor supported for N <= {config.EMT_MAX_ORDER}, got N={params.order}",
            {'order': params.order, 'max': config.EMT_MAX_ORDER}
        )

    if args.field.endswith('.json'):
        mf, spec = read_modes(args.field)
        if mf.params.dims != params.dims:
            raise DomainError("Modes document and model disagree on D", {'dims': mf.params.dims})
        T = emt_general(params, mf, spec)
        noether = noether_identity_residual_modes(params, mf, spec.coordinates())['residual']
        source = 'modes'
    else:
        g = read_grid(args.field)
        if params.order > config.EMT_GRID_MAX_ORDER:
            raise RangeError(
                f"Grid fields support N <= {config.EMT_GRID_MAX_ORDER}; pass a modes document for N <= {config.EMT_MAX_ORDER}",
                {'order': params.order, 'max': config.EMT_GRID_MAX_ORDER}
            )
        T = emt_closed(params, g)
        noether = noether_identity_residual(params, g)
        source = 'grid'

    summary = emt_summary(T, divergence(T))
    summary.update({'order': params.order, 'source': source, 'noether_residual': noether, 'max_abs': T.max_abs()})
    text = OutputFormatter.format_json(summary)
    outputs = {os.path.join(run.output_dir, 'emt_summary.json'): text.encode('utf-8')}
    if T.dims == 2:
        outputs[os.path.join(run.output_dir, 'emt.csv')] = OutputFormatter.format_emt_csv(T).encode('utf-8')
    write_outputs(outputs)
    (stdout or sys.stdout).write(text)
    return 0


# ---------------------------------------------------------------------------
# evolve
# ---------------------------------------------------------------------------

def cmd_evolve(args: Namespace, stdout: Optional[TextIO] = None) -> int:
    """RK4 trajectory of one spatial mode; optional spectrum JSON"""
    run = _run_config(args)
    params = run.params
    k = InputValidator.validate_real(args.k).unwrap('--k')
    t_end = InputValidator.validate_real(args.t_end, positive=True).unwrap('--t-end')
    dt = InputValidator.validate_real(args.dt, positive=True).unwrap('--dt')
    ode = build_mode_ode(params, abs(k))

    if str(args.initial).strip().lower() == 'eigen':
        frequencies = oscillatory_frequencies(ode)
        if not frequencies:
            raise ParityError(
                f"N={params.order} has no oscillatory mode to initialize from",
                {'order': params.order}
            )
        initial = eigen_initial_state(ode, 1j * frequencies[0])
    else:
        initial = InputValidator.validate_vector(args.initial).unwrap('--initial')

    traj = integrate(ode, initial, t_end, dt)
    outputs: Dict[str, bytes] = {}
    if args.spectrum_out:
        outputs[args.spectrum_out] = OutputFormatter.format_json(spectrum_report(ode)).encode('utf-8')
    text = OutputFormatter.format_trajectory_csv(traj)
    if args.out:
        outputs[args.out] = text.encode('utf-8')
    write_outputs(outputs)
    if not args.out:
        (stdout or sys.stdout).write(text)
    if traj.blew_up:
        logger.warning(f"⚠️ Trajectory blew up at t={traj.times[-1]!r} (growing characteristic roots)")
    return 0
