#!/usr/bin/env python3
"""
Output formatting and file I/O for the command line

- floats use repr (shortest round-trip form, at most 17 significant digits)
- JSON is written with sorted keys; NaN/inf become null
- files are written to a temporary sibling and renamed into place
"""

import json
import math
import os
import tempfile
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

try:
    from ..services.models import ModelParams, DomainError, ValidationError
    from ..services.fields import PlaneWaveMode, ModeField, GridSpec, GridField
    from ..services.energy_momentum import EMTField
    from ..services.mode_dynamics import Trajectory
    from ..utils.logger import get_cli_logger
except ImportError:
    # Fallback for direct execution
    import sys
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from services.models import ModelParams, DomainError, ValidationError
    from services.fields import PlaneWaveMode, ModeField, GridSpec, GridField
    from services.energy_momentum import EMTField
    from services.mode_dynamics import Trajectory
    from utils.logger import get_cli_logger

logger = get_cli_logger()


class OutputFormatter:
    """Deterministic text renderings of results"""

    @staticmethod
    def format_float(value: float) -> str:
        """repr of a float; nan/inf spelled 'nan', 'inf', '-inf'"""
        return repr(float(value))

    @staticmethod
    def format_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
        """Header plus rows; floats via format_float, everything else via str"""
        lines = [','.join(header)]
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, (float, np.floating)):
                    cells.append(OutputFormatter.format_float(cell))
                else:
                    cells.append(str(cell))
            lines.append(','.join(cells))
        return '\n'.join(lines) + '\n'

    @staticmethod
    def jsonable(value: Any) -> Any:
        """Convert numpy scalars/arrays and non-finite floats for json.dumps"""
        if isinstance(value, dict):
            return {str(k): OutputFormatter.jsonable(v) for k, v in value.items()}
        if isinstance(value, (list, tuple)):
            return [OutputFormatter.jsonable(v) for v in value]
        if isinstance(value, np.ndarray):
            return OutputFormatter.jsonable(value.tolist())
        if isinstance(value, (bool, np.bool_)):
            return bool(value)
        if isinstance(value, (int, np.integer)):
            return int(value)
        if isinstance(value, (float, np.floating)):
            value = float(value)
            return value if math.isfinite(value) else None
        if isinstance(value, complex):
            return [OutputFormatter.jsonable(value.real), OutputFormatter.jsonable(value.imag)]
        return value

    @staticmethod
    def format_json(data: Any) -> str:
        return json.dumps(OutputFormatter.jsonable(data), indent=2, sort_keys=True, allow_nan=False) + '\n'

    @staticmethod
    def format_roots_csv(rows: List[Dict[str, Any]]) -> str:
        """N,q_N,mass_scale,sturm_count,status"""
        body = []
        for row in rows:
            if row['q_N'] is None:
                body.append((row['order'], '', '', row['sturm_count'], 'no real root'))
            else:
                body.append((row['order'], float(row['q_N']), float(row['mass_scale']), row['sturm_count'], 'ok'))
        return OutputFormatter.format_csv(('N', 'q_N', 'mass_scale', 'sturm_count', 'status'), body)

    @staticmethod
    def format_propagator_csv(rows: Sequence[Tuple[float, Optional[complex]]], poles: Sequence[float]) -> str:
        """p_squared,re_D,im_D; pole rows carry nan and a trailing comment per pole"""
        body = []
        for p2, value in rows:
            if value is None:
                body.append((p2, math.nan, math.nan))
            else:
                body.append((p2, value.real, value.imag))
        text = OutputFormatter.format_csv(('p_squared', 're_D', 'im_D'), body)
        for pole in poles:
            text += f"# pole at p_squared={OutputFormatter.format_float(pole)}\n"
        return text

    @staticmethod
    def format_grid_csv(g: GridField) -> str:
        """t,x,value rows for D = 2 grids"""
        if g.dims != 2:
            raise ValidationError(f"CSV grid export supports D = 2 only, got D = {g.dims}", {'dims': g.dims})
        coords = g.spec.coordinates()
        rows = []
        for index in np.ndindex(*g.shape):
            value = g.values[index]
            t, x = coords[0][index], coords[1][index]
            if g.is_complex:
                rows.append((float(t), float(x), float(value.real), float(value.imag)))
            else:
                rows.append((float(t), float(x), float(value)))
        header = ('t', 'x', 're_value', 'im_value') if g.is_complex else ('t', 'x', 'value')
        return OutputFormatter.format_csv(header, rows)

    @staticmethod
    def format_emt_csv(T: EMTField) -> str:
        """t,x,alpha,mu,value rows for D = 2 tensors"""
        if T.dims != 2:
            raise ValidationError(f"CSV tensor export supports D = 2 only, got D = {T.dims}", {'dims': T.dims})
        coords = T.spec.coordinates()
        rows = []
        for index in np.ndindex(*T.spec.shape):
            t, x = float(coords[0][index]), float(coords[1][index])
            for alpha in range(T.dims):
                for mu in range(T.dims):
                    rows.append((t, x, alpha, mu, float(np.real(T.components[(alpha, mu) + index]))))
        return OutputFormatter.format_csv(('t', 'x', 'alpha', 'mu', 'value'), rows)

    @staticmethod
    def format_trajectory_csv(traj: Trajectory) -> str:
        """t,state_0,...,state_{2N-1}"""
        size = traj.states.shape[1]
        header = ['t'] + [f'state_{i}' for i in range(size)]
        rows = ([float(t)] + [float(v) for v in state] for t, state in zip(traj.times, traj.states))
        return OutputFormatter.format_csv(header, rows)

    @staticmethod
    def modes_document(mf: ModeField, spec: GridSpec) -> Dict[str, Any]:
        """JSON description of a mode field and the grid it was sampled on"""
        return {
            'params': mf.params.to_dict(),
            'box_lengths': list(spec.box_lengths),
            'shape': list(spec.shape),
            'modes': [
                {
                    'amplitude': [mode.amplitude.real, mode.amplitude.imag],
                    'k': list(mode.k),
                    'omega': mode.omega,
                    'conjugate_pair': mode.conjugate_pair,
                }
                for mode in mf.modes
            ],
        }


def _stage(path: str, data: bytes) -> str:
    """Write data to a temporary sibling of path and return the temporary name"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, temp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-', suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, 'wb') as handle:
            handle.write(data)
    except BaseException:
        os.unlink(temp_path)
        raise
    return temp_path


def write_atomic(path: str, data: bytes) -> None:
    """Write to a temporary file in the target directory, then rename over path"""
    write_outputs({path: data})


def write_outputs(outputs: Dict[str, bytes]) -> None:
    """
    Write a set of files all-or-nothing

    Every file is staged first; targets are renamed into place only once all
    of them are on disk. A failed rename removes the targets this call
    created.
    """
    staged: List[Tuple[str, str]] = []
    try:
        for path in sorted(outputs):
            staged.append((path, _stage(path, outputs[path])))
    except BaseException:
        for _, temp_path in staged:
            os.unlink(temp_path)
        raise

    created: List[str] = []
    try:
        for index, (path, temp_path) in enumerate(staged):
            existed = os.path.exists(path)
            os.replace(temp_path, path)
            if not existed:
                created.append(path)
    except BaseException:
        for _, temp_path in staged[index:]:
            if os.path.exists(temp_path):
                os.unlink(temp_path)
        for path in created:
            os.unlink(path)
        raise

    for path in sorted(outputs):
        logger.debug(f"Wrote {len(outputs[path])} bytes to {path}")


def encode_grid(g: GridField) -> bytes:
    """JSON header line then little-endian float64 values (complex as re, im pairs)"""
    header = {
        'dims': g.dims,
        'shape': list(g.shape),
        'box_lengths': list(g.box_lengths),
    }
    if g.is_complex:
        header['complex'] = True
        payload = np.ascontiguousarray(g.values).view(np.float64)
    else:
        payload = np.ascontiguousarray(g.values, dtype=np.float64)
    line = json.dumps(header, sort_keys=True).encode('utf-8') + b'\n'
    return line + payload.astype('<f8').tobytes(order='C')


def read_grid(path: str) -> GridField:
    """
    Parse a grid binary written by encode_grid

    Raises:
        ValidationError: unreadable file, malformed header or wrong payload size
    """
    try:
        with open(path, 'rb') as handle:
            header_line = handle.readline()
            payload = handle.read()
    except OSError as e:
        raise ValidationError(f"Cannot read grid file {path!r}: {e}", {'path': path})
    try:
        header = json.loads(header_line.decode('utf-8'))
        shape = tuple(int(n) for n in header['shape'])
        box_lengths = tuple(float(v) for v in header['box_lengths'])
        dims = int(header['dims'])
    except (ValueError, KeyError, TypeError) as e:
        raise ValidationError(f"Malformed grid header in {path!r}: {e}", {'path': path})
    if dims != len(shape):
        raise DomainError(f"Grid header dims={dims} disagrees with shape {list(shape)}", {'path': path})

    is_complex = bool(header.get('complex', False))
    expected = int(np.prod(shape)) * (2 if is_complex else 1) * 8
    if len(payload) != expected:
        raise ValidationError(
            f"Grid payload has {len(payload)} bytes, expected {expected}",
            {'path': path, 'bytes': len(payload), 'expected': expected}
        )
    values = np.frombuffer(payload, dtype='<f8').astype(np.float64)
    if is_complex:
        values = values.view(np.complex128)
    return GridField(GridSpec(box_lengths, shape), values.reshape(shape))


def read_modes(path: str) -> Tuple[ModeField, GridSpec]:
    """
    Parse a modes document written next to a homogeneous solution

    Raises:
        ValidationError: unreadable or malformed document
    """
    try:
        with open(path, encoding='utf-8') as handle:
            document = json.load(handle)
        params = ModelParams(**document['params'])
        spec = GridSpec(tuple(document['box_lengths']), tuple(document['shape']))
        modes = tuple(
            PlaneWaveMode(
                amplitude=complex(*entry['amplitude']),
                k=tuple(entry['k']),
                omega=entry['omega'],
                conjugate_pair=bool(entry.get('conjugate_pair', True)),
            )
            for entry in document['modes']
        )
    except OSError as e:
        raise ValidationError(f"Cannot read modes file {path!r}: {e}", {'path': path})
    except (ValueError, KeyError, TypeError) as e:
        raise ValidationError(f"Malformed modes document {path!r}: {e}", {'path': path})
    return ModeField(modes=modes, params=params), spec

