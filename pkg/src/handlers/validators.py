#!/usr/bin/env python3
"""
Validators for command inputs and run-config files

Every value is checked against the service preconditions before any
computation starts, so a failing command leaves no output behind.
"""

import math
import re
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Mapping, Optional, Tuple

from dotenv import dotenv_values

try:
    from ..services.models import ModelParams, OperatorKind, ValidationError, DomainError
    from ..services.propagator import ContourKind
    from ..utils.logger import get_cli_logger
except ImportError:
    # Fallback for direct execution
    import sys
    import os
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from services.models import ModelParams, OperatorKind, ValidationError, DomainError
    from services.propagator import ContourKind
    from utils.logger import get_cli_logger

logger = get_cli_logger()

OUTPUT_FORMATS = ('csv', 'json')

# key -> RunConfig attribute
KNOWN_KEYS = {
    'model.N': 'order',
    'model.a': 'a',
    'model.D': 'dims',
    'model.kind': 'kind',
    'grid.shape': 'shape',
    'grid.box': 'box_lengths',
    'grid.tau': 'tau',
    'output.directory': 'output_dir',
    'output.format': 'output_format',
}


class ValidationResult:
    """Outcome of validating one input"""

    def __init__(self, is_valid: bool, value: Any = None, error: Optional[str] = None):
        self.is_valid = is_valid
        self.value = value
        self.error = error

    def unwrap(self, key: str) -> Any:
        """Value, or a ValidationError naming the key"""
        if not self.is_valid:
            raise ValidationError(f"{key}: {self.error}", {'key': key})
        return self.value


@dataclass
class RunConfig:
    """Parsed run configuration (model, grid and output sections)"""
    order: int = 1
    a: float = 1.0
    dims: int = 2
    kind: OperatorKind = OperatorKind.FINITE_ORDER
    shape: Optional[Tuple[int, ...]] = None
    box_lengths: Optional[Tuple[float, ...]] = None
    tau: Optional[int] = None
    output_dir: str = '.'
    output_format: str = 'csv'

    @property
    def params(self) -> ModelParams:
        return ModelParams(order=self.order, a=self.a, dims=self.dims)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['kind'] = self.kind.value
        return data


class InputValidator:
    """Validators for single command-line / config values"""

    @staticmethod
    def validate_int(text: Any, minimum: Optional[int] = None) -> ValidationResult:
        """Integer, optionally bounded below"""
        if isinstance(text, bool):
            return ValidationResult(False, error="expected an integer")
        try:
            value = int(str(text).strip())
        except (TypeError, ValueError):
            return ValidationResult(False, error=f"expected an integer, got {text!r}")
        if minimum is not None and value < minimum:
            return ValidationResult(False, error=f"must be >= {minimum}, got {value}")
        return ValidationResult(True, value=value)

    @staticmethod
    def validate_real(text: Any, positive: bool = False) -> ValidationResult:
        """Finite real number, optionally strictly positive"""
        try:
            value = float(str(text).strip())
        except (TypeError, ValueError):
            return ValidationResult(False, error=f"expected a number, got {text!r}")
        if not math.isfinite(value):
            return ValidationResult(False, error=f"must be finite, got {text!r}")
        if positive and value <= 0:
            return ValidationResult(False, error=f"must be positive, got {value!r}")
        return ValidationResult(True, value=value)

    @staticmethod
    def validate_shape(text: Any) -> ValidationResult:
        """Comma-separated powers of two, e.g. '128,128'"""
        parts = [p for p in re.split(r'[,\sx]+', str(text).strip()) if p]
        if len(parts) < 2:
            return ValidationResult(False, error=f"need at least two sizes, got {text!r}")
        sizes: List[int] = []
        for part in parts:
            if not part.isdigit():
                return ValidationResult(False, error=f"size {part!r} is not a positive integer")
            n = int(part)
            if n < 2 or n & (n - 1):
                return ValidationResult(False, error=f"size {n} is not a power of two >= 2")
            sizes.append(n)
        return ValidationResult(True, value=tuple(sizes))

    @staticmethod
    def validate_lengths(text: Any) -> ValidationResult:
        """Comma-separated positive box lengths"""
        parts = [p for p in re.split(r'[,\s]+', str(text).strip()) if p]
        if len(parts) < 2:
            return ValidationResult(False, error=f"need at least two lengths, got {text!r}")
        lengths: List[float] = []
        for part in parts:
            result = InputValidator.validate_real(part, positive=True)
            if not result.is_valid:
                return result
            lengths.append(result.value)
        return ValidationResult(True, value=tuple(lengths))

    @staticmethod
    def validate_kind(text: Any) -> ValidationResult:
        try:
            return ValidationResult(True, value=OperatorKind(str(text).strip()))
        except ValueError:
            options = ', '.join(k.value for k in OperatorKind)
            return ValidationResult(False, error=f"unknown operator kind {text!r} (expected {options})")

    @staticmethod
    def validate_contour(text: Any) -> ValidationResult:
        try:
            return ValidationResult(True, value=ContourKind(str(text).strip()))
        except ValueError:
            options = ', '.join(c.value for c in ContourKind)
            return ValidationResult(False, error=f"unknown contour {text!r} (expected {options})")

    @staticmethod
    def validate_format(text: Any) -> ValidationResult:
        value = str(text).strip().lower()
        if value not in OUTPUT_FORMATS:
            return ValidationResult(False, error=f"unknown format {text!r} (expected {', '.join(OUTPUT_FORMATS)})")
        return ValidationResult(True, value=value)

    @staticmethod
    def validate_vector(text: Any, integer: bool = False) -> ValidationResult:
        """Comma-separated numbers"""
        parts = [p for p in re.split(r'[,\s]+', str(text).strip()) if p]
        if not parts:
            return ValidationResult(False, error="empty vector")
        values = []
        for part in parts:
            result = InputValidator.validate_int(part) if integer else InputValidator.validate_real(part)
            if not result.is_valid:
                return result
            values.append(result.value)
        return ValidationResult(True, value=tuple(values))

    @staticmethod
    def validate_mode_token(text: str, index_count: int) -> ValidationResult:
        """
        'AMPLITUDE:i1,i2,...' with a (possibly complex) amplitude and integer lattice indices

        Examples:
            '1.0:5'       -> (1+0j, (5,))
            '0.5+0.5j:3'  -> ((0.5+0.5j), (3,))
        """
        if ':' not in str(text):
            return ValidationResult(False, error=f"mode {text!r} must look like AMPLITUDE:INDICES")
        amp_text, _, index_text = str(text).partition(':')
        try:
            amplitude = complex(amp_text.strip().replace(' ', ''))
        except ValueError:
            return ValidationResult(False, error=f"bad amplitude {amp_text!r}")
        if not (math.isfinite(amplitude.real) and math.isfinite(amplitude.imag)):
            return ValidationResult(False, error=f"amplitude must be finite, got {amp_text!r}")
        indices = InputValidator.validate_vector(index_text, integer=True)
        if not indices.is_valid:
            return ValidationResult(False, error=f"mode {text!r}: {indices.error}")
        if len(indices.value) != index_count:
            return ValidationResult(
                False, error=f"mode {text!r} needs {index_count} indices, got {len(indices.value)}"
            )
        return ValidationResult(True, value=(amplitude, indices.value))


_PARSERS = {
    'order': lambda v: InputValidator.validate_int(v, minimum=0),
    'a': lambda v: InputValidator.validate_real(v, positive=True),
    'dims': lambda v: InputValidator.validate_int(v, minimum=2),
    'kind': InputValidator.validate_kind,
    'shape': InputValidator.validate_shape,
    'box_lengths': InputValidator.validate_lengths,
    'tau': lambda v: InputValidator.validate_int(v, minimum=1),
    'output_dir': lambda v: ValidationResult(True, value=str(v)),
    'output_format': InputValidator.validate_format,
}


def read_config_file(path: str) -> Dict[str, str]:
    """
    Flat 'key = value' file with '#' comments

    Raises:
        ValidationError: missing file, empty value or unknown key
    """
    try:
        with open(path, encoding='utf-8') as handle:
            values = dotenv_values(stream=handle, interpolate=False)
    except OSError as e:
        raise ValidationError(f"Cannot read config file {path!r}: {e}", {'path': path})

    unknown = sorted(key for key in values if key not in KNOWN_KEYS)
    if unknown:
        raise ValidationError(
            f"Unknown config key(s): {', '.join(unknown)}",
            {'unknown': unknown, 'known': sorted(KNOWN_KEYS)}
        )
    empty = sorted(key for key, value in values.items() if value is None or value == '')
    if empty:
        raise ValidationError(f"Config key(s) without value: {', '.join(empty)}", {'keys': empty})
    logger.debug(f"Read {len(values)} config keys from {path}")
    return dict(values)


def build_run_config(
    file_values: Optional[Mapping[str, str]] = None,
    overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """
    Merge file values with command-line overrides (flags win) and validate

    overrides are keyed by RunConfig attribute; None means "not given".
    """
    raw: Dict[str, Any] = {}
    for key, value in (file_values or {}).items():
        if key not in KNOWN_KEYS:
            raise ValidationError(f"Unknown config key: {key}", {'key': key})
        raw[KNOWN_KEYS[key]] = value
    for attribute, value in (overrides or {}).items():
        if value is not None:
            raw[attribute] = value

    attribute_to_key = {attr: key for key, attr in KNOWN_KEYS.items()}
    parsed: Dict[str, Any] = {}
    for attribute, value in raw.items():
        if attribute not in _PARSERS:
            raise ValidationError(f"Unknown setting: {attribute}", {'setting': attribute})
        parsed[attribute] = _PARSERS[attribute](value).unwrap(attribute_to_key[attribute])

    run = RunConfig(**parsed)
    ModelParams(order=run.order, a=run.a, dims=run.dims)
    for name, value in (('grid.shape', run.shape), ('grid.box', run.box_lengths)):
        if value is not None and len(value) != run.dims:
            raise DomainError(
                f"{name} has {len(value)} entries but model.D = {run.dims}",
                {'key': name, 'entries': len(value), 'dims': run.dims}
            )
    return run
