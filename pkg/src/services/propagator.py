#!/usr/bin/env python3
"""
Operator symbols and propagators in momentum space

With metric (+,-,...,-) and modes e^(-ip.x) the d'Alembertian becomes -p^2,
so the field-equation operator turns into the multiplier

    L_N(p^2) = sum_n (-1)^n a^(2(n-1)) p^(2n) / n!       (finite order)
    L(p^2)   = exp(-a^2 p^2) / a^2                       (infinite order)

and the propagator is D = -i / L, i.e. -i a^2 / sum_n (-1)^n (a^2 p^2)^n / n!.
"""

import cmath
import math
import sys
from enum import Enum
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from ..config import config
    from ..utils.logger import get_model_logger
except ImportError:
    # Handle direct execution
    import sys
    import os
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from config import config
    from utils.logger import get_model_logger

from .models import ModelParams, OperatorKind, DomainError, PoleProximityError, AmplificationError
from .dispersion import root_report

logger = get_model_logger()

Scalar = Union[float, complex]


class ContourKind(str, Enum):
    """Prescription for the real pole of odd-order propagators"""
    NONE = "none"
    PRINCIPAL_VALUE = "principal_value"
    FEYNMAN_EPS = "feynman_eps"


@dataclass(frozen=True)
class OperatorSymbol:
    """Momentum-space multiplier of the field-equation operator"""
    params: ModelParams
    kind: OperatorKind = OperatorKind.FINITE_ORDER


@dataclass(frozen=True)
class PropagatorSpec:
    """Propagator D^(2N) with a contour prescription"""
    params: ModelParams
    contour: ContourKind = ContourKind.FEYNMAN_EPS
    eps: float = config.DEFAULT_FEYNMAN_EPS
    kind: OperatorKind = OperatorKind.FINITE_ORDER

    def __post_init__(self):
        if self.contour != ContourKind.NONE:
            if not (isinstance(self.eps, (int, float)) and math.isfinite(self.eps) and self.eps > 0):
                raise DomainError(
                    f"Contour {self.contour.value} requires eps > 0, got {self.eps!r}",
                    {'contour': self.contour.value, 'eps': self.eps}
                )

    @property
    def symbol(self) -> OperatorSymbol:
        return OperatorSymbol(self.params, self.kind)


def operator_coefficients(params: ModelParams) -> Tuple[float, ...]:
    """Coefficients a^(2(n-1))/n! multiplying box^n in the field equation"""
    a2 = params.a ** 2
    return tuple(a2 ** (n - 1) / math.factorial(n) for n in range(params.order + 1))


def _finite_symbol(params: ModelParams, p_squared):
    # P_N(-q)/a^2 by Horner in q = a^2 p^2
    q = params.a ** 2 * p_squared
    acc = 0.0
    for n in range(params.order, -1, -1):
        acc = acc * (-q) + 1.0 / math.factorial(n)
    return acc / params.a ** 2


# largest exponent math.exp accepts
_MAX_EXPONENT = math.log(sys.float_info.max)


def _exp_or_inf(exponent: Scalar) -> Scalar:
    """exp(exponent), with inf in place of an overflow"""
    if isinstance(exponent, complex):
        if exponent.real > _MAX_EXPONENT:
            return complex(math.inf, 0.0)
        return cmath.exp(exponent)
    if exponent > _MAX_EXPONENT:
        return math.inf
    return math.exp(exponent)


def symbol_value(s: OperatorSymbol, p_squared: Scalar) -> Scalar:
    """
    Symbol at p^2 (complex p^2 is accepted for contour shifts)

    Examples:
        N=1, a=1: L(1) = 0, L(0) = 1
        infinite order, a=1: L(0) = 1, L(-800) = inf
    """
    if s.kind == OperatorKind.INFINITE_ORDER:
        a2 = s.params.a ** 2
        value = _exp_or_inf(-a2 * p_squared)
        if isinstance(value, complex):
            return complex(value.real / a2, value.imag / a2)
        return value / a2
    return _finite_symbol(s.params, p_squared)


def symbol_values(s: OperatorSymbol, p_squared: np.ndarray) -> np.ndarray:
    """Vectorized symbol over an array of (real) p^2 values"""
    p_squared = np.asarray(p_squared, dtype=float)
    if s.kind == OperatorKind.INFINITE_ORDER:
        a2 = s.params.a ** 2
        with np.errstate(over='ignore'):
            return np.exp(-a2 * p_squared) / a2
    return _finite_symbol(s.params, p_squared)


def symbol_min_on_reals(
    s: OperatorSymbol,
    p_squared_range: Tuple[float, float],
    samples: int
) -> Tuple[float, float]:
    """
    (argmin, min |symbol|) over a uniform sampling of a p^2 interval

    Used to certify invertibility on a band of grid momenta.
    """
    lo, hi = p_squared_range
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise DomainError(f"Invalid p^2 interval {p_squared_range!r}", {'range': list(p_squared_range)})
    if samples < 2:
        raise DomainError(f"Need at least 2 samples, got {samples}", {'samples': samples})
    grid = np.linspace(lo, hi, samples)
    magnitudes = np.abs(symbol_values(s, grid))
    index = int(np.argmin(magnitudes))
    return float(grid[index]), float(magnitudes[index])


def pole_location(spec: PropagatorSpec) -> Optional[float]:
    """Real pole p^2 = q_N/a^2 for odd finite order, None otherwise"""
    if spec.kind == OperatorKind.INFINITE_ORDER:
        return None
    report = root_report(spec.params.order)
    if report.q_N is None:
        return None
    return report.q_N / spec.params.a ** 2


def _near_pole(spec: PropagatorSpec, p_squared: float) -> bool:
    pole = pole_location(spec)
    if pole is None:
        return False
    a2 = spec.params.a ** 2
    return abs(a2 * p_squared - a2 * pole) < config.DELTA_POLE


def propagator_value(spec: PropagatorSpec, p_squared: float) -> complex:
    """
    D^(2N)(p^2) = -i / L(p^2) with the contour's shift

    feynman_eps evaluates L at p^2 + i eps, which turns the N=1 case into
    i/(p^2 - 1/a^2 + i eps); principal_value averages the +eps and -eps
    evaluations.

    Raises:
        PoleProximityError: contour none within DELTA_POLE of the real pole
        AmplificationError: infinite order where a^2 exp(a^2 p^2) leaves the float range
    """
    s = spec.symbol
    if spec.kind == OperatorKind.INFINITE_ORDER:
        a2 = spec.params.a ** 2
        magnitude = a2 * _exp_or_inf(a2 * float(p_squared))
        if not math.isfinite(magnitude):
            raise AmplificationError(
                f"Infinite-order propagator overflows at p^2={p_squared!r}",
                {'p_squared': p_squared, 'a': spec.params.a}
            )
        return complex(0.0, -magnitude)

    if spec.contour == ContourKind.NONE:
        if _near_pole(spec, p_squared):
            raise PoleProximityError(
                f"p^2={p_squared!r} is within {config.DELTA_POLE} (q units) of the real pole",
                {'p_squared': p_squared, 'pole': pole_location(spec)}
            )
        return complex(-1j / symbol_value(s, float(p_squared)))

    plus = -1j / symbol_value(s, complex(p_squared, spec.eps))
    if spec.contour == ContourKind.FEYNMAN_EPS:
        return complex(plus)
    minus = -1j / symbol_value(s, complex(p_squared, -spec.eps))
    return complex(0.5 * (plus + minus))


def inverse_symbol_values(spec: PropagatorSpec, p_squared: np.ndarray) -> np.ndarray:
    """
    1/L over an array of real p^2 with the contour's shift (i D, vectorized)

    Contour none returns the plain real reciprocal; callers check the shell.
    """
    p_squared = np.asarray(p_squared, dtype=float)
    if spec.kind == OperatorKind.INFINITE_ORDER or spec.contour == ContourKind.NONE:
        with np.errstate(divide='ignore', over='ignore'):
            return 1.0 / symbol_values(spec.symbol, p_squared)
    plus = 1.0 / _finite_symbol(spec.params, p_squared + 1j * spec.eps)
    if spec.contour == ContourKind.FEYNMAN_EPS:
        return plus
    minus = 1.0 / _finite_symbol(spec.params, p_squared - 1j * spec.eps)
    return 0.5 * (plus + minus)


def scan_propagator(
    spec: PropagatorSpec,
    p_squared_values: Sequence[float]
) -> Tuple[List[Tuple[float, Optional[complex]]], List[float]]:
    """
    Evaluate D over a list of p^2

    Returns:
        (rows, poles): rows hold None where contour none hits the pole or the
        infinite-order propagator overflows; poles lists the real poles inside
        the scanned range
    """
    rows: List[Tuple[float, Optional[complex]]] = []
    overflows = 0
    for p2 in p_squared_values:
        try:
            rows.append((float(p2), propagator_value(spec, float(p2))))
        except PoleProximityError:
            logger.debug(f"Pole row at p^2={p2!r}")
            rows.append((float(p2), None))
        except AmplificationError:
            overflows += 1
            rows.append((float(p2), None))
    if overflows:
        logger.warning(f"⚠️ Infinite-order propagator overflowed on {overflows} scan row(s)")

    poles: List[float] = []
    pole = pole_location(spec)
    if pole is not None and rows and rows[0][0] <= pole <= rows[-1][0]:
        poles.append(pole)
    return rows, poles
