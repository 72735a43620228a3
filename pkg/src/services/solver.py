#!/usr/bin/env python3
"""
Homogeneous and sourced solutions of L phi = J

- odd N: plane waves on the mass shell p^2 = q_N/a^2
- even N / infinite order: only phi = 0 solves the homogeneous equation,
  and a band-limited source determines phi uniquely by spectral inversion
"""

import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

try:
    from ..config import config
    from ..utils.logger import get_solver_logger
except ImportError:
    # Handle direct execution
    import sys
    import os
    sys.path.insert(0, os.path.dirname(os.path.dirname(__file__)))
    from config import config
    from utils.logger import get_solver_logger

from .models import (
    ModelParams, OperatorKind, DomainError, ParityError,
    ShellCollisionError, AmplificationError
)
from .dispersion import shell_root
from .propagator import (
    ContourKind, OperatorSymbol, PropagatorSpec, symbol_value, symbol_values,
    inverse_symbol_values
)
from .fields import (
    PlaneWaveMode, ModeField, GridSpec, GridField, sample, apply_operator,
    populated_modes, amplification_guard, checked_real_part
)

logger = get_solver_logger()

Spectrum = Sequence[Tuple[complex, Sequence[float]]]

TRIVIALITY_MESSAGE = (
    "for even N the homogeneous equation possesses only the trivial solution "
    "phi = 0 (f_N has no real roots, so no mass shell exists)"
)


@dataclass(frozen=True)
class SourceField:
    """External source J given as modes or as grid samples"""
    representation: Union[ModeField, GridField]
    description: str = ""

    def to_grid(self, spec: Optional[GridSpec] = None) -> GridField:
        if isinstance(self.representation, GridField):
            return self.representation
        if spec is None:
            raise DomainError("A grid spec is required to sample a mode source")
        return sample(self.representation, spec)


@dataclass(frozen=True)
class SolveDiagnostics:
    """Inversion health record written next to every solve"""
    min_symbol: float
    max_amplification: float
    residual: float

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def _require_odd(params: ModelParams, what: str) -> None:
    if not params.is_odd:
        raise ParityError(
            f"{what} requires odd N, got N={params.order}: {TRIVIALITY_MESSAGE}",
            {'order': params.order}
        )


def homogeneous_solution(params: ModelParams, spectrum: Spectrum) -> ModeField:
    """
    On-shell superposition: each (amplitude, k) becomes a real mode pair
    with omega = sqrt(|k|^2 + q_N/a^2)

    Raises:
        ParityError: even N (no nontrivial solution exists)
    """
    _require_odd(params, "A homogeneous solution")
    shell = shell_root(params.order) / params.a ** 2
    modes: List[PlaneWaveMode] = []
    for amplitude, k in spectrum:
        k = tuple(float(v) for v in k)
        omega = math.sqrt(sum(v * v for v in k) + shell)
        modes.append(PlaneWaveMode(amplitude=amplitude, k=k, omega=omega, conjugate_pair=True))
    return ModeField(modes=tuple(modes), params=params)


def shell_box(params: ModelParams, tau: int, dims: Optional[int] = None) -> Tuple[float, ...]:
    """
    Box lengths T = L = 2 pi a tau / sqrt(q_N) on which every integer mode
    (m, n) with m^2 - |n|^2 = tau^2 lies exactly on the mass shell
    """
    _require_odd(params, "A shell box")
    if isinstance(tau, bool) or not isinstance(tau, int) or tau < 1:
        raise DomainError(f"tau must be a positive integer, got {tau!r}", {'tau': tau})
    dims = params.dims if dims is None else dims
    length = 2.0 * math.pi * params.a * tau / math.sqrt(shell_root(params.order))
    return (length,) * dims


def shell_lattice(
    tau: int,
    dims: int = 2,
    max_index: Optional[int] = None
) -> List[Tuple[int, Tuple[int, ...]]]:
    """
    Integer solutions (m > 0, n) of m^2 - |n|^2 = tau^2 with |n_i| <= max_index

    Sorted by m, then n. The default bound (tau^2 - 1)//2 covers every
    solution in D = 2; higher D enumerates the full cube, so pass a bound.
    """
    if tau < 1:
        raise DomainError(f"tau must be a positive integer, got {tau!r}", {'tau': tau})
    bound = (tau * tau - 1) // 2 if max_index is None else max_index
    points: List[Tuple[int, Tuple[int, ...]]] = []
    for n in np.ndindex(*([2 * bound + 1] * (dims - 1))):
        vec = tuple(int(v) - bound for v in n)
        m_squared = tau * tau + sum(v * v for v in vec)
        m = math.isqrt(m_squared)
        if m * m == m_squared:
            points.append((m, vec))
    points.sort()
    return points


def lattice_wavevector(box_lengths: Sequence[float], n: Sequence[int]) -> Tuple[float, ...]:
    """k_i = 2 pi n_i / L_i for the spatial axes of a box"""
    return tuple(2.0 * math.pi * v / length for v, length in zip(n, box_lengths[1:]))


def _check_shell_collision(params: ModelParams, p_squared: np.ndarray) -> None:
    q_n = shell_root(params.order)
    distance = np.abs(params.a ** 2 * p_squared - q_n)
    index = np.unravel_index(int(np.argmin(distance)), distance.shape)
    closest = float(distance[index])
    if closest < config.DELTA_SHELL:
        logger.error(f"❌ Grid mode {tuple(int(i) for i in index)} lies on the mass shell (distance {closest:.3e})")
        raise ShellCollisionError(
            f"Grid mode {tuple(int(i) for i in index)} is within {config.DELTA_SHELL} of the mass shell "
            f"q_N={q_n!r}; choose a contour (principal_value or feynman_eps) or shift the grid",
            {'mode_index': [int(i) for i in index], 'distance': closest,
             'q_N': q_n, 'delta_shell': config.DELTA_SHELL}
        )


def _invert(
    J: GridField,
    multiplier: np.ndarray,
    mask: Optional[np.ndarray] = None
) -> GridField:
    coefficients = np.fft.fftn(J.values)
    if mask is not None:
        coefficients = np.where(mask, coefficients, 0.0)
    product_ = coefficients * multiplier
    out = np.fft.ifftn(product_)
    if J.is_complex or np.iscomplexobj(multiplier):
        return J.with_values(out)
    return J.with_values(checked_real_part(out, product_))


def _relative_residual(params: ModelParams, kind: OperatorKind, phi: GridField, J: GridField) -> float:
    scale = J.max_abs()
    if scale == 0:
        return 0.0
    image = apply_operator(OperatorSymbol(params, kind), phi)
    return float(np.max(np.abs(image.values - J.values))) / scale


def _spectral_residual(
    J: GridField,
    coefficients: np.ndarray,
    multiplier: np.ndarray,
    symbol: np.ndarray,
    mask: np.ndarray
) -> float:
    """
    max |L phi - J| / max |J| from the multipliers used for phi

    No forward amplification guard applies here. A mode whose multiplier
    underflowed contributes its full source coefficient.
    """
    scale = J.max_abs()
    if scale == 0:
        return 0.0
    with np.errstate(over='ignore', invalid='ignore'):
        image_coefficients = coefficients * (multiplier * symbol)
    image_coefficients = np.where(mask & np.isfinite(image_coefficients), image_coefficients, 0.0)
    image = np.fft.ifftn(image_coefficients)
    return float(np.max(np.abs(image - J.values))) / scale


def solve_sourced_spectral_with_diagnostics(
    params: ModelParams,
    kind: OperatorKind,
    J: Union[GridField, SourceField]
) -> Tuple[GridField, SolveDiagnostics]:
    """
    phi_hat = J_hat / L(p^2) mode by mode

    Finite order: the symbol is certified nonzero on every grid mode (odd N
    additionally refuses grids with a mode within DELTA_SHELL of the shell).
    Infinite order: only populated modes are inverted, each through
    a^2 exp(+a^2 p^2) bounded by AMPLIFICATION_CAP.

    Raises:
        ShellCollisionError: odd N with a grid mode on the shell
        AmplificationError: singular symbol, or infinite-order factor above the cap
    """
    if isinstance(J, SourceField):
        J = J.to_grid()
    if params.dims != J.dims:
        raise DomainError(
            f"Model dimension {params.dims} does not match grid dimension {J.dims}",
            {'model_dims': params.dims, 'grid_dims': J.dims}
        )
    p_squared = J.spec.p_squared()
    symbol = symbol_values(OperatorSymbol(params, kind), p_squared)
    a2 = params.a ** 2

    if kind == OperatorKind.INFINITE_ORDER:
        coefficients = np.fft.fftn(J.values)
        mask = populated_modes(coefficients)
        with np.errstate(over='ignore'):
            factor = np.exp(a2 * p_squared)
        max_amp = amplification_guard(factor, mask, 'inverse')
        multiplier = np.where(mask, a2 * np.where(mask, factor, 0.0), 0.0)
        phi = _invert(J, multiplier, mask)
        min_symbol = float(np.min(np.abs(symbol[mask]))) if mask.any() else float(np.min(np.abs(symbol)))
        residual = _spectral_residual(J, coefficients, multiplier, symbol, mask)
    else:
        if params.is_odd:
            _check_shell_collision(params, p_squared)
        magnitudes = np.abs(symbol)
        min_symbol = float(np.min(magnitudes))
        if not min_symbol > 0:
            raise AmplificationError(
                f"Operator symbol vanishes on a grid mode for N={params.order}",
                {'order': params.order, 'min_symbol': min_symbol}
            )
        max_amp = float(np.max(1.0 / (a2 * magnitudes)))
        phi = _invert(J, 1.0 / symbol)
        residual = _relative_residual(params, kind, phi, J)

    diagnostics = SolveDiagnostics(
        min_symbol=min_symbol,
        max_amplification=max_amp,
        residual=residual,
    )
    logger.info(
        f"🧮 Spectral solve N={params.order} ({kind.value})\n"
        f"   ├─ Grid: {'x'.join(str(n) for n in J.shape)}\n"
        f"   ├─ Min |symbol|: {diagnostics.min_symbol:.3e}\n"
        f"   ├─ Max amplification: {diagnostics.max_amplification:.3e}\n"
        f"   └─ Residual: {diagnostics.residual:.3e}"
    )
    return phi, diagnostics


def solve_sourced_spectral(
    params: ModelParams,
    kind: OperatorKind,
    J: Union[GridField, SourceField]
) -> GridField:
    """Unique band-limited solution of L phi = J (see the diagnostics variant)"""
    return solve_sourced_spectral_with_diagnostics(params, kind, J)[0]


def solve_sourced_odd_with_diagnostics(
    params: ModelParams,
    J: Union[GridField, SourceField],
    contour: ContourKind = ContourKind.FEYNMAN_EPS,
    eps: float = config.DEFAULT_FEYNMAN_EPS
) -> Tuple[GridField, SolveDiagnostics]:
    """
    One particular solution for odd N: phi_hat = J_hat / L(p^2 +- i eps)

    Any homogeneous_solution may be added. A shifted contour yields a
    complex grid; `realize` takes the real part by convention.
    """
    _require_odd(params, "A contour solve")
    if isinstance(J, SourceField):
        J = J.to_grid()
    spec = PropagatorSpec(params, contour=contour, eps=eps)
    p_squared = J.spec.p_squared()
    if contour == ContourKind.NONE:
        _check_shell_collision(params, p_squared)
    inverse = inverse_symbol_values(spec, p_squared)
    phi = _invert(J, inverse)

    magnitudes = np.abs(inverse)
    diagnostics = SolveDiagnostics(
        min_symbol=float(1.0 / np.max(magnitudes)),
        max_amplification=float(np.max(magnitudes)) / params.a ** 2,
        residual=_relative_residual(params, OperatorKind.FINITE_ORDER, phi, J),
    )
    logger.info(
        f"🧮 Contour solve N={params.order} ({contour.value}, eps={eps})\n"
        f"   ├─ Max amplification: {diagnostics.max_amplification:.3e}\n"
        f"   └─ Residual: {diagnostics.residual:.3e}"
    )
    return phi, diagnostics


def solve_sourced_odd(
    params: ModelParams,
    J: Union[GridField, SourceField],
    contour: ContourKind = ContourKind.FEYNMAN_EPS,
    eps: float = config.DEFAULT_FEYNMAN_EPS
) -> GridField:
    return solve_sourced_odd_with_diagnostics(params, J, contour, eps)[0]


def realize(g: GridField) -> GridField:
    """Real part of a complex solution (a convention, not a prescription)"""
    if not g.is_complex:
        return g
    logger.debug(f"Taking real part of complex solution (max |Im| {float(np.max(np.abs(g.values.imag))):.3e})")
    return g.with_values(g.values.real)


def locate_shell(params: ModelParams, k: Sequence[float], tol: float = 1e-10) -> float:
    """
    Bisect L_N(omega^2 - |k|^2) along omega > |k| to its unique zero

    L_N > 0 on the light cone and negative beyond the shell for odd N.
    """
    _require_odd(params, "Shell location")
    symbol = OperatorSymbol(params)
    k_abs = math.sqrt(sum(float(v) ** 2 for v in k))

    def value(omega: float) -> float:
        return symbol_value(symbol, omega * omega - k_abs * k_abs)

    lo = k_abs
    hi = max(2.0 * k_abs, 1.0 / params.a)
    while value(hi) > 0:
        hi *= 2.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if value(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
