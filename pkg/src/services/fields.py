#!/usr/bin/env python3
"""
Field representations

- ModeField: exact superposition of plane waves e^(-i(wt - k.x)) (+ c.c.)
- GridField: samples on a periodic space-time box, axis order (t, x1, ...)

Operators act spectrally on grids: forward FFT (unnormalized), multiply each
discrete mode by the symbol at p^2 = w^2 - |k|^2, inverse FFT (divides by the
point count).
"""

import math
from dataclasses import dataclass, field
from itertools import combinations_with_replacement, product
from typing import Dict, List, Optional, Sequence, Tuple

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
    ModelParams, OperatorKind, DomainError, CommensurabilityError,
    AmplificationError, NumericalRobustnessError
)
from .propagator import OperatorSymbol, symbol_values

logger = get_solver_logger()


def minkowski_metric(dims: int) -> np.ndarray:
    """diag(+1, -1, ..., -1)"""
    return np.diag([1.0] + [-1.0] * (dims - 1))


@dataclass(frozen=True)
class PlaneWaveMode:
    """One plane wave; conjugate_pair adds the complex conjugate"""
    amplitude: complex
    k: Tuple[float, ...]
    omega: float
    conjugate_pair: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'amplitude', complex(self.amplitude))
        object.__setattr__(self, 'k', tuple(float(v) for v in self.k))
        object.__setattr__(self, 'omega', float(self.omega))

    @property
    def p_squared(self) -> float:
        return self.omega ** 2 - sum(v * v for v in self.k)

    @property
    def momentum(self) -> np.ndarray:
        """Contravariant p^mu = (w, k)"""
        return np.array((self.omega,) + self.k)


@dataclass(frozen=True)
class ModeField:
    """Plane-wave superposition; identical (k, w, pairing) modes are merged"""
    modes: Tuple[PlaneWaveMode, ...]
    params: ModelParams

    def __post_init__(self):
        merged: Dict[Tuple, complex] = {}
        for mode in self.modes:
            if len(mode.k) != self.params.dims - 1:
                raise DomainError(
                    f"Mode wavevector has {len(mode.k)} components, expected {self.params.dims - 1}",
                    {'k': list(mode.k), 'dims': self.params.dims}
                )
            key = (mode.k, mode.omega, mode.conjugate_pair)
            merged[key] = merged.get(key, 0j) + mode.amplitude
        object.__setattr__(self, 'modes', tuple(
            PlaneWaveMode(amplitude=amp, k=key[0], omega=key[1], conjugate_pair=key[2])
            for key, amp in merged.items()
        ))

    @property
    def is_real(self) -> bool:
        return all(mode.conjugate_pair for mode in self.modes)

    def components(self) -> List[Tuple[complex, np.ndarray]]:
        """(coefficient, p^mu) for every exponential e^(-ip.x) in the field"""
        out: List[Tuple[complex, np.ndarray]] = []
        for mode in self.modes:
            out.append((mode.amplitude, mode.momentum))
            if mode.conjugate_pair:
                out.append((mode.amplitude.conjugate(), -mode.momentum))
        return out


@dataclass(frozen=True)
class GridSpec:
    """Periodic box: D lengths and D power-of-two point counts"""
    box_lengths: Tuple[float, ...]
    shape: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'box_lengths', tuple(float(v) for v in self.box_lengths))
        object.__setattr__(self, 'shape', tuple(int(v) for v in self.shape))
        if len(self.box_lengths) != len(self.shape) or len(self.shape) < 2:
            raise DomainError(
                "box_lengths and shape must have the same length D >= 2",
                {'box_lengths': list(self.box_lengths), 'shape': list(self.shape)}
            )
        for length in self.box_lengths:
            if not (math.isfinite(length) and length > 0):
                raise DomainError(f"Box length must be positive, got {length}", {'box_lengths': list(self.box_lengths)})
        for n in self.shape:
            if n < 2 or n & (n - 1):
                raise DomainError(f"Grid size must be a power of two >= 2, got {n}", {'shape': list(self.shape)})

    @property
    def dims(self) -> int:
        return len(self.shape)

    @property
    def spacing(self) -> Tuple[float, ...]:
        return tuple(length / n for length, n in zip(self.box_lengths, self.shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.box_lengths))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def coordinates(self) -> np.ndarray:
        """Stacked coordinate arrays, shape (D, *shape)"""
        axes = [np.arange(n) * d for n, d in zip(self.shape, self.spacing)]
        return np.stack(np.meshgrid(*axes, indexing='ij'))

    def wavenumbers(self, axis: int) -> np.ndarray:
        """Angular wavenumbers 2 pi n / L along one axis, FFT ordering"""
        n = self.shape[axis]
        return 2.0 * np.pi * np.fft.fftfreq(n, d=self.spacing[axis])

    def _broadcast(self, axis: int, values: np.ndarray) -> np.ndarray:
        shape = [1] * self.dims
        shape[axis] = self.shape[axis]
        return values.reshape(shape)

    def p_squared(self) -> np.ndarray:
        """p^2 = kappa_t^2 - |kappa_x|^2 of every discrete mode"""
        total = self._broadcast(0, self.wavenumbers(0) ** 2)
        for axis in range(1, self.dims):
            total = total - self._broadcast(axis, self.wavenumbers(axis) ** 2)
        return np.broadcast_to(total, self.shape)

    def derivative_multiplier(self, orders: Sequence[int]) -> np.ndarray:
        """Fourier multiplier of d^orders (lower indices); Nyquist dropped for odd orders"""
        mult = np.ones(self.shape, dtype=complex)
        for axis, order in enumerate(orders):
            if order == 0:
                continue
            kappa = self.wavenumbers(axis).astype(complex)
            factor = (1j * kappa) ** order
            if order % 2 == 1:
                factor[self.shape[axis] // 2] = 0.0
            mult = mult * self._broadcast(axis, factor)
        return mult


@dataclass(frozen=True, eq=False)
class GridField:
    """Sampled field on a periodic box (values read-only)"""
    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, copy=True)
        if values.shape != self.spec.shape:
            raise DomainError(
                f"Values shape {values.shape} does not match grid shape {self.spec.shape}",
                {'values_shape': list(values.shape), 'shape': list(self.spec.shape)}
            )
        if not np.all(np.isfinite(values)):
            raise DomainError("Grid values must be finite")
        if np.iscomplexobj(values):
            values = values.astype(complex)
        else:
            values = values.astype(float)
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

    @property
    def box_lengths(self) -> Tuple[float, ...]:
        return self.spec.box_lengths

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.spec.shape

    @property
    def dims(self) -> int:
        return self.spec.dims

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.values)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def with_values(self, values: np.ndarray) -> "GridField":
        return GridField(self.spec, values)


@dataclass(frozen=True)
class ResidualReport:
    """Normalized residual max|L phi| / max|phi|"""
    norm: float
    degenerate: bool = False

    def __float__(self) -> float:
        return self.norm


def _lattice_index(value: float, length: float, n: int, what: str, mode: PlaneWaveMode) -> int:
    cycles = value * length / (2.0 * np.pi)
    index = int(round(cycles))
    if abs(cycles - index) > config.COMMENSURABILITY_RTOL * max(1.0, abs(cycles)):
        raise CommensurabilityError(
            f"Mode {what}={value!r} is not commensurate with box length {length!r} "
            f"({cycles!r} periods)",
            {'mode': _mode_dict(mode), 'axis': what, 'periods': cycles}
        )
    if 2 * abs(index) >= n:
        raise CommensurabilityError(
            f"Mode {what}={value!r} is not resolved by {n} points (index {index})",
            {'mode': _mode_dict(mode), 'axis': what, 'index': index, 'points': n}
        )
    return index


def _mode_dict(mode: PlaneWaveMode) -> Dict:
    return {
        'amplitude': [mode.amplitude.real, mode.amplitude.imag],
        'k': list(mode.k),
        'omega': mode.omega,
        'conjugate_pair': mode.conjugate_pair,
    }


def mode_indices(mode: PlaneWaveMode, spec: GridSpec) -> Tuple[int, ...]:
    """Integer lattice indices (m_t, n_1, ...) of a commensurate mode"""
    if len(mode.k) != spec.dims - 1:
        raise DomainError(
            f"Mode has {len(mode.k)} spatial components, grid has {spec.dims - 1}",
            {'mode': _mode_dict(mode)}
        )
    indices = [_lattice_index(mode.omega, spec.box_lengths[0], spec.shape[0], 'omega', mode)]
    for axis, kv in enumerate(mode.k, start=1):
        indices.append(_lattice_index(kv, spec.box_lengths[axis], spec.shape[axis], f'k[{axis - 1}]', mode))
    return tuple(indices)


def sample(mf: ModeField, spec: GridSpec) -> GridField:
    """
    Evaluate a ModeField on a periodic grid

    Phases are built from the integer lattice indices, so a commensurate mode
    is sampled to machine precision however long the box.

    Raises:
        CommensurabilityError: a mode does not fit the box, or is not resolved
    """
    if mf.params.dims != spec.dims:
        raise DomainError(
            f"Field dimension {mf.params.dims} does not match grid dimension {spec.dims}",
            {'field_dims': mf.params.dims, 'grid_dims': spec.dims}
        )
    grids = np.meshgrid(*[np.arange(n) for n in spec.shape], indexing='ij')
    total = np.zeros(spec.shape, dtype=complex)
    for mode in mf.modes:
        indices = mode_indices(mode, spec)
        # e^(-i w t) along time, e^(+i k.x) along space
        frac = np.zeros(spec.shape, dtype=float)
        for axis, (index, n) in enumerate(zip(indices, spec.shape)):
            sign = -1 if axis == 0 else 1
            frac = frac + np.mod(sign * index * grids[axis], n) / n
        wave = mode.amplitude * np.exp(2j * np.pi * frac)
        total += wave
        if mode.conjugate_pair:
            total += np.conj(wave)

    if mf.is_real:
        return GridField(spec, total.real)
    return GridField(spec, total)


def populated_modes(coefficients: np.ndarray) -> np.ndarray:
    peak = np.max(np.abs(coefficients))
    if peak == 0:
        return np.zeros(coefficients.shape, dtype=bool)
    return np.abs(coefficients) > config.POPULATED_MODE_RTOL * peak


def amplification_guard(factor: np.ndarray, populated: np.ndarray, direction: str) -> float:
    with np.errstate(invalid='ignore'):
        active = np.where(populated, factor, 0.0)
    worst = float(np.max(active)) if active.size else 0.0
    if not math.isfinite(worst) or worst > config.AMPLIFICATION_CAP:
        raise AmplificationError(
            f"Infinite-order {direction} factor {worst:.3e} exceeds cap {config.AMPLIFICATION_CAP:.0e} "
            f"on a populated mode (field is not band-limited enough)",
            {'max_amplification': worst, 'cap': config.AMPLIFICATION_CAP, 'direction': direction}
        )
    return worst


def checked_real_part(out: np.ndarray, coefficients: np.ndarray) -> np.ndarray:
    scale = float(np.sum(np.abs(coefficients))) / coefficients.size
    leak = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if leak > config.REALITY_TOL * max(scale, np.finfo(float).tiny):
        raise NumericalRobustnessError(
            f"Imaginary leakage {leak:.3e} on a real field exceeds tolerance",
            {'leak': leak, 'scale': scale}
        )
    return out.real


def spectral_multiply(g: GridField, multiplier: np.ndarray) -> np.ndarray:
    """Apply a Fourier multiplier; real input with Hermitian multiplier stays real"""
    coefficients = np.fft.fftn(g.values)
    out = np.fft.ifftn(coefficients * multiplier)
    if g.is_complex:
        return out
    return checked_real_part(out, coefficients * multiplier)


def apply_operator(s: OperatorSymbol, g: GridField) -> GridField:
    """
    L phi on a grid by spectral multiplication

    Infinite-order symbols are applied to populated modes only and raise
    AmplificationError when exp(-a^2 p^2) exceeds the cap on one of them.
    """
    if s.params.dims != g.dims:
        raise DomainError(
            f"Operator dimension {s.params.dims} does not match grid dimension {g.dims}",
            {'operator_dims': s.params.dims, 'grid_dims': g.dims}
        )
    coefficients = np.fft.fftn(g.values)
    symbol = symbol_values(s, g.spec.p_squared())

    if s.kind == OperatorKind.INFINITE_ORDER:
        populated = populated_modes(coefficients)
        amplification_guard(symbol * s.params.a ** 2, populated, 'forward')
        product_ = np.where(populated, coefficients * np.where(populated, symbol, 0.0), 0.0)
    else:
        product_ = coefficients * symbol

    out = np.fft.ifftn(product_)
    if not g.is_complex:
        out = checked_real_part(out, product_)
    return g.with_values(out)


def residual_norm(
    params: ModelParams,
    g: GridField,
    kind: OperatorKind = OperatorKind.FINITE_ORDER
) -> ResidualReport:
    """max|L phi| / max|phi|; an identically zero field gives 0 with the degenerate flag"""
    scale = g.max_abs()
    if scale == 0:
        return ResidualReport(norm=0.0, degenerate=True)
    image = apply_operator(OperatorSymbol(params, kind), g)
    return ResidualReport(norm=image.max_abs() / scale)


def _require_real(g: GridField, what: str) -> None:
    if g.is_complex:
        raise DomainError(f"{what} is defined for real fields only")


def lagrangian_density(
    params: ModelParams,
    g: GridField,
    kind: OperatorKind = OperatorKind.FINITE_ORDER
) -> GridField:
    """Pointwise -1/2 phi (L phi)"""
    _require_real(g, "Lagrangian density")
    image = apply_operator(OperatorSymbol(params, kind), g)
    return g.with_values(-0.5 * g.values * image.values)


def evaluate_action(
    params: ModelParams,
    g: GridField,
    kind: OperatorKind = OperatorKind.FINITE_ORDER
) -> float:
    """S = -1/2 sum_grid phi (L phi) prod(Delta); the periodic sum is the exact integral"""
    density = lagrangian_density(params, g, kind)
    return float(np.sum(density.values)) * g.spec.cell_volume


def action_gradient_check(
    params: ModelParams,
    g: GridField,
    probe_points: int,
    h: float,
    kind: OperatorKind = OperatorKind.FINITE_ORDER,
    seed: int = 0
) -> float:
    """
    Compare central-difference dS/dphi at random grid points with -(L phi) prod(Delta)

    The action is quadratic, so the central difference has no truncation
    error; what remains is rounding of order eps*|S|/h.

    Returns:
        max absolute discrepancy over the probed points
    """
    _require_real(g, "Action gradient")
    if not (h > 0 and math.isfinite(h)):
        raise DomainError(f"Step h must be positive, got {h!r}", {'h': h})
    if probe_points < 1 or probe_points > g.spec.size:
        raise DomainError(
            f"probe_points must be in [1, {g.spec.size}], got {probe_points}",
            {'probe_points': probe_points}
        )

    rng = np.random.default_rng(seed)
    flat_points = rng.choice(g.spec.size, size=probe_points, replace=False)
    expected = -apply_operator(OperatorSymbol(params, kind), g).values * g.spec.cell_volume

    worst = 0.0
    base = np.array(g.values)
    for flat in flat_points:
        index = np.unravel_index(int(flat), g.shape)
        plus = base.copy()
        plus[index] += h
        minus = base.copy()
        minus[index] -= h
        s_plus = evaluate_action(params, g.with_values(plus), kind)
        s_minus = evaluate_action(params, g.with_values(minus), kind)
        derivative = (s_plus - s_minus) / (2.0 * h)
        worst = max(worst, abs(derivative - expected[index]))

    logger.debug(f"Action gradient check: {probe_points} points, h={h}, max discrepancy {worst:.3e}")
    return worst


@dataclass(frozen=True, eq=False)
class FieldJet:
    """
    phi and its lower-index derivative tensors at a set of points

    derivs[k] has shape (D,)*k + point_shape; derivs[0] is phi itself.
    """
    dims: int
    derivs: Dict[int, np.ndarray] = field(default_factory=dict)

    @property
    def phi(self) -> np.ndarray:
        return self.derivs[0]

    @property
    def max_order(self) -> int:
        return max(self.derivs)

    def d(self, k: int) -> np.ndarray:
        return self.derivs[k]


def _index_tuples(dims: int, k: int):
    return product(range(dims), repeat=k)


def spectral_derivative(g: GridField, orders: Sequence[int]) -> np.ndarray:
    """d^orders g with orders per axis (t, x1, ...)"""
    if len(orders) != g.dims:
        raise DomainError(f"Need {g.dims} derivative orders, got {len(orders)}")
    return spectral_multiply(g, g.spec.derivative_multiplier(orders))


def grid_jet(g: GridField, max_order: int) -> FieldJet:
    """Spectral derivative tensors up to max_order (each distinct one computed once)"""
    dims = g.dims
    cache: Dict[Tuple[int, ...], np.ndarray] = {}
    derivs: Dict[int, np.ndarray] = {0: np.array(g.values)}
    for k in range(1, max_order + 1):
        for combo in combinations_with_replacement(range(dims), k):
            orders = [combo.count(axis) for axis in range(dims)]
            cache[combo] = spectral_derivative(g, orders)
        tensor = np.empty((dims,) * k + g.shape, dtype=g.values.dtype)
        for idx in _index_tuples(dims, k):
            tensor[idx] = cache[tuple(sorted(idx))]
        derivs[k] = tensor
    return FieldJet(dims=dims, derivs=derivs)


def mode_jet(mf: ModeField, points: np.ndarray, max_order: int) -> FieldJet:
    """
    Analytic derivative tensors of a ModeField at points of shape (D, ...)

    Each lower-index derivative pulls down -i p_mu from e^(-ip.x).
    """
    dims = mf.params.dims
    points = np.asarray(points, dtype=float)
    if points.shape[0] != dims:
        raise DomainError(f"Points must have leading dimension {dims}", {'points_shape': list(points.shape)})
    eta = minkowski_metric(dims)
    point_shape = points.shape[1:]
    derivs = {k: np.zeros((dims,) * k + point_shape, dtype=complex) for k in range(max_order + 1)}

    for coefficient, momentum in mf.components():
        lower = eta @ momentum
        phase = np.tensordot(lower, points, axes=(0, 0))
        wave = coefficient * np.exp(-1j * phase)
        derivs[0] += wave
        factor = -1j * lower
        for k in range(1, max_order + 1):
            for idx in _index_tuples(dims, k):
                derivs[k][idx] += np.prod(factor[list(idx)]) * wave

    if mf.is_real:
        derivs = {k: v.real for k, v in derivs.items()}
    return FieldJet(dims=dims, derivs=derivs)
