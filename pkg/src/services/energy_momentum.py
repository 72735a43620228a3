#!/usr/bin/env python3
"""
Canonical energy-momentum tensor T^{alpha mu} of the 2N-th order theory

    T^(2N) = eta phi^2/(2a^2)
             + sum_n c_n [ eta phi box^n phi
                           - sum_m (-1)^m eta^<alpha mu(m) nu(2n-m-1)>
                                 d_mu(m) phi  d_nu(2n-m-1) d^mu phi ]
    c_n = a^(2(n-1)) / (2 n!)

alpha is the divergence index, mu the translation index; the tensor is not
symmetrized. Off shell it obeys d_alpha T^{alpha mu} = E(phi) d^mu phi with
E(phi) = L phi the field-equation operator.
"""

import math
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Tuple

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

from .models import ModelParams, DomainError, RangeError, CommensurabilityError
from .propagator import OperatorSymbol, symbol_value
from .pairings import labelled_contract
from .fields import (
    ModeField, GridSpec, GridField, FieldJet, minkowski_metric, mode_indices,
    grid_jet, spectral_derivative, apply_operator, populated_modes
)

logger = get_solver_logger()

# Sign in d_alpha T^{alpha mu} = NOETHER_SIGN * E(phi) d^mu phi, fixed by the N=1 computation
NOETHER_SIGN = 1.0


@dataclass(frozen=True, eq=False)
class EMTField:
    """T^{alpha mu} sampled on a periodic grid; components[alpha, mu] has the grid shape"""
    spec: GridSpec
    components: np.ndarray
    order: int

    def __post_init__(self):
        dims = self.spec.dims
        if self.components.shape != (dims, dims) + self.spec.shape:
            raise DomainError(
                f"EMT components shape {self.components.shape} does not match grid",
                {'shape': list(self.components.shape)}
            )
        if not np.all(np.isfinite(self.components)):
            raise DomainError("EMT components must be finite")
        self.components.setflags(write=False)

    @property
    def dims(self) -> int:
        return self.spec.dims

    def component(self, alpha: int, mu: int) -> np.ndarray:
        return self.components[alpha, mu]

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.components)))


@dataclass(frozen=True)
class EMTTerm:
    """One term of the recursion: kind is 'mass', 'box' or 'sym' (order n, split m)"""
    kind: str
    n: int
    m: int
    coefficient: float

    def to_dict(self) -> Dict[str, Any]:
        return {'kind': self.kind, 'n': self.n, 'm': self.m, 'coefficient': self.coefficient}


def _check_emt_order(params: ModelParams, cap: int) -> None:
    if params.order > cap:
        raise RangeError(
            f"Energy-momentum tensor supported for N <= {cap}, got N={params.order}",
            {'order': params.order, 'max': cap}
        )


def level_coefficient(a: float, n: int) -> float:
    """c_n = a^(2(n-1)) / (2 n!)"""
    return a ** (2 * (n - 1)) / (2.0 * math.factorial(n))


def emt_terms(params: ModelParams) -> List[EMTTerm]:
    """Every term the recursion generates up to order N, signs included"""
    a = params.a
    terms = [EMTTerm('mass', 0, 0, 1.0 / (2.0 * a ** 2))]
    for n in range(1, params.order + 1):
        c = level_coefficient(a, n)
        terms.append(EMTTerm('box', n, 0, c))
        for m in range(2 * n):
            terms.append(EMTTerm('sym', n, m, -c * (-1) ** m))
    return terms


def recursion_term_count(N: int) -> int:
    """1 mass term plus (1 + 2n) terms at each level n: (N+1)^2"""
    return (N + 1) ** 2


# ---------------------------------------------------------------------------
# Closed forms on derivative jets
# ---------------------------------------------------------------------------

def _raised(jet: FieldJet) -> Dict[str, np.ndarray]:
    eta = minkowski_metric(jet.dims)
    out: Dict[str, np.ndarray] = {'phi': jet.phi}
    if jet.max_order >= 1:
        out['d1'] = np.einsum('ab,b...->a...', eta, jet.d(1))
    if jet.max_order >= 2:
        d2 = jet.d(2)
        out['d2'] = np.einsum('ab,cd,bd...->ac...', eta, eta, d2)
        out['box'] = np.einsum('ab,ab...->...', eta, d2)
    if jet.max_order >= 3:
        d3 = jet.d(3)
        # d^a box phi
        out['d1_box'] = np.einsum('ab,cd,bcd...->a...', eta, eta, d3)
        # d_l phi d^a d^l d^m phi needs d^a d^l d^m with l raised
        out['d3'] = np.einsum('ab,cd,ef,bdf...->ace...', eta, eta, eta, d3)
    if jet.max_order >= 4:
        d4 = jet.d(4)
        out['d2_box'] = np.einsum('ab,cd,ef,bdef...->ac...', eta, eta, eta, d4)
        out['box2'] = np.einsum('ab,cd,abcd...->...', eta, eta, d4)
    return out


def _outer(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    return np.einsum('a...,m...->am...', u, v)


def emt_closed_N1(a: float, jet: FieldJet) -> np.ndarray:
    """
    T^(2) = eta phi^2/(2a^2) + 1/2 eta phi box phi
            - 1/2 phi d^a d^m phi + 1/2 d^a phi d^m phi
    """
    if jet.max_order < 2:
        raise DomainError("T^(2) needs derivatives up to second order")
    r = _raised(jet)
    phi = r['phi']
    eta = minkowski_metric(jet.dims)
    eta_b = eta.reshape(eta.shape + (1,) * phi.ndim)
    return (
        eta_b * (phi ** 2 / (2.0 * a ** 2) + 0.5 * phi * r['box'])
        - 0.5 * phi * r['d2']
        + 0.5 * _outer(r['d1'], r['d1'])
    )


def emt_closed_N2(a: float, jet: FieldJet) -> np.ndarray:
    """T^(4) = T^(2) plus the seven a^2 terms of the fourth-order theory, written out"""
    if jet.max_order < 4:
        raise DomainError("T^(4) needs derivatives up to fourth order")
    r = _raised(jet)
    phi = r['phi']
    eta = minkowski_metric(jet.dims)
    eta_b = eta.reshape(eta.shape + (1,) * phi.ndim)
    lower_d1 = jet.d(1)
    lower_d2 = jet.d(2)
    a2 = a ** 2

    # d_l phi d^a d^l d^m phi
    grad_d3 = np.einsum('l...,alm...->am...', lower_d1, r['d3'])
    # d^a d_l phi d^l d^m phi
    d2_d2 = np.einsum('al...,lm...->am...', np.einsum('ab,bl...->al...', eta, lower_d2), r['d2'])

    return (
        emt_closed_N1(a, jet)
        + a2 / 4.0 * eta_b * phi * r['box2']
        - a2 / 4.0 * phi * r['d2_box']
        + a2 / 12.0 * _outer(r['d1'], r['d1_box'])
        + a2 / 6.0 * grad_d3
        - a2 / 6.0 * d2_d2
        - a2 / 12.0 * r['box'] * r['d2']
        + a2 / 4.0 * _outer(r['d1_box'], r['d1'])
    )


def _check_grid_resolution(g: GridField) -> None:
    """Every populated Fourier index must satisfy 4|index| < n so the quadratic tensor does not alias"""
    coefficients = np.fft.fftn(g.values)
    populated = populated_modes(coefficients)
    if not populated.any():
        return
    for axis, n in enumerate(g.shape):
        indices = np.rint(np.fft.fftfreq(n) * n).astype(int)
        used = np.any(populated, axis=tuple(i for i in range(g.dims) if i != axis))
        widest = int(np.max(np.abs(indices[used])))
        if 4 * widest >= n:
            raise CommensurabilityError(
                f"Quadratic products of mode index {widest} alias on {n} points along axis {axis}; "
                f"refine the grid",
                {'axis': axis, 'index': widest, 'points': n}
            )


def emt_closed(params: ModelParams, g: GridField) -> EMTField:
    """
    Closed-form T^(2) or T^(4) on a real grid using spectral derivative jets

    Raises:
        CommensurabilityError: a populated mode has 4|index| >= n on some axis
    """
    if params.order not in (1, 2):
        raise RangeError(
            f"Closed-form grid tensor supported for N in {{1, 2}}, got N={params.order}",
            {'order': params.order, 'max': config.EMT_GRID_MAX_ORDER}
        )
    if g.is_complex:
        raise DomainError("Energy-momentum tensor is defined for real fields only")
    _check_grid_resolution(g)
    jet = grid_jet(g, 2 * params.order)
    builder = emt_closed_N1 if params.order == 1 else emt_closed_N2
    return EMTField(spec=g.spec, components=builder(params.a, jet), order=params.order)


# ---------------------------------------------------------------------------
# General recursion on mode fields
# ---------------------------------------------------------------------------

def _mode_kernel(params: ModelParams, components: List[Tuple[complex, np.ndarray]]) -> np.ndarray:
    """
    K[j, l, alpha, mu] with T^{alpha mu} = sum_jl K z_j z_l, z_j = c_j e^(-i p_j.x)

    Derivatives on the first factor come from mode j, those on the second
    from mode l; each pulls down -i p, and the 2n of them give (-1)^n.
    """
    dims = params.dims
    eta = minkowski_metric(dims)
    terms = emt_terms(params)
    count = len(components)
    momenta = [p for _, p in components]
    kernel = np.zeros((count, count, dims, dims), dtype=complex)

    for j, p_j in enumerate(momenta):
        for l, p_l in enumerate(momenta):
            gram = {
                ('a', 'a'): float(p_j @ eta @ p_j),
                ('a', 'b'): float(p_j @ eta @ p_l),
                ('b', 'b'): float(p_l @ eta @ p_l),
            }
            p_sq = gram[('b', 'b')]
            scalar = 0.0
            for term in terms:
                if term.kind == 'mass':
                    scalar += term.coefficient
                elif term.kind == 'box':
                    scalar += term.coefficient * (-p_sq) ** term.n
            kernel[j, l] += eta * scalar

            for alpha in range(dims):
                gram[('a', 'w')] = p_j[alpha]
                gram[('b', 'w')] = p_l[alpha]
                for term in terms:
                    if term.kind != 'sym':
                        continue
                    r = 2 * term.n - term.m - 1
                    labels = ('w',) + ('a',) * term.m + ('b',) * r
                    contraction = labelled_contract(labels, gram)
                    kernel[j, l, alpha, :] += term.coefficient * (-1) ** term.n * contraction * p_l
    return kernel


def _mode_waves(mf: ModeField, points: np.ndarray) -> Tuple[List[Tuple[complex, np.ndarray]], np.ndarray]:
    eta = minkowski_metric(mf.params.dims)
    components = mf.components()
    waves = np.empty((len(components),) + points.shape[1:], dtype=complex)
    for index, (coefficient, momentum) in enumerate(components):
        phase = np.tensordot(eta @ momentum, points, axes=(0, 0))
        waves[index] = coefficient * np.exp(-1j * phase)
    return components, waves


def _check_emt_resolution(mf: ModeField, spec: GridSpec) -> None:
    for mode in mf.modes:
        indices = mode_indices(mode, spec)
        for axis, (index, n) in enumerate(zip(indices, spec.shape)):
            if 4 * abs(index) >= n:
                raise CommensurabilityError(
                    f"Quadratic products of mode index {index} alias on {n} points along axis {axis}",
                    {'axis': axis, 'index': index, 'points': n}
                )


def emt_general(params: ModelParams, field: ModeField, spec: GridSpec) -> EMTField:
    """
    T^(2N) by the general recursion, evaluated on the grid points of spec

    Each symmetrized metric term is contracted with the mode momenta through
    the pairing sums. Modes must be commensurate with the grid and their
    pairwise products resolved, so the result can be differentiated
    spectrally.

    Raises:
        RangeError: N > 4
    """
    _check_emt_order(params, config.EMT_MAX_ORDER)
    if field.params.dims != spec.dims or params.dims != spec.dims:
        raise DomainError("Model, field and grid dimensions must agree")
    _check_emt_resolution(field, spec)
    components, waves = _mode_waves(field, spec.coordinates())
    kernel = _mode_kernel(params, components)
    tensor = np.einsum('jlam,j...,l...->am...', kernel, waves, waves)
    if field.is_real:
        tensor = tensor.real
    logger.debug(f"EMT N={params.order}: {len(components)} components, {recursion_term_count(params.order)} terms")
    return EMTField(spec=spec, components=tensor, order=params.order)


def emt_general_at(params: ModelParams, field: ModeField, points: np.ndarray) -> np.ndarray:
    """T^(2N) at arbitrary points of shape (D, ...); no grid required"""
    _check_emt_order(params, config.EMT_MAX_ORDER)
    components, waves = _mode_waves(field, np.asarray(points, dtype=float))
    tensor = np.einsum('jlam,j...,l...->am...', _mode_kernel(params, components), waves, waves)
    return tensor.real if field.is_real else tensor


# ---------------------------------------------------------------------------
# Divergence and Noether identity
# ---------------------------------------------------------------------------

def divergence(T: EMTField) -> np.ndarray:
    """d_alpha T^{alpha mu}, spectral; shape (D, *grid shape)"""
    dims = T.dims
    out = np.zeros((dims,) + T.spec.shape, dtype=T.components.dtype)
    for mu in range(dims):
        for alpha in range(dims):
            orders = [0] * dims
            orders[alpha] = 1
            out[mu] += spectral_derivative(GridField(T.spec, T.components[alpha, mu]), orders)
    return out


def noether_identity_residual(params: ModelParams, field: GridField) -> float:
    """
    max |d_alpha T^{alpha mu} - E(phi) d^mu phi| on a grid (N in {1, 2})

    Holds off shell; on a solution E(phi) = 0 and it reduces to conservation.
    """
    _check_emt_order(params, config.EMT_GRID_MAX_ORDER)
    T = emt_closed(params, field)
    div = divergence(T)
    euler = apply_operator(OperatorSymbol(params), field).values
    eta = minkowski_metric(field.dims)
    grad_up = np.einsum('ab,b...->a...', eta, grid_jet(field, 1).d(1))
    residual = float(np.max(np.abs(div - NOETHER_SIGN * euler * grad_up)))
    logger.debug(f"Noether residual N={params.order}: {residual:.3e} (raw divergence {np.max(np.abs(div)):.3e})")
    return residual


def noether_identity_residual_modes(params: ModelParams, field: ModeField, points: np.ndarray) -> Dict[str, float]:
    """
    Analytic Noether check for mode fields (N <= 4)

    Returns:
        {'residual': max |div T - E d phi|, 'divergence': max |div T|}
    """
    _check_emt_order(params, config.EMT_MAX_ORDER)
    eta = minkowski_metric(params.dims)
    components, waves = _mode_waves(field, np.asarray(points, dtype=float))
    kernel = _mode_kernel(params, components)
    lower = np.array([eta @ p for _, p in components])
    upper = np.array([p for _, p in components])
    # d_alpha (z_j z_l) = -i (p_j + p_l)_alpha z_j z_l
    pair_sum = -1j * (lower[:, None, :] + lower[None, :, :])
    div_kernel = np.einsum('jla,jlam->jlm', pair_sum, kernel)
    div = np.einsum('jlm,j...,l...->m...', div_kernel, waves, waves)

    symbol = OperatorSymbol(params)
    euler = np.array([symbol_value(symbol, float(p @ eta @ p)) for p in upper])
    source_kernel = np.einsum('j,lm->jlm', euler, -1j * upper)
    source = np.einsum('jlm,j...,l...->m...', source_kernel, waves, waves)
    return {
        'residual': float(np.max(np.abs(div - NOETHER_SIGN * source))),
        'divergence': float(np.max(np.abs(div))),
    }


def emt_summary(T: EMTField, div: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """
    Integrals over the t = 0 slice and the largest divergence

    energy_total = sum T^{00} dV, momentum_total[i] = sum T^{0 i} dV
    """
    if div is None:
        div = divergence(T)
    cell = float(np.prod(T.spec.spacing[1:]))
    energy = float(np.sum(T.components[0, 0][0])) * cell
    momentum = [float(np.sum(T.components[0, i][0])) * cell for i in range(1, T.dims)]
    summary = {
        'energy_total': energy,
        'momentum_total': momentum,
        'max_divergence': float(np.max(np.abs(div))),
    }
    logger.info(
        f"📊 EMT summary N={T.order}\n"
        f"   ├─ Energy: {energy!r}\n"
        f"   ├─ Momentum: {momentum!r}\n"
        f"   └─ Max divergence: {summary['max_divergence']:.3e}"
    )
    return summary
