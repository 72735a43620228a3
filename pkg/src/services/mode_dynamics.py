#!/usr/bin/env python3
"""
Time evolution of one spatial Fourier mode

Substituting box -> d^2/dt^2 + k^2 turns the field equation into the linear
ODE sum_n a^(2(n-1))/n! (d^2/dt^2 + k^2)^n phi = 0 of order 2N, reduced to a
first-order companion system on (phi, phi', ..., phi^(2N-1)).

Its characteristic roots satisfy lambda^2 = -k^2 - q/a^2 for each root q of
f_N: the real root of odd N gives the one oscillatory pair, the complex
roots give growing/decaying pairs. Even N therefore has nontrivial but
unbounded mode solutions, none of them a bounded plane wave.
"""

import cmath
import math
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence, Tuple

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

from .models import ModelParams, DomainError, RangeError, StabilityError, NumericalRobustnessError
from .dispersion import root_report
from .propagator import operator_coefficients

logger = get_solver_logger()


@dataclass(frozen=True, eq=False)
class ModeODE:
    """Companion reduction of the 2N-th order mode equation"""
    params: ModelParams
    k: float
    coefficients: Tuple[float, ...]
    companion: np.ndarray
    char_roots: Tuple[complex, ...]
    companion_eigenvalues: Tuple[complex, ...]
    companion_mismatch: float

    @property
    def size(self) -> int:
        return 2 * self.params.order

    @property
    def max_root(self) -> float:
        return max(abs(r) for r in self.char_roots)


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Uniformly spaced states; stops early when max |state| exceeds the blow-up threshold"""
    times: np.ndarray
    states: np.ndarray
    dt: float
    blew_up: bool = False

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]


def _check_ode_order(params: ModelParams) -> None:
    if params.order < 1 or params.order > config.ODE_MAX_ORDER:
        raise RangeError(
            f"Mode ODE supported for 1 <= N <= {config.ODE_MAX_ORDER}, got N={params.order}",
            {'order': params.order, 'min': 1, 'max': config.ODE_MAX_ORDER}
        )


def characteristic_polynomial(params: ModelParams, k: float) -> List[float]:
    """Ascending coefficients in lambda of sum_n c_n (lambda^2 + k^2)^n"""
    coefficients = [0.0] * (2 * params.order + 1)
    for n, c in enumerate(operator_coefficients(params)):
        for i in range(n + 1):
            coefficients[2 * i] += c * math.comb(n, i) * k ** (2 * (n - i))
    return coefficients


def _analytic_roots(params: ModelParams, k: float) -> List[complex]:
    report = root_report(params.order)
    roots: List[complex] = []
    # complex_roots holds all N roots, the real one included
    for q in report.complex_roots:
        lam = cmath.sqrt(-k * k - complex(q) / params.a ** 2)
        roots.extend([lam, -lam])
    return sorted(roots, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def _match(reference: Sequence[complex], candidates: Sequence[complex]) -> float:
    remaining = list(candidates)
    worst = 0.0
    for root in reference:
        index = min(range(len(remaining)), key=lambda i: abs(remaining[i] - root))
        worst = max(worst, abs(remaining.pop(index) - root) / (1.0 + abs(root)))
    return worst


def _polish(params: ModelParams, k: float, root: complex, steps: int = 5) -> complex:
    """
    Newton steps on sum_n c_n w^n, w = lambda^2 + k^2

    A step is kept only while |p| decreases.
    """
    coefficients = operator_coefficients(params)
    k2 = k * k

    def value_and_slope(lam: complex) -> Tuple[complex, complex]:
        w = lam * lam + k2
        value = slope = 0j
        for c in reversed(coefficients):
            slope = slope * w + value
            value = value * w + c
        return value, 2.0 * lam * slope

    lam = complex(root)
    value, slope = value_and_slope(lam)
    for _ in range(steps):
        if slope == 0 or value == 0:
            break
        candidate = lam - value / slope
        candidate_value, candidate_slope = value_and_slope(candidate)
        if not abs(candidate_value) < abs(value):
            break
        lam, value, slope = candidate, candidate_value, candidate_slope
    return lam


def _classify(roots: Sequence[complex]) -> Dict[str, int]:
    imaginary = growing = decaying = 0
    for root in roots:
        tol = 1e-8 * (1.0 + abs(root))
        if abs(root.real) < tol:
            imaginary += 1
        elif root.real > 0:
            growing += 1
        else:
            decaying += 1
    return {'oscillatory_pairs': imaginary // 2, 'growing': growing, 'decaying': decaying}


def build_mode_ode(params: ModelParams, k: float) -> ModeODE:
    """
    Monic ODE, companion matrix and characteristic roots for wavenumber k

    char_roots come from the roots of f_N. The companion eigenvalues are
    computed independently, Newton-polished, and must agree with them both
    in position and in classification.

    Examples:
        N=1, k=0, a=1 -> phi'' + phi = 0, roots +-i
        N=1, k=3, a=1 -> roots +-i sqrt(10)

    Raises:
        RangeError: N outside [1, 10]
        NumericalRobustnessError: companion eigenvalues disagree with the roots of f_N
    """
    _check_ode_order(params)
    if not (math.isfinite(k) and k >= 0):
        raise DomainError(f"Wavenumber magnitude must be non-negative, got {k!r}", {'k': k})

    poly = characteristic_polynomial(params, k)
    lead = poly[-1]
    monic = tuple(c / lead for c in poly[:-1])
    size = 2 * params.order
    companion = np.zeros((size, size))
    companion[np.arange(size - 1), np.arange(1, size)] = 1.0
    companion[-1, :] = -np.array(monic)

    eigenvalues = tuple(_polish(params, k, complex(z)) for z in np.linalg.eigvals(companion))
    roots = tuple(_analytic_roots(params, k))
    mismatch = _match(roots, eigenvalues)
    if mismatch > 1e-8:
        logger.error(
            f"❌ Companion eigenvalues deviate from analytic roots\n"
            f"   ├─ N={params.order}, k={k}\n"
            f"   └─ Relative mismatch: {mismatch:.3e}"
        )
        raise NumericalRobustnessError(
            f"Companion eigenvalues deviate from the roots of f_N by {mismatch:.3e} (N={params.order}, k={k})",
            {'order': params.order, 'k': k, 'mismatch': mismatch}
        )
    from_eigenvalues, from_roots = _classify(eigenvalues), _classify(roots)
    if from_eigenvalues != from_roots:
        raise NumericalRobustnessError(
            f"Companion eigenvalues classify as {from_eigenvalues}, roots of f_N as {from_roots} "
            f"(N={params.order}, k={k})",
            {'order': params.order, 'k': k, 'companion': from_eigenvalues, 'roots': from_roots}
        )
    return ModeODE(
        params=params,
        k=float(k),
        coefficients=monic,
        companion=companion,
        char_roots=roots,
        companion_eigenvalues=eigenvalues,
        companion_mismatch=mismatch,
    )


def classify_spectrum(ode: ModeODE) -> Dict[str, int]:
    """
    Count oscillatory pairs (purely imaginary), growing and decaying roots

    Counted on the companion eigenvalues; a root is purely imaginary when
    |Re| < 1e-8 (1 + |lambda|).
    """
    return _classify(ode.companion_eigenvalues)


def oscillatory_frequencies(ode: ModeODE) -> List[float]:
    """omega > 0 of each oscillatory pair"""
    return sorted(
        abs(root.imag) for root in ode.char_roots
        if abs(root.real) < 1e-8 * (1.0 + abs(root)) and root.imag > 0
    )


def eigen_initial_state(ode: ModeODE, root: complex) -> np.ndarray:
    """Real part of the companion eigenvector (1, lambda, ..., lambda^(2N-1))"""
    return np.real(np.array([root ** i for i in range(ode.size)], dtype=complex))


def _rk4_step(A: np.ndarray, y: np.ndarray, h: float) -> np.ndarray:
    k1 = A @ y
    k2 = A @ (y + 0.5 * h * k1)
    k3 = A @ (y + 0.5 * h * k2)
    k4 = A @ (y + h * k3)
    return y + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0


def integrate(ode: ModeODE, initial_state: Sequence[float], t_end: float, dt: float) -> Trajectory:
    """
    Classical RK4 on the companion system

    The step is shrunk to t_end / ceil(t_end/dt) so the grid ends at t_end.
    Growing roots make blow-up expected for generic data at N >= 2; it is
    flagged, not raised.

    Raises:
        StabilityError: dt >= 0.1 / max|lambda|
    """
    y = np.asarray(initial_state, dtype=float)
    if y.shape != (ode.size,):
        raise DomainError(
            f"Initial state must have {ode.size} entries, got {y.size}",
            {'expected': ode.size, 'got': int(y.size)}
        )
    if not np.all(np.isfinite(y)):
        raise DomainError("Initial state must be finite")
    if not (math.isfinite(t_end) and t_end > 0):
        raise DomainError(f"t_end must be positive, got {t_end!r}", {'t_end': t_end})
    if not (math.isfinite(dt) and dt > 0):
        raise DomainError(f"dt must be positive, got {dt!r}", {'dt': dt})
    limit = 0.1 / ode.max_root if ode.max_root > 0 else math.inf
    if dt >= limit:
        raise StabilityError(
            f"dt={dt!r} violates the stability guard dt < 0.1/max|lambda| = {limit!r}",
            {'dt': dt, 'limit': limit, 'max_root': ode.max_root}
        )

    n_steps = max(1, math.ceil(t_end / dt * (1.0 - 1e-12)))
    h = t_end / n_steps
    states = np.empty((n_steps + 1, ode.size))
    states[0] = y
    blew_up = False
    last = n_steps
    for step in range(1, n_steps + 1):
        y = _rk4_step(ode.companion, y, h)
        states[step] = y
        if not np.all(np.isfinite(y)) or np.max(np.abs(y)) > config.BLOWUP_THRESHOLD:
            blew_up = True
            last = step
            logger.info(f"💥 Blow-up at t={step * h:.6g} (N={ode.params.order}, k={ode.k})")
            break

    times = np.arange(last + 1) * h
    return Trajectory(times=times, states=states[:last + 1], dt=h, blew_up=blew_up)


def spectrum_report(ode: ModeODE) -> Dict[str, Any]:
    """JSON-ready {k, roots, classification}"""
    return {
        'k': ode.k,
        'order': ode.params.order,
        'a': ode.params.a,
        'roots': [[root.real, root.imag] for root in ode.char_roots],
        'classification': classify_spectrum(ode),
        'companion_mismatch': ode.companion_mismatch,
    }
