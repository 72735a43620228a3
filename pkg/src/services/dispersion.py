#!/usr/bin/env python3
"""
Dispersion polynomial family

f_N(q) = sum_n (-1)^n N!/(N-n)! q^(N-n), q = a^2 p^2, is the field-equation
symbol multiplied by (-1)^N a^2 N!. Its real zeros are the mass shells:
exactly one (positive) for odd N, none for even N.

Features:
- exact integer coefficients (N <= 20)
- Sturm-certified real root count
- safeguarded Newton polish with exact rational residuals
- companion-matrix eigenvalues for the complex roots
"""

import math
from fractions import Fraction
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Any, Union

import numpy as np
import sympy as sp

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

from .models import (
    ModelParams, DomainError, RangeError, ParityError, NumericalRobustnessError
)
from .cache_manager import ResultCache

logger = get_model_logger()

Number = Union[int, float, complex]

_Q = sp.Symbol('q')

roots_cache = ResultCache('root_reports', max_size=config.cache_size())


@dataclass(frozen=True)
class TruncExpPoly:
    """f_N with exact integer coefficients in ascending powers of q"""
    order: int
    coeffs: Tuple[int, ...]

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def max_abs_coeff(self) -> int:
        return max(abs(c) for c in self.coeffs)

    def derivative_coeffs(self) -> Tuple[int, ...]:
        return tuple(k * c for k, c in enumerate(self.coeffs))[1:]

    def to_sympy(self) -> sp.Poly:
        return sp.Poly(list(reversed(self.coeffs)), _Q, domain='ZZ')


@dataclass(frozen=True)
class RootReport:
    """Real/complex root analysis of f_N"""
    order: int
    real_roots: Tuple[float, ...]
    q_N: Optional[float]
    complex_roots: Tuple[complex, ...]
    sturm_count: int
    vieta_error: float = field(default=0.0, compare=False)

    def to_dict(self) -> Dict[str, Any]:
        """JSON-ready form; complex roots as [re, im] pairs"""
        return {
            'order': self.order,
            'real_roots': list(self.real_roots),
            'q_N': self.q_N,
            'complex_roots': [[z.real, z.imag] for z in self.complex_roots],
            'sturm_count': self.sturm_count,
        }


def check_order(N: int, low: int = 0) -> None:
    if isinstance(N, bool) or not isinstance(N, int):
        raise DomainError(f"Order must be an integer, got {N!r}", {'order': N})
    if N < 0:
        raise DomainError(f"Order must be non-negative, got {N}", {'order': N})
    if N < low or N > config.POLY_MAX_ORDER:
        raise RangeError(
            f"Order {N} outside supported range [{low}, {config.POLY_MAX_ORDER}]",
            {'order': N, 'min': low, 'max': config.POLY_MAX_ORDER}
        )


def build_poly(N: int) -> TruncExpPoly:
    """
    Build f_N exactly

    Coefficient of q^k is (-1)^(N-k) N!/k!; the leading coefficient is 1.

    Raises:
        DomainError: negative N
        RangeError: N > 20 (coefficients leave the signed 64-bit range)
    """
    check_order(N)
    n_fact = math.factorial(N)
    coeffs = tuple(
        (-1) ** (N - k) * (n_fact // math.factorial(k))
        for k in range(N + 1)
    )
    return TruncExpPoly(order=N, coeffs=coeffs)


def _horner(coeffs: Sequence[Number], q: Number) -> Number:
    acc: Number = 0
    for c in reversed(coeffs):
        acc = acc * q + c
    return acc


def eval_poly(p: TruncExpPoly, q: Number) -> Number:
    """Horner evaluation of f_N at a real (or complex) point"""
    value = _horner(p.coeffs, q)
    if isinstance(value, complex):
        return value
    return float(value)


def _eval_exact(coeffs: Sequence[int], x: float) -> Fraction:
    # exact value at the binary float x
    return _horner(coeffs, Fraction(x))


def exp_partial_sum(N: int) -> Tuple[Fraction, ...]:
    """Coefficients of P_N(z) = sum z^n/n!, ascending"""
    check_order(N)
    return tuple(Fraction(1, math.factorial(n)) for n in range(N + 1))


def check_partial_sum_identity(N: int) -> bool:
    """True iff f_N(q) == (-1)^N N! P_N(-q) coefficient-wise"""
    poly = build_poly(N)
    scale = (-1) ** N * math.factorial(N)
    expected = tuple(scale * c * (-1) ** k for k, c in enumerate(exp_partial_sum(N)))
    return all(Fraction(a) == b for a, b in zip(poly.coeffs, expected))


def derivative_constant(N: int) -> int:
    """
    The constant c_N in f_N' = c_N f_(N-1)

    Both sides have integer coefficients and f_(N-1) is monic, so c_N is read
    off the leading coefficient of f_N'. It comes out as N.
    """
    check_order(N, low=1)
    return build_poly(N).derivative_coeffs()[-1]


def derivative_check(N: int) -> bool:
    """True iff f_N' == c_N * f_(N-1) exactly in integers"""
    check_order(N, low=1)
    c_n = derivative_constant(N)
    lhs = build_poly(N).derivative_coeffs()
    rhs = tuple(c_n * c for c in build_poly(N - 1).coeffs)
    return lhs == rhs


def _sign_variations(signs: List[int]) -> int:
    nonzero = [s for s in signs if s != 0]
    return sum(1 for s, t in zip(nonzero, nonzero[1:]) if s != t)


def sturm_count(p: TruncExpPoly) -> int:
    """Number of distinct real roots on (-inf, +inf) by Sturm's theorem"""
    if p.degree == 0:
        return 0
    sequence = p.to_sympy().sturm()
    at_minus_inf = []
    at_plus_inf = []
    for g in sequence:
        if g.is_zero:
            continue
        lead = 1 if g.LC() > 0 else -1
        at_plus_inf.append(lead)
        at_minus_inf.append(lead * (-1) ** g.degree())
    return _sign_variations(at_minus_inf) - _sign_variations(at_plus_inf)


def companion_roots(p: TruncExpPoly) -> np.ndarray:
    """
    All roots of f_N as eigenvalues of the companion matrix

    The variable is rescaled q = N z first so the companion entries stay
    moderate; LAPACK balances the matrix before the Hessenberg QR.
    """
    n = p.degree
    if n == 0:
        return np.zeros(0, dtype=complex)
    s = float(max(1, n))
    monic = [float(c) * s ** (k - n) for k, c in enumerate(p.coeffs)]
    companion = np.zeros((n, n))
    if n > 1:
        companion[1:, :-1] = np.eye(n - 1)
    companion[:, -1] = -np.asarray(monic[:n])
    return s * np.linalg.eigvals(companion).astype(complex)


def _polish_complex(p: TruncExpPoly, z: complex, steps: int = 3) -> complex:
    deriv = p.derivative_coeffs()
    best = z
    best_res = abs(_horner(p.coeffs, z))
    for _ in range(steps):
        d = _horner(deriv, best)
        if d == 0:
            break
        candidate = best - _horner(p.coeffs, best) / d
        res = abs(_horner(p.coeffs, candidate))
        if res >= best_res:
            break
        best, best_res = candidate, res
    return best


def _bracket_positive_root(p: TruncExpPoly) -> Tuple[float, float]:
    lo = 0.0
    hi = float(p.order + 1)
    if _eval_exact(p.coeffs, lo) >= 0:
        raise NumericalRobustnessError(
            f"f_{p.order}(0) is not negative for odd order",
            {'order': p.order}
        )
    widenings = 0
    while _eval_exact(p.coeffs, hi) <= 0:
        hi *= 2.0
        widenings += 1
        if widenings > 60:
            raise NumericalRobustnessError(
                f"Could not bracket the real root of f_{p.order}",
                {'order': p.order, 'hi': hi}
            )
    if widenings:
        logger.debug(f"Bracket for f_{p.order} widened {widenings}x to (0, {hi}]")
    return lo, hi


def _newton_polish(p: TruncExpPoly, lo: float, hi: float) -> float:
    """
    Safeguarded Newton inside a sign-change bracket (f(lo) < 0 < f(hi))

    Residuals are evaluated exactly in rationals, so the polish converges to
    the float nearest the root instead of stalling in cancellation noise.
    """
    deriv = p.derivative_coeffs()
    x = 0.5 * (lo + hi)
    for iteration in range(config.NEWTON_MAX_ITER):
        fx = _eval_exact(p.coeffs, x)
        if fx == 0:
            return x
        if fx < 0:
            lo = x
        else:
            hi = x
        dfx = float(_horner(deriv, x))
        step = float(fx) / dfx if dfx != 0 else math.inf
        candidate = x - step
        if not (lo < candidate < hi):
            candidate = 0.5 * (lo + hi)
            step = x - candidate
        if abs(step) <= config.NEWTON_RTOL * abs(x) or candidate == x:
            logger.debug(f"Newton converged for f_{p.order} after {iteration + 1} iterations")
            return candidate
        x = candidate

    logger.warning(
        f"Newton did not converge for f_{p.order} in {config.NEWTON_MAX_ITER} "
        f"iterations, finishing by bisection"
    )
    while hi - lo > config.NEWTON_RTOL * abs(hi):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        if _eval_exact(p.coeffs, mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _is_real(z: complex) -> bool:
    return abs(z.imag) < config.REAL_ROOT_TOL * (1.0 + abs(z.real))


def real_roots(p: TruncExpPoly) -> RootReport:
    """
    Full root analysis of f_N

    Real root count is certified by Sturm's theorem; for odd N the unique
    root is bracketed on (0, N+1] (widened if needed) and Newton-polished.
    Complex roots come from the companion matrix.

    Raises:
        NumericalRobustnessError: Sturm count disagrees with the companion
            matrix's real-root count
    """
    count = sturm_count(p)
    eig = companion_roots(p)
    eig_real = [z for z in eig if _is_real(z)]

    if len(eig_real) != count:
        logger.error(
            f"❌ Root count mismatch for f_{p.order}\n"
            f"   ├─ Sturm: {count}\n"
            f"   └─ Companion: {len(eig_real)}"
        )
        raise NumericalRobustnessError(
            f"Sturm count {count} disagrees with companion real-root count {len(eig_real)}",
            {'order': p.order, 'sturm_count': count, 'companion_real': len(eig_real)}
        )

    reals: List[float] = []
    if count:
        if count != 1 or p.order % 2 == 0:
            raise NumericalRobustnessError(
                f"Unexpected real root structure for f_{p.order}",
                {'order': p.order, 'sturm_count': count}
            )
        lo, hi = _bracket_positive_root(p)
        reals.append(_newton_polish(p, lo, hi))

    complex_roots: List[complex] = []
    for z in eig:
        if _is_real(z):
            complex_roots.append(complex(reals[0], 0.0))
        else:
            complex_roots.append(_polish_complex(p, complex(z)))
    complex_roots.sort(key=lambda z: (z.real, z.imag))

    product = complex(np.prod(np.asarray(complex_roots))) if complex_roots else 1.0
    expected = (-1) ** p.order * p.coeffs[0] / p.coeffs[-1]
    vieta_error = abs(product - expected) / abs(expected)
    if vieta_error > 1e-10:
        logger.warning(f"Vieta product check for f_{p.order}: relative error {vieta_error:.2e}")

    return RootReport(
        order=p.order,
        real_roots=tuple(reals),
        q_N=reals[0] if reals else None,
        complex_roots=tuple(complex_roots),
        sturm_count=count,
        vieta_error=vieta_error,
    )


def root_report(N: int) -> RootReport:
    """Cached real_roots(build_poly(N))"""
    check_order(N)
    return roots_cache.get_or_compute(N, lambda: real_roots(build_poly(N)))


def shell_root(N: int) -> float:
    """q_N for odd N"""
    check_order(N)
    if N % 2 == 0:
        raise ParityError(
            f"f_{N} has no real root for even N (no mass shell exists)",
            {'order': N}
        )
    return root_report(N).q_N


def mass_scale(params: ModelParams) -> float:
    """
    m = sqrt(q_N)/a

    Raises:
        ParityError: even N
        RangeError: N > 20
    """
    return math.sqrt(shell_root(params.order)) / params.a


def shell_jacobian(N: int) -> float:
    """
    Weight w with N! delta(f_N(q)) = w delta(q - q_N)

    w = N!/|f_N'(q_N)| = (N-1)!/|f_(N-1)(q_N)|.
    """
    q_n = shell_root(N)
    slope = float(_horner(build_poly(N).derivative_coeffs(), q_n))
    return math.factorial(N) / abs(slope)


def odd_root_trend(max_order: int = 19) -> Dict[str, Any]:
    """
    q_N over odd N <= max_order with a strict-monotonicity flag

    Monotonicity is an empirical expectation; a failure is logged, not raised.
    """
    check_order(max_order, low=1)
    orders = list(range(1, max_order + 1, 2))
    values = [shell_root(n) for n in orders]
    increasing = all(b > a for a, b in zip(values, values[1:]))
    if not increasing:
        logger.warning(f"⚠️ q_N is not strictly increasing over odd N <= {max_order}: {values}")
    return {'orders': orders, 'q_N': values, 'strictly_increasing': increasing}
