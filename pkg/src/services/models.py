#!/usr/bin/env python3
"""
Shared data models and error types for the numerical services
"""

import math
from enum import Enum
from typing import Dict, Optional, Any
from dataclasses import dataclass, asdict


class OperatorKind(str, Enum):
    """Which member of the operator family is meant"""
    FINITE_ORDER = "finite_order"
    INFINITE_ORDER = "infinite_order"


@dataclass(frozen=True)
class ModelParams:
    """Family selector: order N, length scale a, space-time dimension D"""
    order: int
    a: float = 1.0
    dims: int = 2

    def __post_init__(self):
        if isinstance(self.order, bool) or not isinstance(self.order, int):
            raise DomainError(f"Order must be an integer, got {self.order!r}", {'order': self.order})
        if self.order < 0:
            raise DomainError(f"Order must be non-negative, got {self.order}", {'order': self.order})
        if not (isinstance(self.a, (int, float)) and math.isfinite(self.a) and self.a > 0):
            raise DomainError(f"Length scale a must be positive and finite, got {self.a!r}", {'a': self.a})
        if isinstance(self.dims, bool) or not isinstance(self.dims, int) or self.dims < 2:
            raise DomainError(f"Space-time dimension must be an integer >= 2, got {self.dims!r}", {'dims': self.dims})

    @property
    def is_odd(self) -> bool:
        return self.order % 2 == 1

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization"""
        return asdict(self)


class HDKGError(Exception):
    """Base exception for toolkit errors"""
    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}


class ValidationError(HDKGError):
    """Inputs violate a precondition"""
    exit_code = 2


class DomainError(ValidationError):
    """Value outside the mathematical domain (negative N, a <= 0, ...)"""
    pass


class RangeError(ValidationError):
    """Order outside a supported cap"""
    pass


class ParityError(ValidationError):
    """Even order where an odd-order object is required"""
    pass


class CountError(ValidationError):
    """Wrong number of vectors for a symmetrized contraction"""
    pass


class CommensurabilityError(ValidationError):
    """Mode not representable exactly on the periodic grid"""
    pass


class StabilityError(ValidationError):
    """Time step too large for the explicit integrator"""
    pass


class ObstructionError(HDKGError):
    """Mathematical obstruction: the requested inverse does not exist or explodes"""
    exit_code = 3


class ShellCollisionError(ObstructionError):
    """A populated grid mode sits on the mass shell"""
    pass


class AmplificationError(ObstructionError):
    """Infinite-order factor exceeds the amplification cap on a populated mode"""
    pass


class PoleProximityError(ObstructionError):
    """Propagator evaluated on its real pole without a contour"""
    pass


class NumericalRobustnessError(HDKGError):
    """Internal consistency check failed; results must not be trusted"""
    exit_code = 1
