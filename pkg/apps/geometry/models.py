"""
Fallcat - Geometry Models
A natural mechanical system: kinetic metric, potential, group action.
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Tuple

import numpy as np

from apps.core.exceptions import StructuralError
from apps.lie.models import LieStructure
from fallcat import settings


@dataclass(frozen=True, eq=False)
class SystemModel:
    """
    L(x, v) = 1/2 g_ij(x) v^i v^j - U(x) with a right action R_g of a Lie group.

    metric:     x -> (n, n) symmetric matrix
    potential:  x -> float
    generators: x -> (n, k) matrix, column alpha is X_alpha(x)
    action:     (GroupElement, x) -> x'
    sampler:    rng -> admissible configuration (audits, verify)
    periods:    per-coordinate period for angular coordinates (None = not periodic)
    """
    name: str
    n: int
    lie: LieStructure
    metric: Callable[[np.ndarray], np.ndarray]
    potential: Callable[[np.ndarray], float]
    generators: Callable[[np.ndarray], np.ndarray]
    action: Callable[[Any, np.ndarray], np.ndarray]
    coordinates: Tuple[str, ...] = ()
    sampler: Optional[Callable[[np.random.Generator], np.ndarray]] = None
    periods: Tuple[Optional[float], ...] = ()
    spec: Any = field(default=None, repr=False)
    spd_tolerance: float = settings.SPD_TOLERANCE
    singular_tolerance: float = settings.SINGULAR_TOLERANCE

    def __post_init__(self):
        if self.n < 1:
            raise StructuralError(f"Configuration dimension must be positive, got {self.n}")
        if not self.coordinates:
            object.__setattr__(self, 'coordinates', tuple(f'x{i}' for i in range(self.n)))
        if len(self.coordinates) != self.n:
            raise StructuralError(
                f"{self.name}: {len(self.coordinates)} coordinate names for n={self.n}")
        if not self.periods:
            object.__setattr__(self, 'periods', (None,) * self.n)

    @property
    def k(self):
        return self.lie.dim

    def sample_point(self, rng):
        if self.sampler is not None:
            return np.asarray(self.sampler(rng), dtype=float)
        return rng.uniform(-1.0, 1.0, self.n)

    def wrap_difference(self, dx):
        """Coordinate difference with periodic coordinates reduced to [-P/2, P/2)."""
        dx = np.array(dx, dtype=float)
        for i, period in enumerate(self.periods):
            if period:
                dx[i] = (dx[i] + 0.5 * period) % period - 0.5 * period
        return dx


@dataclass(frozen=True, eq=False)
class TangentSample:
    """(x, v) in canonical coordinates on TM."""
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).reshape(-1)
        v = np.asarray(self.v, dtype=float).reshape(-1)
        if x.shape != v.shape:
            raise StructuralError(f"x and v differ in length: {x.size} vs {v.size}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise StructuralError("Tangent sample has non-finite components")
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'v', v)
