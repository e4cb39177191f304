"""
Fallcat - Connection Models
"""
from dataclasses import dataclass

import numpy as np

from apps.core.exceptions import StructuralError
from apps.lie.models import LieStructure


@dataclass(frozen=True, eq=False)
class ConnectionEval:
    """A(x) = A^alpha_i dx^i (x) E_alpha as a (k, n) matrix."""
    lie: LieStructure
    x: np.ndarray
    components: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        A = np.array(self.components, dtype=float)
        if A.shape != (self.lie.dim, x.size):
            raise StructuralError(
                f"Connection components must be {self.lie.dim}x{x.size}, got {A.shape}")
        x.setflags(write=False)
        A.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'components', A)

    @property
    def rank(self):
        return int(np.linalg.matrix_rank(self.components))
