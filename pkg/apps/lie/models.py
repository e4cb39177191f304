"""
Fallcat - Lie Structures
Lie algebras/groups used by the builtin systems: abelian R^k (also the
unwrapped SO(2)), SO(3) and blockwise products of these.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from apps.core.exceptions import DegenerateFormError, KindMismatchError, StructuralError

ON_GROUP_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-12


class GroupKind(str, Enum):
    ABELIAN = 'abelian'
    SO3 = 'so3'
    PRODUCT = 'product'


def levi_civita():
    """eps_ijk as a 3x3x3 array."""
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def _frozen(array):
    array = np.array(array, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LieStructure:
    """
    Finite-dimensional Lie algebra with basis E_alpha.

    structure_constants[g, a, b] = c^g_{ab}, i.e. [E_a, E_b] = c^g_{ab} E_g.
    """
    kind: GroupKind
    dim: int
    structure_constants: np.ndarray
    factors: Tuple['LieStructure', ...] = ()

    @classmethod
    def abelian(cls, k):
        if k < 1:
            raise StructuralError(f"Abelian dimension must be positive, got {k}", dim=k)
        return cls(GroupKind.ABELIAN, k, _frozen(np.zeros((k, k, k))))

    @classmethod
    def so3(cls):
        # (E_i)_j^k = -eps_ijk  =>  c^k_ij = eps_ijk
        c = np.einsum('ijk->kij', levi_civita())
        return cls(GroupKind.SO3, 3, _frozen(c))

    @classmethod
    def product(cls, *factors):
        if not factors:
            raise StructuralError("Product of zero factors")
        dim = sum(f.dim for f in factors)
        c = np.zeros((dim, dim, dim))
        offset = 0
        for f in factors:
            s = slice(offset, offset + f.dim)
            c[s, s, s] = f.structure_constants
            offset += f.dim
        return cls(GroupKind.PRODUCT, dim, _frozen(c), tuple(factors))

    @property
    def label(self):
        if self.kind is GroupKind.ABELIAN:
            return f'abelian({self.dim})'
        if self.kind is GroupKind.SO3:
            return 'so3'
        return 'product(' + ', '.join(f.label for f in self.factors) + ')'

    def blocks(self):
        """(slice, factor) pairs; a non-product structure is its own single block."""
        if self.kind is not GroupKind.PRODUCT:
            return [(slice(0, self.dim), self)]
        out, offset = [], 0
        for f in self.factors:
            out.append((slice(offset, offset + f.dim), f))
            offset += f.dim
        return out

    def same_as(self, other):
        if self is other:
            return True
        if self.kind is not other.kind or self.dim != other.dim:
            return False
        if self.kind is GroupKind.PRODUCT:
            return len(self.factors) == len(other.factors) and all(
                a.same_as(b) for a, b in zip(self.factors, other.factors))
        return True

    def require(self, other):
        if not self.same_as(other):
            raise KindMismatchError(
                f"Lie structure mismatch: {self.label} vs {other.label}",
                expected=self.label, got=other.label,
            )

    def __repr__(self):
        return f'LieStructure({self.label})'


def _components(lie, values, what):
    array = np.asarray(values, dtype=float).reshape(-1)
    if array.size != lie.dim:
        raise StructuralError(
            f"{what} needs {lie.dim} components, got {array.size}",
            expected=lie.dim, got=int(array.size),
        )
    if not np.all(np.isfinite(array)):
        raise StructuralError(f"{what} has non-finite components", components=array)
    return _frozen(array)


@dataclass(frozen=True, eq=False)
class AlgebraVector:
    """a = a^alpha E_alpha"""
    lie: LieStructure
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'components', _components(self.lie, self.components, 'AlgebraVector'))

    def __add__(self, other):
        self.lie.require(other.lie)
        return AlgebraVector(self.lie, self.components + other.components)

    def __sub__(self, other):
        self.lie.require(other.lie)
        return AlgebraVector(self.lie, self.components - other.components)

    def __neg__(self):
        return AlgebraVector(self.lie, -self.components)

    def __mul__(self, scalar):
        return AlgebraVector(self.lie, float(scalar) * self.components)

    __rmul__ = __mul__

    def norm(self):
        return float(np.linalg.norm(self.components))


@dataclass(frozen=True, eq=False)
class DualVector:
    """p = p_alpha E^alpha"""
    lie: LieStructure
    components: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'components', _components(self.lie, self.components, 'DualVector'))

    def pair(self, a: AlgebraVector) -> float:
        """Canonical pairing <p, a>_0."""
        self.lie.require(a.lie)
        return float(self.components @ a.components)

    def __sub__(self, other):
        self.lie.require(other.lie)
        return DualVector(self.lie, self.components - other.components)

    def norm(self):
        return float(np.linalg.norm(self.components))


GroupData = Union[np.ndarray, Tuple['GroupElement', ...]]


@dataclass(frozen=True, eq=False)
class GroupElement:
    """
    Concrete group element per kind:
    abelian -> offset vector, so3 -> rotation matrix, product -> tuple of elements.
    """
    lie: LieStructure
    data: GroupData = field(repr=False)

    def __post_init__(self):
        kind = self.lie.kind
        if kind is GroupKind.PRODUCT:
            parts = tuple(self.data)
            if len(parts) != len(self.lie.factors):
                raise StructuralError(
                    f"Product element needs {len(self.lie.factors)} parts, got {len(parts)}")
            for part, factor in zip(parts, self.lie.factors):
                factor.require(part.lie)
            object.__setattr__(self, 'data', parts)
        elif kind is GroupKind.ABELIAN:
            object.__setattr__(self, 'data', _components(self.lie, self.data, 'Abelian element'))
        else:
            matrix = np.asarray(self.data, dtype=float)
            if matrix.shape != (3, 3):
                raise StructuralError(f"SO3 element must be 3x3, got {matrix.shape}")
            residual = on_group_residual(matrix)
            if residual > ON_GROUP_TOLERANCE:
                raise StructuralError(
                    f"Matrix is not a rotation (residual {residual:.3e})", residual=residual)
            object.__setattr__(self, 'data', _frozen(matrix))

    @property
    def matrix(self):
        if self.lie.kind is not GroupKind.SO3:
            raise KindMismatchError(f"{self.lie.label} element has no rotation matrix")
        return self.data

    def as_list(self):
        """Nested plain-list form for reports."""
        if self.lie.kind is GroupKind.PRODUCT:
            return [part.as_list() for part in self.data]
        return self.data.tolist()


def on_group_residual(matrix):
    """max(|R^T R - 1|, |det R - 1|)"""
    matrix = np.asarray(matrix, dtype=float)
    return float(max(np.max(np.abs(matrix.T @ matrix - np.eye(3))),
                     abs(np.linalg.det(matrix) - 1.0)))


@dataclass(frozen=True, eq=False)
class BilinearForm:
    """Symmetric non-degenerate bilinear form h on the Lie algebra."""
    lie: LieStructure
    matrix: np.ndarray

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=float)
        k = self.lie.dim
        if h.shape != (k, k):
            raise StructuralError(f"Bilinear form must be {k}x{k}, got {h.shape}")
        scale = max(1.0, float(np.max(np.abs(h))))
        if np.max(np.abs(h - h.T)) > 1e-12 * scale:
            raise DegenerateFormError("Bilinear form is not symmetric", matrix=h)
        if abs(np.linalg.det(h)) <= DEGENERACY_TOLERANCE:
            raise DegenerateFormError("Bilinear form is degenerate", matrix=h)
        object.__setattr__(self, 'matrix', _frozen(h))

    @classmethod
    def identity(cls, lie):
        return cls(lie, np.eye(lie.dim))

    @classmethod
    def blockwise(cls, lie, blocks):
        """One block per factor of a product structure."""
        return cls(lie, block_diag(*[np.atleast_2d(b) for b in blocks]))
