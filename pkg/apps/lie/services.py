"""
Fallcat - Lie Algebra and Group Operations
Brackets, Ad/Ad*, exp/log and the h-correction of Ad* to Ad type.
"""
import logging

import numpy as np
from scipy.linalg import block_diag, polar
from scipy.spatial.transform import Rotation

from apps.core.exceptions import (
    AmbiguousBranchError,
    DegenerateFormError,
    StructuralError,
    VerticalDegeneracyError,
)
from .models import (
    AlgebraVector,
    BilinearForm,
    DualVector,
    GroupElement,
    GroupKind,
    LieStructure,
    on_group_residual,
)

logger = logging.getLogger(__name__)

# Series expansions below this angle
SMALL_ANGLE = 1e-4
# log on SO3: switch to the symmetric-part axis extraction within this distance of pi
NEAR_PI = 1e-3
# ... and refuse within this distance
PI_BRANCH_TOLERANCE = 1e-9
CANONICAL_CONDITION_LIMIT = 1e12


# ===========================================
# so(3) helpers
# ===========================================

def hat(w):
    """Component vector -> antisymmetric matrix w^i E_i."""
    wx, wy, wz = np.asarray(w, dtype=float)
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def vee(S):
    """Antisymmetric matrix -> component vector."""
    return np.array([S[2, 1], S[0, 2], S[1, 0]])


def _reproject(matrix):
    """Closest rotation matrix (polar decomposition)."""
    u, _ = polar(matrix)
    return u


def rotation_exp(w):
    theta = float(np.linalg.norm(w))
    K = hat(w)
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta ** 2
    return np.eye(3) + a * K + b * (K @ K)


def rotation_log(R):
    axis_part = 0.5 * vee(R - R.T)          # sin(theta) n
    cos_theta = 0.5 * (np.trace(R) - 1.0)
    sin_theta = float(np.linalg.norm(axis_part))
    theta = float(np.arctan2(sin_theta, cos_theta))

    if np.pi - theta < PI_BRANCH_TOLERANCE:
        raise AmbiguousBranchError(
            "Rotation angle is pi: log has no principal branch", angle=theta)

    if theta < SMALL_ANGLE:
        return axis_part * (1.0 + theta ** 2 / 6.0)

    if np.pi - theta < NEAR_PI:
        # n n^T = (sym(R) - cos(theta) 1) / (1 - cos(theta)); read n from the largest diagonal
        nnT = (0.5 * (R + R.T) - cos_theta * np.eye(3)) / (1.0 - cos_theta)
        i = int(np.argmax(np.diag(nnT)))
        n = nnT[:, i] / np.sqrt(nnT[i, i])
        if n @ axis_part < 0.0:
            n = -n
        return theta * n / np.linalg.norm(n)

    return axis_part * (theta / sin_theta)


# ===========================================
# Algebra
# ===========================================

def bracket(a: AlgebraVector, b: AlgebraVector) -> AlgebraVector:
    """[a, b]^g = c^g_{ab} a^a b^b"""
    a.lie.require(b.lie)
    c = a.lie.structure_constants
    return AlgebraVector(a.lie, np.einsum('gab,a,b->g', c, a.components, b.components))


def hat_map(h: BilinearForm, a: AlgebraVector) -> DualVector:
    """(h^ a)_b = h_{ab} a^a"""
    h.lie.require(a.lie)
    return DualVector(a.lie, h.matrix.T @ a.components)


def hat_inverse(h: BilinearForm, p: DualVector) -> AlgebraVector:
    """(h^^-1 p)^a = h^{ab} p_b"""
    h.lie.require(p.lie)
    try:
        return AlgebraVector(p.lie, np.linalg.solve(h.matrix.T, p.components))
    except np.linalg.LinAlgError as exc:
        raise DegenerateFormError("Bilinear form is singular", matrix=h.matrix) from exc


def default_form(lie: LieStructure) -> BilinearForm:
    """Identity: any h on an abelian factor, Killing-proportional on so(3)."""
    return BilinearForm.identity(lie)


def canonicalize(C, A_bar: AlgebraVector) -> AlgebraVector:
    """
    A = C^-1 A_bar.

    Raises:
        VerticalDegeneracyError: C is singular (some generator is horizontal)
    """
    C = np.asarray(C, dtype=float)
    k = A_bar.lie.dim
    if C.shape != (k, k):
        raise StructuralError(f"C must be {k}x{k}, got {C.shape}")
    if not np.all(np.isfinite(C)) or np.linalg.cond(C) > CANONICAL_CONDITION_LIMIT:
        raise VerticalDegeneracyError("C(x) is singular: the action is not free here", C=C)
    return AlgebraVector(A_bar.lie, np.linalg.solve(C, A_bar.components))


# ===========================================
# Group
# ===========================================

def identity(lie: LieStructure) -> GroupElement:
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(identity(f) for f in lie.factors))
    if lie.kind is GroupKind.ABELIAN:
        return GroupElement(lie, np.zeros(lie.dim))
    return GroupElement(lie, np.eye(3))


def compose(g1: GroupElement, g2: GroupElement) -> GroupElement:
    """g1 g2"""
    g1.lie.require(g2.lie)
    lie = g1.lie
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(compose(a, b) for a, b in zip(g1.data, g2.data)))
    if lie.kind is GroupKind.ABELIAN:
        return GroupElement(lie, g1.data + g2.data)
    product = g1.data @ g2.data
    if on_group_residual(product) > 1e-13:
        product = _reproject(product)
    return GroupElement(lie, product)


def inverse(g: GroupElement) -> GroupElement:
    lie = g.lie
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(inverse(part) for part in g.data))
    if lie.kind is GroupKind.ABELIAN:
        return GroupElement(lie, -g.data)
    return GroupElement(lie, g.data.T)


def adjoint_matrix(g: GroupElement) -> np.ndarray:
    """Matrix of Ad_g in the basis E_alpha."""
    lie = g.lie
    if lie.kind is GroupKind.PRODUCT:
        return block_diag(*[adjoint_matrix(part) for part in g.data])
    if lie.kind is GroupKind.ABELIAN:
        return np.eye(lie.dim)
    return np.array(g.data)


def coadjoint_matrix(g: GroupElement) -> np.ndarray:
    """<Ad*_g p, a> = <p, Ad_g a>  =>  Ad*_g = (Ad_g)^T."""
    return adjoint_matrix(g).T


def adjoint(g: GroupElement, a: AlgebraVector) -> AlgebraVector:
    g.lie.require(a.lie)
    return AlgebraVector(a.lie, adjoint_matrix(g) @ a.components)


def coadjoint(g: GroupElement, p: DualVector) -> DualVector:
    g.lie.require(p.lie)
    return DualVector(p.lie, coadjoint_matrix(g) @ p.components)


def exp(a: AlgebraVector) -> GroupElement:
    lie = a.lie
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(
            exp(AlgebraVector(factor, a.components[s])) for s, factor in lie.blocks()))
    if lie.kind is GroupKind.ABELIAN:
        return GroupElement(lie, a.components)
    return GroupElement(lie, rotation_exp(a.components))


def log(g: GroupElement) -> AlgebraVector:
    """
    Principal-branch logarithm.

    Raises:
        AmbiguousBranchError: SO3 rotation by pi
    """
    lie = g.lie
    if lie.kind is GroupKind.PRODUCT:
        return AlgebraVector(lie, np.concatenate([log(part).components for part in g.data]))
    if lie.kind is GroupKind.ABELIAN:
        return AlgebraVector(lie, g.data)
    return AlgebraVector(lie, rotation_log(g.data))


def random_element(lie: LieStructure, rng, scale=1.0) -> GroupElement:
    """Uniform rotation for SO3, N(0, scale^2) offsets for abelian factors."""
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(random_element(f, rng, scale) for f in lie.factors))
    if lie.kind is GroupKind.ABELIAN:
        return GroupElement(lie, scale * rng.standard_normal(lie.dim))
    return GroupElement(lie, Rotation.random(random_state=rng).as_matrix())


def random_algebra_vector(lie: LieStructure, rng, scale=1.0) -> AlgebraVector:
    return AlgebraVector(lie, scale * rng.standard_normal(lie.dim))


# ===========================================
# Diagnostics
# ===========================================

def check_h_equivariance(h: BilinearForm, g: GroupElement, a: AlgebraVector) -> float:
    """|Ad*_g(h^ a) - h^(Ad_{g^-1} a)|; zero when h is Ad-invariant."""
    lhs = coadjoint(g, hat_map(h, a))
    rhs = hat_map(h, adjoint(inverse(g), a))
    return (lhs - rhs).norm()


def ad_invariance_residual(h: BilinearForm, rng, samples=8) -> float:
    """max |Ad_g^T h Ad_g - h| over sampled g."""
    worst = 0.0
    for _ in range(samples):
        ad = adjoint_matrix(random_element(h.lie, rng))
        worst = max(worst, float(np.max(np.abs(ad.T @ h.matrix @ ad - h.matrix))))
    return worst


def is_ad_invariant(h: BilinearForm, rng, samples=8, tolerance=1e-10) -> bool:
    return ad_invariance_residual(h, rng, samples) <= tolerance * max(1.0, float(np.max(np.abs(h.matrix))))


def group_distance(g1: GroupElement, g2: GroupElement) -> float:
    """Max-norm distance of the concrete representations."""
    g1.lie.require(g2.lie)
    if g1.lie.kind is GroupKind.PRODUCT:
        return max(group_distance(a, b) for a, b in zip(g1.data, g2.data))
    return float(np.max(np.abs(np.asarray(g1.data) - np.asarray(g2.data))))
