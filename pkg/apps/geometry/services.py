"""
Fallcat - Geometry Services
Metric evaluation, flat operator, Gram matrix, momentum map and
finite-difference lift derivatives.
"""
import logging

import numpy as np

from apps.core.exceptions import InvalidSpecError, SingularActionError, StructuralError
from apps.core.finite_differences import directional_derivative, fd_step, jacobian
from apps.lie.models import DualVector, GroupElement
from apps.lie.services import coadjoint

from .models import SystemModel, TangentSample

logger = logging.getLogger(__name__)

SYMMETRY_TOLERANCE = 1e-12


# ===========================================
# Metric
# ===========================================

def metric_tensor(m: SystemModel, x, check=True) -> np.ndarray:
    """
    g(x) as an (n, n) array.

    With check=True the metric must be positive definite: smallest
    eigenvalue above spd_tolerance times the largest.
    """
    x = np.asarray(x, dtype=float)
    g = np.asarray(m.metric(x), dtype=float)
    if g.shape != (m.n, m.n):
        raise StructuralError(f"{m.name}: metric must be {m.n}x{m.n}, got {g.shape}")
    if not np.all(np.isfinite(g)):
        raise InvalidSpecError(f"{m.name}: metric is not finite", x=x)
    scale = max(1.0, float(np.max(np.abs(g))))
    if np.max(np.abs(g - g.T)) > SYMMETRY_TOLERANCE * scale:
        raise InvalidSpecError(f"{m.name}: metric is not symmetric", x=x, metric=g)
    g = 0.5 * (g + g.T)
    if check:
        eigenvalues = np.linalg.eigvalsh(g)
        if eigenvalues[0] <= m.spd_tolerance * max(eigenvalues[-1], 0.0) or eigenvalues[-1] <= 0.0:
            raise InvalidSpecError(
                f"{m.name}: metric is not positive definite",
                x=x, eigenvalues=eigenvalues,
            )
    return g


def generator_matrix(m: SystemModel, x) -> np.ndarray:
    """X(x) with column alpha the fundamental field X_alpha."""
    X = np.asarray(m.generators(np.asarray(x, dtype=float)), dtype=float).reshape(m.n, -1)
    if X.shape != (m.n, m.k):
        raise StructuralError(f"{m.name}: generators must be {m.n}x{m.k}, got {X.shape}")
    return X


def generator_field(m: SystemModel, alpha):
    """x -> X_alpha(x)"""
    if not 0 <= alpha < m.k:
        raise StructuralError(f"Generator index {alpha} out of range for k={m.k}")
    return lambda x: generator_matrix(m, x)[:, alpha]


def lagrangian(m: SystemModel, s: TangentSample) -> float:
    g = metric_tensor(m, s.x, check=False)
    return float(0.5 * s.v @ g @ s.v - m.potential(s.x))


def flat(m: SystemModel, x, V) -> np.ndarray:
    """(flat_g V)_i = g_ij V^j"""
    return metric_tensor(m, x, check=False) @ np.asarray(V, dtype=float)


def gram_from(g, X, tolerance=None, name='system'):
    """
    g_ab = X_a . g . X_b, checked for singularity when a tolerance is given.

    Raises:
        SingularActionError: smallest eigenvalue <= tolerance * largest
    """
    G = X.T @ g @ X
    G = 0.5 * (G + G.T)
    if tolerance is not None:
        eigenvalues = np.linalg.eigvalsh(G)
        if eigenvalues[-1] <= 0.0 or eigenvalues[0] <= tolerance * eigenvalues[-1]:
            raise SingularActionError(
                f"{name}: Gram matrix of the generators is singular",
                gram=G, eigenvalues=eigenvalues,
            )
    return G


def gram(m: SystemModel, x, check=True) -> np.ndarray:
    g = metric_tensor(m, x, check=False)
    X = generator_matrix(m, x)
    return gram_from(g, X, m.singular_tolerance if check else None, m.name)


def momentum(m: SystemModel, s: TangentSample) -> DualVector:
    """P_a(v) = (flat_g X_a)_i v^i"""
    g = metric_tensor(m, s.x, check=False)
    X = generator_matrix(m, s.x)
    return DualVector(m.lie, X.T @ g @ s.v)


# ===========================================
# Lift derivatives
# ===========================================

def vertical_lift_derivative(m: SystemModel, s: TangentSample, field) -> float:
    """V^i dL/dv^i = d/de L(x, v + e V(x))"""
    V = np.asarray(field(s.x), dtype=float)
    step = fd_step(s.v)
    return float(directional_derivative(
        lambda v: lagrangian(m, TangentSample(s.x, v)), s.v, V, step=step))


def complete_lift_derivative(m: SystemModel, s: TangentSample, field) -> float:
    """
    V^i dL/dx^i + V^i_,j v^j dL/dv^i, evaluated as the derivative of L along
    the curve e -> (x + e V, v + e DV v).
    """
    V = np.asarray(field(s.x), dtype=float)
    DV = jacobian(field, s.x)
    direction = np.concatenate([V, DV @ s.v])
    if not np.any(direction):
        return 0.0
    n = m.n

    def along(z):
        return lagrangian(m, TangentSample(z[:n], z[n:]))

    z = np.concatenate([s.x, s.v])
    return float(directional_derivative(along, z, direction, step=fd_step(s.x, s.v)))


def killing_check(m: SystemModel, x, alpha) -> float:
    """
    max |(L_X g)_ij| for X = X_alpha, with
        (L_X g)_ij = X^k d_k g_ij + g_kj d_i X^k + g_ik d_j X^k
    """
    x = np.asarray(x, dtype=float)
    field = generator_field(m, alpha)
    X = field(x)
    g = metric_tensor(m, x, check=False)
    dg = directional_derivative(lambda y: metric_tensor(m, y, check=False), x, X)
    J = jacobian(field, x)
    lie_derivative = dg + J.T @ g + g @ J
    return float(np.max(np.abs(lie_derivative)))


# ===========================================
# Tangent maps of the action
# ===========================================

def tangent_action(m: SystemModel, g: GroupElement, x, v) -> np.ndarray:
    """TR_g v at x, by central differences of the action map."""
    return directional_derivative(lambda y: m.action(g, y), np.asarray(x, dtype=float), v)


def action_jacobian(m: SystemModel, g: GroupElement, x) -> np.ndarray:
    """(n, n) matrix of TR_g at x."""
    return jacobian(lambda y: m.action(g, y), np.asarray(x, dtype=float))


def velocity_hessian(m: SystemModel, x, v):
    """
    d2L / dv dv by central differences, returned with its determinant.
    L is quadratic in v, so any step is exact and a step of order |v|
    keeps the roundoff at machine level.
    """
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    h = max(1.0, float(np.linalg.norm(v)))
    n = m.n

    def L(w):
        return lagrangian(m, TangentSample(x, w))

    H = np.empty((n, n))
    eye = np.eye(n)
    for i in range(n):
        for j in range(i, n):
            ei, ej = h * eye[i], h * eye[j]
            H[i, j] = H[j, i] = (L(v + ei + ej) - L(v + ei - ej)
                                 - L(v - ei + ej) + L(v - ei - ej)) / (4.0 * h * h)
    return H, float(np.linalg.det(H))


def momentum_equivariance_residual(m: SystemModel, x, v, g: GroupElement) -> float:
    """|P(R_g x, TR_g v) - Ad*_g P(x, v)|"""
    x = np.asarray(x, dtype=float)
    moved = TangentSample(m.action(g, x), tangent_action(m, g, x, v))
    lhs = momentum(m, moved)
    rhs = coadjoint(g, momentum(m, TangentSample(x, v)))
    return (lhs - rhs).norm()
