"""
Fallcat - Dynamics Services
Horizontal lifts of shape paths, loop holonomy, momentum audit and
curvature of the momentum-map connection.
"""
import logging

import numpy as np
from scipy.optimize import least_squares

from apps.connection.services import connection_at, pair
from apps.core.exceptions import (
    AmbiguousBranchError,
    InvalidSpecError,
    PathNotClosedError,
    SingularActionError,
)
from apps.core.finite_differences import directional_derivative, time_derivative
from apps.geometry.models import SystemModel, TangentSample
from apps.geometry.services import generator_matrix, metric_tensor, momentum
from apps.lie.models import AlgebraVector, GroupElement
from apps.lie.services import compose, exp, identity, inverse, log
from fallcat import settings

from .integrators import integrate
from .models import CurvatureSample, HolonomyResult, MomentumAudit, ShapePath, Trajectory

logger = logging.getLogger(__name__)

FIBER_TOLERANCE = 1e-9


def _omega(m: SystemModel, path: ShapePath):
    """t -> A(s(t)) s'(t); singular points are reported with their time."""
    def omega(t):
        try:
            c = connection_at(m, path.position(t))
        except SingularActionError as exc:
            exc.details['t'] = float(t)
            raise
        return c.components @ path.rate(t)
    return omega


def integrate_reconstruction(m: SystemModel, path: ShapePath, g0=None, steps=None, method=None):
    """
    Group part of the horizontal lift: g(t_n), n = 0..N, g(0) = g0.

    Returns:
        (times, list of GroupElement)
    """
    steps = int(steps or path.samples)
    method = method or settings.DEFAULT_METHOD
    g0 = g0 if g0 is not None else identity(m.lie)
    m.lie.require(g0.lie)
    elements = integrate(_omega(m, path), g0, steps, method)
    return np.linspace(0.0, 1.0, steps + 1), elements


def horizontal_lift(m: SystemModel, path: ShapePath, g0=None, steps=None, method=None) -> Trajectory:
    """
    gamma(t) = R_{g(t)} s(t) with A(gamma') = 0.

    Velocities of the lifted curve are fourth-order differences of the
    sampled points, so momenta and pairings measure the integration error.
    """
    times, elements = integrate_reconstruction(m, path, g0, steps, method)
    points = np.array([m.action(g, path.position(t)) for g, t in zip(elements, times)])
    velocities = time_derivative(points, times)

    momenta = np.empty((len(times), m.k))
    pairing = np.empty((len(times), m.k))
    for n, (x, v) in enumerate(zip(points, velocities)):
        momenta[n] = momentum(m, TangentSample(x, v)).components
        pairing[n] = pair(connection_at(m, x), v).components

    group_log = None
    try:
        group_log = np.array([log(g).components for g in elements])
    except AmbiguousBranchError:
        logger.warning(f"{m.name}: lift passes a rotation by pi, group_log omitted")

    logger.info(f"{m.name}: lifted {path.name} with {len(times) - 1} steps")
    return Trajectory(
        lie=m.lie, times=times, points=points, velocities=velocities,
        group=tuple(elements), group_log=group_log, momenta=momenta, pairing=pairing,
    )


def locate_in_fiber(m: SystemModel, x0, base) -> GroupElement:
    """
    g with R_g x0 = base, found by least squares over exp coordinates.

    Raises:
        InvalidSpecError: base is not on the orbit of x0
    """
    x0 = np.asarray(x0, dtype=float)
    base = np.asarray(base, dtype=float)

    def residual(a):
        return m.wrap_difference(m.action(exp(AlgebraVector(m.lie, a)), x0) - base)

    fit = least_squares(residual, np.zeros(m.k), xtol=1e-15, ftol=1e-15, gtol=1e-15)
    g0 = exp(AlgebraVector(m.lie, fit.x))
    gap = float(np.max(np.abs(residual(fit.x))))
    if gap > FIBER_TOLERANCE * max(1.0, float(np.max(np.abs(base)))):
        raise InvalidSpecError("Base point is not in the fiber over s(0)", gap=gap)
    return g0


def holonomy(m: SystemModel, path: ShapePath, base=None, g0=None, steps=None, method=None) -> HolonomyResult:
    """
    g(1) g(0)^-1 for the horizontal lift of a loop.

    The lift starts at `base` (a point of the fiber over s(0)), at R_g0 s(0)
    when g0 is given, and at s(0) otherwise. A moved start runs along the
    translated section R_g0 s(t) from the identity.

    Raises:
        PathNotClosedError: s(1) != s(0)
    """
    if not path.is_loop(m):
        gap = path.endpoint_gap(m)
        raise PathNotClosedError(
            f"Holonomy needs a closed path; endpoint gap {gap:.3e}", endpoint_gap=gap)

    if base is not None:
        g0 = locate_in_fiber(m, path.position(0.0), base)
    if g0 is not None:
        path = path.transformed(m, g0)
    else:
        g0 = identity(m.lie)

    steps = int(steps or path.samples)
    method = method or settings.DEFAULT_METHOD
    _, elements = integrate_reconstruction(m, path, None, steps, method)
    element = compose(elements[-1], inverse(elements[0]))
    try:
        components = log(element).components
    except AmbiguousBranchError:
        logger.warning(f"{m.name}: holonomy is a rotation by pi, log omitted")
        components = None

    result = HolonomyResult(
        element=element, log=components, steps=steps, method=method,
        endpoint_gap=path.endpoint_gap(m), g0=g0,
    )
    logger.info(f"{m.name}: holonomy of {path.name} = {result.angle}")
    return result


# ===========================================
# Audits along trajectories
# ===========================================

def momentum_audit(m: SystemModel, traj: Trajectory) -> MomentumAudit:
    """
    max_n |P(gamma_n, gamma'_n)|, raw and normalized by
    max_n |X^T g|_2 |gamma'_n|, plus the largest connection pairing.
    """
    worst, worst_index, worst_pairing, scale = 0.0, 0, 0.0, 0.0
    for n, (x, v) in enumerate(zip(traj.points, traj.velocities)):
        g = metric_tensor(m, x, check=False)
        X = generator_matrix(m, x)
        value = float(np.linalg.norm(X.T @ g @ v))
        scale = max(scale, float(np.linalg.norm(X.T @ g, 2)) * float(np.linalg.norm(v)))
        if value > worst:
            worst, worst_index = value, n
        try:
            worst_pairing = max(worst_pairing, pair(connection_at(m, x), v).norm())
        except SingularActionError:
            worst_pairing = float('inf')
    normalized = worst / scale if scale > 0.0 else worst
    return MomentumAudit(
        max_momentum=worst, normalized=normalized, max_pairing=worst_pairing,
        worst_index=worst_index, samples=len(traj),
    )


def horizontality_residual(m: SystemModel, traj: Trajectory) -> np.ndarray:
    """|A(gamma_n) gamma'_n| per sample."""
    return np.array([pair(connection_at(m, x), v).norm()
                     for x, v in zip(traj.points, traj.velocities)])


# ===========================================
# Curvature
# ===========================================

def curvature_numeric(m: SystemModel, x, plane) -> CurvatureSample:
    """
    F^a_ij = d_i A^a_j - d_j A^a_i + c^a_bc A^b_i A^c_j,
    derivatives by central differences of connection_at.
    """
    x = np.asarray(x, dtype=float)
    i, j = (int(p) for p in plane)
    e_i, e_j = np.eye(m.n)[i], np.eye(m.n)[j]

    def column(index):
        return lambda y: connection_at(m, y).components[:, index]

    d_i_Aj = directional_derivative(column(j), x, e_i)
    d_j_Ai = directional_derivative(column(i), x, e_j)
    A = connection_at(m, x).components
    c = m.lie.structure_constants
    bracket_term = np.einsum('abc,b,c->a', c, A[:, i], A[:, j])
    return CurvatureSample(x=x, plane=(i, j), value=AlgebraVector(m.lie, d_i_Aj - d_j_Ai + bracket_term))


def curvature_scan(m: SystemModel, points, plane):
    return [curvature_numeric(m, x, plane) for x in points]
