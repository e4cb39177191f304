"""
Fallcat - Shape Path Generators
Closed and open shape motions for the builtin systems, all on t in [0, 1].
"""
import logging

import numpy as np

from apps.core.exceptions import InvalidSpecError, SingularActionError
from apps.dynamics.models import ShapePath
from fallcat import settings

from .models import CatLoopParams
from .services import inertia_tensor

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi
# Gait quality: smallest/largest inertia eigenvalue
CAT_WARNING_RATIO = 0.1


def _positive(name, value):
    if value <= 0.0:
        raise InvalidSpecError(f"{name} must be positive, got {value}", field=name)


def stationary_path(point, samples=None):
    point = np.asarray(point, dtype=float)
    return ShapePath(
        section=lambda t: point, velocity=lambda t: np.zeros_like(point),
        samples=samples or settings.DEFAULT_STEPS, name='stationary',
        params={'point': point.tolist()},
    )


# ===========================================
# Disc
# ===========================================

def disc_circle_loop(r0, turns=1, samples=None):
    """r(t) = r0, phi(t) = 2 pi turns t, alpha = 0."""
    _positive('r0', r0)
    rate = TWO_PI * turns
    return ShapePath(
        section=lambda t: np.array([r0, rate * t, 0.0]),
        velocity=lambda t: np.array([0.0, rate, 0.0]),
        samples=samples or settings.DEFAULT_STEPS, name='disc_circle_loop',
        params={'r0': r0, 'turns': turns},
    )


def radial_excursion(r0, r1, samples=None):
    """r(t) = r0 + (r1 - r0) sin^2(pi t): out to r1 and back along the same ray."""
    _positive('r0', r0)
    _positive('r1', r1)
    dr = r1 - r0
    return ShapePath(
        section=lambda t: np.array([r0 + dr * np.sin(np.pi * t) ** 2, 0.0, 0.0]),
        velocity=lambda t: np.array([dr * np.pi * np.sin(TWO_PI * t), 0.0, 0.0]),
        samples=samples or settings.DEFAULT_STEPS, name='radial_excursion',
        params={'r0': r0, 'r1': r1},
    )


def disc_wobble_loop(r0, dr, turns=1, samples=None):
    """r(t) = r0 + dr sin(2 pi t), phi(t) = 2 pi turns t."""
    _positive('r0', r0)
    if abs(dr) >= r0:
        raise InvalidSpecError("Wobble must keep r positive: |dr| < r0", field='dr')
    rate = TWO_PI * turns
    return ShapePath(
        section=lambda t: np.array([r0 + dr * np.sin(TWO_PI * t), rate * t, 0.0]),
        velocity=lambda t: np.array([dr * TWO_PI * np.cos(TWO_PI * t), rate, 0.0]),
        samples=samples or settings.DEFAULT_STEPS, name='disc_wobble_loop',
        params={'r0': r0, 'dr': dr, 'turns': turns},
    )


# ===========================================
# Board
# ===========================================

def board_sinusoid(amplitude, x0=0.0, xi0=0.0, samples=None):
    """xi(t) = xi0 + amplitude sin(2 pi t), board section x = x0."""
    return ShapePath(
        section=lambda t: np.array([x0, xi0 + amplitude * np.sin(TWO_PI * t)]),
        velocity=lambda t: np.array([0.0, amplitude * TWO_PI * np.cos(TWO_PI * t)]),
        samples=samples or settings.DEFAULT_STEPS, name='board_sinusoid',
        params={'amplitude': amplitude, 'x0': x0, 'xi0': xi0},
    )


# ===========================================
# Three-body cat gait
# ===========================================

def _rotate_z(angle, vectors):
    c, s = np.cos(angle), np.sin(angle)
    R = np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])
    return vectors @ R.T


def _cat_state(params: CatLoopParams, t):
    """Section and its velocity at t, both as (3, 3) arrays of particle vectors."""
    L = params.side
    masses = np.asarray(params.masses)
    A = params.amplitude
    b0 = params.base_angles[0] + A * np.sin(TWO_PI * t)
    b1 = params.base_angles[1] + A * np.sin(TWO_PI * t + params.phase)
    db0 = A * TWO_PI * np.cos(TWO_PI * t)
    db1 = A * TWO_PI * np.cos(TWO_PI * t + params.phase)

    # law of sines: |p0 p2| = L sin(b1) / sin(b0 + b1)
    S, dS = b0 + b1, db0 + db1
    rho = L * np.sin(b1) / np.sin(S)
    drho = L * (np.cos(b1) * db1 * np.sin(S) - np.sin(b1) * np.cos(S) * dS) / np.sin(S) ** 2

    p = np.array([[0.0, 0.0, 0.0],
                  [L, 0.0, 0.0],
                  [rho * np.cos(b0), rho * np.sin(b0), 0.0]])
    dp = np.zeros((3, 3))
    dp[2] = [drho * np.cos(b0) - rho * np.sin(b0) * db0,
             drho * np.sin(b0) + rho * np.cos(b0) * db0, 0.0]

    q = p - masses @ p / masses.sum()
    dq = dp - masses @ dp / masses.sum()

    # gauge: particle 0 on the +x axis
    psi = np.arctan2(q[0, 1], q[0, 0])
    dpsi = (q[0, 0] * dq[0, 1] - q[0, 1] * dq[0, 0]) / (q[0, 0] ** 2 + q[0, 1] ** 2)
    s = _rotate_z(-psi, q)
    ds = _rotate_z(-psi, dq) - dpsi * np.cross([0.0, 0.0, 1.0], s)
    return s, ds


def cat_loop(params: CatLoopParams = None) -> ShapePath:
    """
    Closed three-body deformation in the xy-plane, centre of mass at the
    origin. Checked for collinear shapes along the loop.

    Raises:
        SingularActionError: the loop passes a collinear shape (reports t)
    """
    params = params or CatLoopParams()
    masses = np.asarray(params.masses)

    worst_ratio, worst_t = np.inf, 0.0
    for t in np.linspace(0.0, 1.0, params.checkpoints):
        s, _ = _cat_state(params, t)
        eigenvalues = np.linalg.eigvalsh(inertia_tensor(masses, s))
        ratio = eigenvalues[0] / eigenvalues[-1]
        if ratio <= settings.SINGULAR_TOLERANCE:
            raise SingularActionError(
                "Cat loop passes a collinear shape", t=float(t),
                gram=inertia_tensor(masses, s), eigenvalues=eigenvalues)
        if ratio < worst_ratio:
            worst_ratio, worst_t = ratio, float(t)
    if worst_ratio < CAT_WARNING_RATIO:
        logger.warning(f"Cat loop inertia ratio drops to {worst_ratio:.3f} at t={worst_t:.3f}")

    return ShapePath(
        section=lambda t: _cat_state(params, t)[0].reshape(-1),
        velocity=lambda t: _cat_state(params, t)[1].reshape(-1),
        samples=params.samples or settings.DEFAULT_STEPS, name='cat_loop',
        params={'amplitude': params.amplitude, 'phase': params.phase,
                'side': params.side, 'base_angles': list(params.base_angles)},
    )
