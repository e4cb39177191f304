"""
Fallcat - Reconstruction Integrators
Fixed-step solvers for g^-1 dg/dt = -Ad_{g^-1} w(t), i.e. dg/dt = -w(t) g,
with w(t) = A(s(t)) s'(t). Abelian blocks reduce to db/dt = -w(t).
"""
import logging

import numpy as np
from scipy.linalg import polar

from apps.core.exceptions import ConfigError, StepUnderflowError
from apps.lie.models import GroupElement, GroupKind
from apps.lie.services import rotation_exp, hat
from fallcat import settings

logger = logging.getLogger(__name__)

METHODS = ('rk4', 'lie-euler')


def _split(g: GroupElement):
    """Flat list of per-block states (offset vectors / rotation matrices)."""
    if g.lie.kind is GroupKind.PRODUCT:
        return [np.array(part.data, dtype=float) for part in g.data]
    return [np.array(g.data, dtype=float)]


def _join(lie, states):
    if lie.kind is GroupKind.PRODUCT:
        return GroupElement(lie, tuple(
            GroupElement(factor, state) for factor, state in zip(lie.factors, states)))
    return GroupElement(lie, states[0])


def _rhs(blocks, w, states):
    out = []
    for (s, factor), state in zip(blocks, states):
        if factor.kind is GroupKind.SO3:
            out.append(-hat(w[s]) @ state)
        else:
            out.append(-w[s])
    return out


def _reproject(blocks, states):
    return [polar(state)[0] if factor.kind is GroupKind.SO3 else state
            for (_, factor), state in zip(blocks, states)]


def _check_steps(steps):
    if steps < 1:
        raise ConfigError(f"Number of steps must be positive, got {steps}", field='steps')
    h = 1.0 / steps
    if h < settings.MIN_STEP:
        raise StepUnderflowError(f"Step {h:.3e} below the minimum {settings.MIN_STEP:.1e}", step=h)
    return h


def rk4(omega, g0: GroupElement, steps):
    """
    Classical RK4 with w sampled on the half-step grid (2N + 1 evaluations)
    and polar reprojection of rotation blocks after every step.

    Returns:
        list of N + 1 group elements at t_n = n / N
    """
    h = _check_steps(steps)
    lie = g0.lie
    blocks = lie.blocks()
    half = [np.asarray(omega(j * 0.5 * h), dtype=float) for j in range(2 * steps + 1)]

    states = _split(g0)
    out = [g0]
    for n in range(steps):
        w0, w1, w2 = half[2 * n], half[2 * n + 1], half[2 * n + 2]
        k1 = _rhs(blocks, w0, states)
        k2 = _rhs(blocks, w1, [y + 0.5 * h * k for y, k in zip(states, k1)])
        k3 = _rhs(blocks, w1, [y + 0.5 * h * k for y, k in zip(states, k2)])
        k4 = _rhs(blocks, w2, [y + h * k for y, k in zip(states, k3)])
        states = [y + h / 6.0 * (a + 2.0 * b + 2.0 * c + d)
                  for y, a, b, c, d in zip(states, k1, k2, k3, k4)]
        states = _reproject(blocks, states)
        out.append(_join(lie, states))
    return out


def lie_euler(omega, g0: GroupElement, steps):
    """First-order exponential Euler: g_{n+1} = exp(-h w(t_n)) g_n."""
    h = _check_steps(steps)
    lie = g0.lie
    blocks = lie.blocks()
    states = _split(g0)
    out = [g0]
    for n in range(steps):
        w = np.asarray(omega(n * h), dtype=float)
        next_states = []
        for (s, factor), state in zip(blocks, states):
            if factor.kind is GroupKind.SO3:
                next_states.append(rotation_exp(-h * w[s]) @ state)
            else:
                next_states.append(state - h * w[s])
        states = next_states
        out.append(_join(lie, states))
    return out


def integrate(omega, g0: GroupElement, steps, method='rk4'):
    if method == 'rk4':
        return rk4(omega, g0, steps)
    if method == 'lie-euler':
        return lie_euler(omega, g0, steps)
    raise ConfigError(f"Unknown integrator '{method}'", field='method', choices=list(METHODS))
