"""
Fallcat - System Builders
Board, disc and N-body systems, generic systems, and their closed forms.
"""
import logging
from functools import singledispatch

import numpy as np
import sympy as sp
from scipy.integrate import quad

from apps.core.exceptions import InvalidSpecError
from apps.geometry.models import SystemModel
from apps.geometry.validators import require_audits
from apps.lie.models import GroupKind, LieStructure
from apps.lie.services import hat
from fallcat import settings

from .generic import _parse, compile_generic
from .models import (
    ROTATIONS,
    TRANSLATIONS,
    BoardSpec,
    DiscSpec,
    GenericSpec,
    NBodySpec,
)

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * np.pi


def _shape_potential(text, names, indices):
    """U as a function of the listed shape coordinates only."""
    symbols = [sp.Symbol(name) for name in names]
    expr = _parse(text, symbols, 'potential')
    fn = sp.lambdify(symbols, expr, modules='numpy')
    return lambda x: float(fn(*[x[i] for i in indices]))


@singledispatch
def build(spec) -> SystemModel:
    """
    SystemModel for a system spec.

    Raises:
        InvalidSpecError: unknown spec type or inadmissible parameters
    """
    raise InvalidSpecError(f"No builder for {type(spec).__name__}")


# ===========================================
# Board
# ===========================================

@build.register
def _(spec: BoardSpec) -> SystemModel:
    """Coordinates (x, xi); translations x -> x + b."""
    m1, m2 = spec.m1, spec.m2
    g = np.array([[m1 + m2, m2], [m2, m2]])
    X = np.array([[1.0], [0.0]])

    def action(elem, x):
        return np.array([x[0] + elem.data[0], x[1]])

    return SystemModel(
        name='board', n=2, lie=LieStructure.abelian(1),
        metric=lambda x: g, potential=_shape_potential(spec.potential, ['xi'], [1]),
        generators=lambda x: X, action=action, coordinates=('x', 'xi'),
        sampler=lambda rng: rng.uniform(-2.0, 2.0, 2), spec=spec,
    )


def board_connection(spec: BoardSpec):
    """A = dx + m2/(m1+m2) dxi"""
    return np.array([1.0, spec.m2 / (spec.m1 + spec.m2)])


# ===========================================
# Disc
# ===========================================

@build.register
def _(spec: DiscSpec) -> SystemModel:
    """
    Coordinates (r, phi, alpha): the disc turns by alpha, the point mass sits
    at polar (r, phi) in the disc frame. Rotations alpha -> alpha + b.
    """
    I, m = spec.I, spec.m

    def metric(x):
        mr2 = m * x[0] ** 2
        return np.array([[m, 0.0, 0.0],
                         [0.0, mr2, mr2],
                         [0.0, mr2, I + mr2]])

    X = np.array([[0.0], [0.0], [1.0]])

    def action(elem, x):
        return np.array([x[0], x[1], x[2] + elem.data[0]])

    def sampler(rng):
        return np.array([rng.uniform(0.5, 2.0), rng.uniform(-np.pi, np.pi), rng.uniform(-np.pi, np.pi)])

    return SystemModel(
        name='disc', n=3, lie=LieStructure.abelian(1),
        metric=metric, potential=_shape_potential(spec.potential, ['r', 'phi'], [0, 1]),
        generators=lambda x: X, action=action, coordinates=('r', 'phi', 'alpha'),
        sampler=sampler, periods=(None, TWO_PI, TWO_PI), spec=spec,
    )


def disc_connection(spec: DiscSpec, r):
    """A = dalpha + mr^2/(I+mr^2) dphi, in (r, phi, alpha) order."""
    mr2 = spec.m * r * r
    return np.array([0.0, mr2 / (spec.I + mr2), 1.0])


def disc_circle_holonomy(spec: DiscSpec, r0, turns=1):
    """beta0 = -2 pi turns I0/(I + I0), I0 = m r0^2"""
    I0 = spec.m * r0 * r0
    return -TWO_PI * turns * I0 / (spec.I + I0)


def disc_loop_holonomy(spec: DiscSpec, path):
    """-int_0^1 mr^2/(I+mr^2) phi' dt by adaptive quadrature."""
    def integrand(t):
        r = path.position(t)[0]
        mr2 = spec.m * r * r
        return -mr2 / (spec.I + mr2) * path.rate(t)[1]

    value, _ = quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-13, limit=200)
    return value


def disc_curvature(spec: DiscSpec, r):
    """dr ^ dphi coefficient of dA: 2 m r I / (I + m r^2)^2"""
    return 2.0 * spec.m * r * spec.I / (spec.I + spec.m * r * r) ** 2


# ===========================================
# N bodies
# ===========================================

def _positions(x):
    return np.asarray(x, dtype=float).reshape(-1, 3)


def center_of_mass(masses, positions):
    masses = np.asarray(masses, dtype=float)
    return masses @ positions / masses.sum()


def inertia_tensor(masses, positions):
    """I_ij = sum_a m_a (|r_a|^2 delta_ij - x^i_a x^j_a)"""
    masses = np.asarray(masses, dtype=float)
    positions = np.asarray(positions, dtype=float).reshape(-1, 3)
    r2 = np.einsum('a,ai,ai->', masses, positions, positions)
    return r2 * np.eye(3) - np.einsum('a,ai,aj->ij', masses, positions, positions)


def nbody_momenta(spec: NBodySpec, x, v):
    """(total linear momentum, total angular momentum about the origin)"""
    masses = np.asarray(spec.masses)
    r, u = _positions(x), _positions(v)
    linear = masses @ u
    angular = np.einsum('a,ai->i', masses, np.cross(r, u))
    return linear, angular


def nbody_lie(spec: NBodySpec) -> LieStructure:
    parts = [p for p in (TRANSLATIONS, ROTATIONS) if p in spec.group_parts]
    factors = [LieStructure.abelian(3) if p == TRANSLATIONS else LieStructure.so3() for p in parts]
    return factors[0] if len(factors) == 1 else LieStructure.product(*factors)


def nbody_model(spec: NBodySpec) -> SystemModel:
    """
    Unchecked N-body model. Translations act by r_a -> r_a + b, rotations by
    r_a -> B^T r_a; with both the rotation is about the centre of mass,
    r_a -> B^T (r_a - c) + c + b.
    """
    N = spec.N
    masses = np.asarray(spec.masses)
    lie = nbody_lie(spec)
    translations = TRANSLATIONS in spec.group_parts
    rotations = ROTATIONS in spec.group_parts
    g = np.diag(np.repeat(masses, 3))

    def split(elem):
        if lie.kind is GroupKind.PRODUCT:
            return elem.data[0].data, elem.data[1].data
        if lie.kind is GroupKind.SO3:
            return np.zeros(3), elem.data
        return elem.data, np.eye(3)

    def pivot(r):
        return center_of_mass(masses, r) if translations else np.zeros(3)

    def action(elem, x):
        lie.require(elem.lie)
        b, B = split(elem)
        r = _positions(x)
        c = pivot(r)
        return ((r - c) @ B + c + b).reshape(-1)

    def generators(x):
        r = _positions(x)
        columns = []
        if translations:
            columns.append(np.tile(np.eye(3), (N, 1)))
        if rotations:
            rel = r - pivot(r)
            # X_i = -e_i x (r_a - c) = hat(r_a - c) e_i
            columns.append(np.concatenate([hat(ra) for ra in rel], axis=0))
        return np.concatenate(columns, axis=1)

    def sampler(rng):
        return rng.standard_normal(3 * N)

    coordinates = tuple(f'{axis}{a}' for a in range(N) for axis in 'xyz')
    return SystemModel(
        name='nbody', n=3 * N, lie=lie, metric=lambda x: g, potential=lambda x: 0.0,
        generators=generators, action=action, coordinates=coordinates,
        sampler=sampler, spec=spec,
    )


@build.register
def _(spec: NBodySpec) -> SystemModel:
    if ROTATIONS in spec.group_parts:
        # rotations pivot on the centre of mass when translations are present
        minimum = 3 if TRANSLATIONS in spec.group_parts else 2
        if spec.N < minimum:
            raise InvalidSpecError(
                f"Rotations need at least {minimum} bodies: {spec.N} are always collinear with the pivot",
                field='masses', N=spec.N)
    return nbody_model(spec)


def nbody_assembled_connection(spec: NBodySpec, x):
    """
    A_tr + A_rot as printed for the centre-of-mass frame:
        A_tr^i  = sum_a m_a dx^i_a / m
        A_rot^i = -I^{ij} (sum_a m_a r_a x dr_a)_j
    """
    masses = np.asarray(spec.masses)
    r = _positions(x)
    rows = []
    if TRANSLATIONS in spec.group_parts:
        rows.append(np.kron(masses / masses.sum(), np.eye(3)))
    if ROTATIONS in spec.group_parts:
        # (r_a x dr_a)_l = hat(r_a)[l, j] dr_a^j
        angular = np.concatenate([m_a * hat(ra) for m_a, ra in zip(masses, r)], axis=1)
        rows.append(-np.linalg.solve(inertia_tensor(masses, r), angular))
    return np.concatenate(rows, axis=0)


# ===========================================
# Generic
# ===========================================

@build.register
def _(spec: GenericSpec) -> SystemModel:
    """Compiled and audited at seeded points before use."""
    model = compile_generic(spec)
    require_audits(model, np.random.default_rng(settings.DEFAULT_SEED))
    logger.info(f"Generic system '{spec.name}' passed the audits")
    return model
