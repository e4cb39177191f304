"""
Fallcat - Dynamics Models
Shape paths, lifted trajectories, holonomy and curvature records.
"""
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.interpolate import CubicSpline

from apps.core.exceptions import StructuralError
from apps.core.finite_differences import scalar_derivative, time_derivative
from apps.geometry.services import tangent_action
from apps.lie.models import AlgebraVector, GroupElement, LieStructure
from fallcat import settings

LOOP_TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class ShapePath:
    """
    Section t -> s(t), t in [0, 1], with optional analytic velocity.
    Without one the velocity is a central difference of the section.
    `samples` is the default number of integration steps.
    """
    section: Callable[[float], np.ndarray]
    velocity: Optional[Callable[[float], np.ndarray]] = None
    samples: int = settings.DEFAULT_STEPS
    name: str = 'path'
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.samples < 2:
            raise StructuralError(f"A shape path needs at least 2 samples, got {self.samples}")

    def position(self, t):
        return np.asarray(self.section(float(t)), dtype=float)

    def rate(self, t):
        if self.velocity is not None:
            return np.asarray(self.velocity(float(t)), dtype=float)
        return scalar_derivative(self.section, float(t))

    def endpoint_gap(self, model=None) -> float:
        dx = self.position(1.0) - self.position(0.0)
        if model is not None:
            dx = model.wrap_difference(dx)
        return float(np.max(np.abs(dx)))

    def is_loop(self, model=None, tolerance=LOOP_TOLERANCE) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.position(0.0)))))
        return self.endpoint_gap(model) <= tolerance * scale

    @classmethod
    def from_samples(cls, times, points, name='sampled'):
        """
        Sampled section: cubic spline through the points, velocities from
        second-order differences (one-sided at the ends), also splined.
        Samples whose ends coincide get a periodic spline and its derivative.
        Times are rescaled onto [0, 1].
        """
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or len(times) != len(points):
            raise StructuralError("Sampled path needs one row of coordinates per time")
        if len(times) < 2:
            raise StructuralError("Sampled path needs at least 2 samples")
        if np.any(np.diff(times) <= 0.0):
            raise StructuralError("Sample times must be strictly increasing")
        duration = times[-1] - times[0]
        unit = (times - times[0]) / duration
        scale = max(1.0, float(np.max(np.abs(points[0]))))
        closed = len(unit) > 3 and float(np.max(np.abs(points[-1] - points[0]))) <= LOOP_TOLERANCE * scale
        if closed:
            points = points.copy()
            points[-1] = points[0]
            section = CubicSpline(unit, points, axis=0, bc_type='periodic')
            velocity = section.derivative()
        else:
            rates = np.gradient(points, unit, axis=0, edge_order=2 if len(unit) > 2 else 1)
            section = CubicSpline(unit, points, axis=0)
            velocity = CubicSpline(unit, rates, axis=0)
        return cls(section=section, velocity=velocity, samples=max(len(times) - 1, 2),
                   name=name, params={'rows': int(len(times))})

    def reparameterized(self, warp, warp_rate=None):
        """s(w(t)) for a monotone warp w with w(0)=0, w(1)=1."""
        if warp_rate is None:
            def warp_rate(t):
                return float(scalar_derivative(warp, t))

        def section(t):
            return self.position(warp(t))

        def velocity(t):
            return self.rate(warp(t)) * warp_rate(t)

        return ShapePath(section, velocity, self.samples, f'{self.name}:warped', dict(self.params))

    def transformed(self, model, g: GroupElement):
        """The section R_g s(t)."""
        def section(t):
            return model.action(g, self.position(t))

        def velocity(t):
            return tangent_action(model, g, self.position(t), self.rate(t))

        return ShapePath(section, velocity, self.samples, f'{self.name}:moved', dict(self.params))


@dataclass(frozen=True, eq=False)
class Trajectory:
    """
    Sampled curve gamma(t_n) with velocities, reconstruction elements
    and momenta. `group` is empty for trajectories built from raw points.
    """
    lie: LieStructure
    times: np.ndarray
    points: np.ndarray
    velocities: np.ndarray
    group: Tuple[GroupElement, ...] = ()
    group_log: Optional[np.ndarray] = None
    momenta: Optional[np.ndarray] = None
    pairing: Optional[np.ndarray] = None

    @classmethod
    def from_points(cls, lie, times, points):
        times = np.asarray(times, dtype=float)
        points = np.asarray(points, dtype=float)
        return cls(lie, times, points, time_derivative(points, times))

    def __len__(self):
        return len(self.times)


@dataclass(frozen=True, eq=False)
class CurvatureSample:
    """F^alpha_ij at x; antisymmetric in (i, j)."""
    x: np.ndarray
    plane: Tuple[int, int]
    value: AlgebraVector


@dataclass(frozen=True, eq=False)
class HolonomyResult:
    element: GroupElement
    log: Optional[np.ndarray]
    steps: int
    method: str
    endpoint_gap: float
    g0: GroupElement

    @property
    def angle(self):
        """Signed angle for one-dimensional groups, rotation angle |log| otherwise."""
        if self.log is None:
            return None
        if self.log.size == 1:
            return float(self.log[0])
        return float(np.linalg.norm(self.log))


@dataclass(frozen=True)
class MomentumAudit:
    max_momentum: float
    normalized: float
    max_pairing: float
    worst_index: int
    samples: int
