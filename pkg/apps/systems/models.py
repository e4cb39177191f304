"""
Fallcat - System Specifications
Parameters of the builtin systems and of table-driven generic systems.
"""
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from apps.core.exceptions import InvalidSpecError

TRANSLATIONS = 'translations'
ROTATIONS = 'rotations'
GROUP_PARTS = (TRANSLATIONS, ROTATIONS)


def _positive(name, value):
    if not np.isfinite(value) or value <= 0.0:
        raise InvalidSpecError(f"{name} must be positive, got {value}", field=name)


@dataclass(frozen=True)
class BoardSpec:
    """Board of mass m1 at x carrying a point mass m2 at x + xi."""
    m1: float = 1.0
    m2: float = 1.0
    potential: str = '0'

    def __post_init__(self):
        _positive('m1', self.m1)
        _positive('m2', self.m2)


@dataclass(frozen=True)
class DiscSpec:
    """Disc of inertia I at angle alpha, point mass m at polar (r, phi) on the disc."""
    I: float = 1.0
    m: float = 1.0
    potential: str = '0'

    def __post_init__(self):
        _positive('I', self.I)
        _positive('m', self.m)


@dataclass(frozen=True)
class NBodySpec:
    masses: Tuple[float, ...] = (1.0, 1.0, 1.0)
    group_parts: Tuple[str, ...] = GROUP_PARTS

    def __post_init__(self):
        object.__setattr__(self, 'masses', tuple(float(v) for v in self.masses))
        object.__setattr__(self, 'group_parts', tuple(self.group_parts))
        if not self.masses:
            raise InvalidSpecError("N-body system needs at least one mass", field='masses')
        for a, mass in enumerate(self.masses):
            _positive(f'masses[{a}]', mass)
        unknown = set(self.group_parts) - set(GROUP_PARTS)
        if unknown or not self.group_parts:
            raise InvalidSpecError(
                f"group_parts must be a non-empty subset of {list(GROUP_PARTS)}",
                field='group_parts', got=list(self.group_parts))
        if len(set(self.group_parts)) != len(self.group_parts):
            raise InvalidSpecError("group_parts has duplicates", field='group_parts')

    @property
    def N(self):
        return len(self.masses)

    @property
    def total_mass(self):
        return float(sum(self.masses))


@dataclass(frozen=True)
class GenericSpec:
    """
    System given by expressions in the coordinate names.

    lie: 'abelian:k' (offset symbols b0..b{k-1}) or 'so3' (matrix symbols R00..R22)
    action: one expression per coordinate for R_g x
    generators: optional n x k table; derived from the action when omitted
    sample_box: optional [lo, hi] per coordinate for audit points
    """
    coordinates: Tuple[str, ...]
    lie: str
    metric: Tuple[Tuple[str, ...], ...]
    action: Tuple[str, ...]
    potential: str = '0'
    generators: Optional[Tuple[Tuple[str, ...], ...]] = None
    sample_box: Optional[Tuple[Tuple[float, float], ...]] = None
    name: str = 'generic'

    @property
    def n(self):
        return len(self.coordinates)


@dataclass(frozen=True)
class CatLoopParams:
    """
    Three-body gait: base side p0 p1 of length `side`; the interior angles
    at p0 and p1 oscillate as base + amplitude * sin(2 pi t + phase_i),
    phase_0 = 0 and phase_1 = `phase`.
    """
    masses: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    side: float = 1.0
    base_angles: Tuple[float, float] = (np.pi / 3.0, np.pi / 3.0)
    amplitude: float = 0.3
    phase: float = np.pi / 2.0
    samples: Optional[int] = None
    checkpoints: int = 257

    def __post_init__(self):
        if len(self.masses) != 3:
            raise InvalidSpecError("Cat loop needs exactly three masses", field='masses')
        for a, mass in enumerate(self.masses):
            _positive(f'masses[{a}]', mass)
        _positive('side', self.side)
        if self.amplitude < 0.0:
            raise InvalidSpecError("amplitude must be non-negative", field='amplitude')
        b0, b1 = self.base_angles
        lo0, hi0 = b0 - self.amplitude, b0 + self.amplitude
        lo1, hi1 = b1 - self.amplitude, b1 + self.amplitude
        if lo0 <= 0.0 or lo1 <= 0.0 or hi0 + hi1 >= np.pi:
            raise InvalidSpecError(
                "Gait leaves the triangle domain: angles must stay positive with sum below pi",
                field='base_angles', range=[[lo0, hi0], [lo1, hi1]])
