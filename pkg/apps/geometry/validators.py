"""
Fallcat - System Audits
Sampled checks that a SystemModel really is a natural system with an
isometric right action: Killing generators, action law, invariant
potential, velocity Hessian equal to the metric.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from apps.core.exceptions import AuditFailedError, FallcatError
from apps.lie.services import compose, random_element
from fallcat import settings

from .models import SystemModel
from .services import killing_check, metric_tensor, velocity_hessian

logger = logging.getLogger(__name__)


@dataclass
class AuditResult:
    name: str
    max_residual: float
    tolerance: float
    samples: int

    @property
    def passed(self):
        return bool(self.max_residual <= self.tolerance)

    def as_dict(self):
        return {
            'name': self.name,
            'max_residual': self.max_residual,
            'tolerance': self.tolerance,
            'samples': self.samples,
            'passed': self.passed,
        }


@dataclass
class AuditReport:
    system: str
    results: List[AuditResult] = field(default_factory=list)

    @property
    def passed(self):
        return all(r.passed for r in self.results)

    def failures(self):
        return [r for r in self.results if not r.passed]

    def as_dict(self):
        return {
            'system': self.system,
            'passed': self.passed,
            'results': [r.as_dict() for r in self.results],
        }


# ===========================================
# Residuals
# ===========================================

def _scale(*arrays):
    return max([1.0] + [float(np.max(np.abs(a))) for a in arrays])


def action_law_residual(m: SystemModel, g1, g2, x) -> float:
    """|R_g2(R_g1 x) - R_(g1 g2) x| relative to max(1, |x|)"""
    x = np.asarray(x, dtype=float)
    lhs = m.action(g2, m.action(g1, x))
    rhs = m.action(compose(g1, g2), x)
    return float(np.max(np.abs(m.wrap_difference(lhs - rhs)))) / _scale(x)


def potential_invariance_residual(m: SystemModel, g, x) -> float:
    x = np.asarray(x, dtype=float)
    before = float(m.potential(x))
    return abs(float(m.potential(m.action(g, x))) - before) / max(1.0, abs(before))


def killing_residual(m: SystemModel, x) -> float:
    """Worst generator, relative to the size of g(x)."""
    g = metric_tensor(m, x, check=False)
    return max(killing_check(m, x, alpha) for alpha in range(m.k)) / _scale(g)


def hessian_metric_residual(m: SystemModel, x, v) -> float:
    H, det = velocity_hessian(m, x, v)
    g = metric_tensor(m, x, check=False)
    if det == 0.0:
        return float('inf')
    return float(np.max(np.abs(H - g))) / _scale(g)


# ===========================================
# Audit suite
# ===========================================

AUDITS = ('killing', 'action_law', 'potential_invariance', 'hessian_metric')


def run_audits(m: SystemModel, rng, samples=None, tolerances=None) -> AuditReport:
    """Evaluate every audit at `samples` seeded random points."""
    samples = samples or settings.VERIFY_SAMPLES
    tolerances = {**settings.IDENTITY_TOLERANCES, **(tolerances or {})}
    worst: Dict[str, float] = {name: 0.0 for name in AUDITS}

    for _ in range(samples):
        x = m.sample_point(rng)
        v = rng.standard_normal(m.n)
        g1 = random_element(m.lie, rng)
        g2 = random_element(m.lie, rng)
        try:
            metric_tensor(m, x)
        except FallcatError as exc:
            logger.debug(f"{m.name}: audit point rejected: {exc.message}")
            worst['hessian_metric'] = float('inf')
            continue
        current = {
            'killing': killing_residual(m, x),
            'action_law': action_law_residual(m, g1, g2, x),
            'potential_invariance': potential_invariance_residual(m, g1, x),
            'hessian_metric': hessian_metric_residual(m, x, v),
        }
        for name, value in current.items():
            worst[name] = max(worst[name], value)

    report = AuditReport(system=m.name, results=[
        AuditResult(name, worst[name], tolerances[name], samples) for name in AUDITS
    ])
    logger.debug(f"{m.name}: audits {'passed' if report.passed else 'failed'}")
    return report


def require_audits(m: SystemModel, rng, samples=None):
    """
    Raises:
        AuditFailedError: any audit above tolerance
    """
    report = run_audits(m, rng, samples)
    if not report.passed:
        failed = {r.name: r.max_residual for r in report.failures()}
        raise AuditFailedError(f"{m.name} failed the system audits", failed=failed)
    return report
