"""
Fallcat - Lie Structure Validators
Structure-constant and on-group checks.
"""
import logging

import numpy as np

from .models import LieStructure, on_group_residual

logger = logging.getLogger(__name__)

STRUCTURE_TOLERANCE = 1e-12


def antisymmetry_residual(lie: LieStructure) -> float:
    """max |c^g_ab + c^g_ba|"""
    c = lie.structure_constants
    return float(np.max(np.abs(c + np.swapaxes(c, 1, 2)))) if lie.dim else 0.0


def jacobi_residual(lie: LieStructure) -> float:
    """
    max over (a, b, g, n) of
        c^m_ab c^n_mg + c^m_bg c^n_ma + c^m_ga c^n_mb
    """
    c = lie.structure_constants
    # term[a, b, g, n] = sum_m c^m_ab c^n_mg
    term = np.einsum('mab,nmg->abgn', c, c)
    cyclic = term + np.transpose(term, (1, 2, 0, 3)) + np.transpose(term, (2, 0, 1, 3))
    return float(np.max(np.abs(cyclic)))


def validate_structure(lie: LieStructure, tolerance=STRUCTURE_TOLERANCE) -> bool:
    """True when antisymmetry and Jacobi hold within `tolerance`."""
    anti = antisymmetry_residual(lie)
    jacobi = jacobi_residual(lie)
    if anti > tolerance or jacobi > tolerance:
        logger.warning(f"{lie.label}: antisymmetry {anti:.2e}, Jacobi {jacobi:.2e}")
        return False
    return True


def validate_on_group(matrix, tolerance=1e-9) -> bool:
    return on_group_residual(matrix) <= tolerance
