"""
Fallcat - Connection Services
The momentum-map connection A = g^{ab} (flat_g X_b) E_a and its checks.
"""
import logging
from typing import Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from apps.core.exceptions import DegenerateFormError
from apps.geometry.models import SystemModel
from apps.geometry.services import (
    action_jacobian,
    generator_matrix,
    gram_from,
    metric_tensor,
)
from apps.lie.models import AlgebraVector, BilinearForm
from apps.lie.services import adjoint_matrix, ad_invariance_residual, canonicalize, default_form, inverse

from .models import ConnectionEval

logger = logging.getLogger(__name__)

AD_INVARIANCE_TOLERANCE = 1e-10


def _frame(m: SystemModel, x):
    """(g(x), X(x), Gram matrix), the Gram matrix checked for singularity."""
    x = np.asarray(x, dtype=float)
    g = metric_tensor(m, x, check=False)
    X = generator_matrix(m, x)
    G = gram_from(g, X, m.singular_tolerance, m.name)
    return g, X, G


def connection_at(m: SystemModel, x) -> ConnectionEval:
    """
    A^a_i = (gram^-1)^{ab} g_ij X^j_b, solved with a Cholesky factorization.

    Raises:
        SingularActionError: the Gram matrix is singular at x
    """
    g, X, G = _frame(m, x)
    P = (g @ X).T
    A = cho_solve(cho_factor(G), P)
    return ConnectionEval(m.lie, x, A)


def pair(c: ConnectionEval, v) -> AlgebraVector:
    """(A v)^a = A^a_i v^i"""
    return AlgebraVector(c.lie, c.components @ np.asarray(v, dtype=float))


def vertical_projection(m: SystemModel, x, v) -> np.ndarray:
    """X(x) (A(x) v)"""
    c = connection_at(m, x)
    return generator_matrix(m, x) @ pair(c, v).components


def horizontal_projection(m: SystemModel, x, v) -> np.ndarray:
    """v - X(x) (A(x) v); the g-orthogonal complement of the vertical part."""
    v = np.asarray(v, dtype=float)
    return v - vertical_projection(m, x, v)


def connection_via_pipeline(m: SystemModel, x, h: BilinearForm) -> ConnectionEval:
    """
    A built through the h-corrected form:
        A_bar = h^-1 P~,   C = h^-1 gram,   A = C^-1 A_bar

    Raises:
        DegenerateFormError: h is not Ad-invariant
    """
    g, X, G = _frame(m, x)
    P = (g @ X).T
    A_bar = np.linalg.solve(h.matrix, P)
    C = np.linalg.solve(h.matrix, G)
    columns = [canonicalize(C, AlgebraVector(m.lie, A_bar[:, i])).components for i in range(m.n)]
    return ConnectionEval(m.lie, x, np.stack(columns, axis=1))


def verify_equivariance(m: SystemModel, x, g) -> float:
    """
    max |(R_g^* A)(x) - Ad_{g^-1} A(x)|, with the pullback through the
    finite-difference tangent map of R_g.
    """
    x = np.asarray(x, dtype=float)
    pulled = connection_at(m, m.action(g, x)).components @ action_jacobian(m, g, x)
    expected = adjoint_matrix(inverse(g)) @ connection_at(m, x).components
    return float(np.max(np.abs(pulled - expected)))


def verify_h_independence(m: SystemModel, x, h: Optional[BilinearForm] = None, rng=None) -> float:
    """
    max |A_pipeline - A_direct| componentwise, h defaulting to the identity form.

    Raises:
        DegenerateFormError: h is not Ad-invariant
    """
    h = h if h is not None else default_form(m.lie)
    rng = rng if rng is not None else np.random.default_rng(0)
    residual = ad_invariance_residual(h, rng)
    if residual > AD_INVARIANCE_TOLERANCE * max(1.0, float(np.max(np.abs(h.matrix)))):
        raise DegenerateFormError(
            "Bilinear form is not Ad-invariant", residual=residual, matrix=h.matrix)
    direct = connection_at(m, x).components
    via = connection_via_pipeline(m, x, h).components
    return float(np.max(np.abs(direct - via)))
