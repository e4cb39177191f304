"""
Fallcat - Connection Validators
"""
import logging

import numpy as np

from .models import ConnectionEval

logger = logging.getLogger(__name__)


def check_reproducing(c: ConnectionEval, X) -> float:
    """
    max |A(x) X(x) - 1|; <A, X_a> = a.

    A rank-deficient A reports an infinite residual.
    """
    X = np.asarray(X, dtype=float)
    if c.rank < c.lie.dim:
        logger.warning(f"Connection at {c.x.tolist()} has rank {c.rank} < {c.lie.dim}")
        return float('inf')
    return float(np.max(np.abs(c.components @ X - np.eye(c.lie.dim))))
