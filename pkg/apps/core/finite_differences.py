"""
Fallcat - Finite Differences
Central-difference derivatives of black-box maps and time series.
"""
import numpy as np

EPS = np.finfo(float).eps


def fd_step(*scales):
    """
    Step for central differences: eps^(1/3) * max(1, |scale|).

    Args:
        scales: arrays/numbers whose magnitude sets the step
    """
    magnitude = max([1.0] + [float(np.linalg.norm(np.atleast_1d(s))) for s in scales])
    return EPS ** (1.0 / 3.0) * magnitude


def directional_derivative(f, x, direction, step=None):
    """(f(x + h d) - f(x - h d)) / 2h; works for scalar or array valued f."""
    x = np.asarray(x, dtype=float)
    direction = np.asarray(direction, dtype=float)
    if not np.any(direction):
        return np.zeros_like(np.asarray(f(x), dtype=float))
    h = step if step is not None else fd_step(x)
    return (np.asarray(f(x + h * direction), dtype=float)
            - np.asarray(f(x - h * direction), dtype=float)) / (2.0 * h)


def jacobian(f, x, step=None):
    """
    Central-difference Jacobian of f: R^n -> R^m.

    Returns:
        (m, n) array, column j is df/dx^j
    """
    x = np.asarray(x, dtype=float)
    h = step if step is not None else fd_step(x)
    columns = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = 1.0
        columns.append(directional_derivative(f, x, e, step=h))
    return np.stack(columns, axis=-1)


def scalar_derivative(f, t, step=None):
    """Central difference of a curve t -> f(t)."""
    h = step if step is not None else fd_step(t)
    return (np.asarray(f(t + h), dtype=float) - np.asarray(f(t - h), dtype=float)) / (2.0 * h)


def time_derivative(values, times):
    """
    Fourth-order time derivative of samples on a uniform grid.

        f'(t_i) = [f(t_{i-2}) - 8 f(t_{i-1}) + 8 f(t_{i+1}) - f(t_{i+2})] / 12h

    with fourth-order one-sided stencils at the two first and two last samples.
    Falls back to second-order np.gradient for short or non-uniform grids.

    Args:
        values: (N, ...) samples
        times: (N,) sample times

    Returns:
        (N, ...) derivative samples
    """
    values = np.asarray(values, dtype=float)
    times = np.asarray(times, dtype=float)
    n = len(times)
    if n < 2:
        return np.zeros_like(values)
    spacing = np.diff(times)
    if n < 5 or not np.allclose(spacing, spacing[0], rtol=1e-9, atol=0.0):
        return np.gradient(values, times, axis=0, edge_order=2 if n > 2 else 1)

    h = spacing[0]
    f = values
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8.0 * f[1:-3] + 8.0 * f[3:-1] - f[4:]) / (12.0 * h)
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * h)
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / (12.0 * h)
    d[-1] = (25.0 * f[-1] - 48.0 * f[-2] + 36.0 * f[-3] - 16.0 * f[-4] + 3.0 * f[-5]) / (12.0 * h)
    d[-2] = (3.0 * f[-1] + 10.0 * f[-2] - 18.0 * f[-3] + 6.0 * f[-4] - f[-5]) / (12.0 * h)
    return d
