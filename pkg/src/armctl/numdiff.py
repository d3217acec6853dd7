"""Central-difference derivative helpers.

The step rule h = rel * max(1, |coordinate|) is fixed so that every module
differentiating the dynamics produces reproducible, bit-identical numbers.
"""

from __future__ import annotations

import numpy as np

DEFAULT_REL_STEP = 1e-6


def central_step(value: float, rel: float = DEFAULT_REL_STEP) -> float:
    return rel * max(1.0, abs(value))


def gradient(f, x, rel: float = DEFAULT_REL_STEP) -> np.ndarray:
    """Central-difference gradient of a scalar function of a vector."""
    x = np.asarray(x, dtype=float)
    g = np.empty(x.size)
    for i in range(x.size):
        h = central_step(x[i], rel)
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (f(xp) - f(xm)) / (2.0 * h)
    return g


def jacobian(f, x, rel: float = DEFAULT_REL_STEP) -> np.ndarray:
    """Central-difference Jacobian of a vector function of a vector.

    Returns J with J[i, j] = d f_i / d x_j.
    """
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        h = central_step(x[j], rel)
        xp = x.copy()
        xm = x.copy()
        xp[j] += h
        xm[j] -= h
        cols.append((np.asarray(f(xp), dtype=float) - np.asarray(f(xm), dtype=float)) / (2.0 * h))
    return np.stack(cols, axis=1)
