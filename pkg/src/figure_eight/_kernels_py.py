"""Pure-numpy fallback for the hot kernels.

Mirrors the compiled extension `_kernels` exactly; `kernels` picks whichever
is available at import time.  State layout: positions [x1,y1,x2,y2,x3,y3],
full phase state [positions, velocities] (length 12).  Equal unit masses.
The pair force law is grad of f(r) = r^a / a, i.e. each pair contributes
(q_j - q_i) * r_ij^(a-2) to body i's acceleration.
"""

import numpy as np

IMPLEMENTATION = "python"

_PAIRS = ((0, 1), (1, 2), (2, 0))


def accel(pos, a_exp):
    """Accelerations (length 6) of the three bodies at flat positions (length 6)."""
    pos = np.asarray(pos, dtype=float)
    out = np.zeros(6)
    e = 0.5 * (a_exp - 2.0)
    for i, j in _PAIRS:
        dx = pos[2 * j] - pos[2 * i]
        dy = pos[2 * j + 1] - pos[2 * i + 1]
        c = (dx * dx + dy * dy) ** e
        out[2 * i] += c * dx
        out[2 * i + 1] += c * dy
        out[2 * j] -= c * dx
        out[2 * j + 1] -= c * dy
    return out


def rhs(t, y, a_exp):
    """Three-body vector field d/dt [positions, velocities] at state y (length 12)."""
    y = np.asarray(y, dtype=float)
    out = np.empty(12)
    out[:6] = y[6:]
    out[6:] = accel(y[:6], a_exp)
    return out


def accel_batch(pos, a_exp):
    """Vectorized accel: pos has shape (n, 6), returns (n, 6)."""
    pos = np.asarray(pos, dtype=float)
    out = np.zeros_like(pos)
    e = 0.5 * (a_exp - 2.0)
    for i, j in _PAIRS:
        d = pos[:, 2 * j:2 * j + 2] - pos[:, 2 * i:2 * i + 2]
        c = np.sum(d * d, axis=1) ** e
        out[:, 2 * i:2 * i + 2] += c[:, None] * d
        out[:, 2 * j:2 * j + 2] -= c[:, None] * d
    return out


def min_pair_distance(pos):
    """Smallest of the three pairwise distances at flat positions (length 6)."""
    pos = np.asarray(pos, dtype=float)
    best = np.inf
    for i, j in _PAIRS:
        dx = pos[2 * j] - pos[2 * i]
        dy = pos[2 * j + 1] - pos[2 * i + 1]
        r2 = dx * dx + dy * dy
        if r2 < best:
            best = r2
    return float(np.sqrt(best))
