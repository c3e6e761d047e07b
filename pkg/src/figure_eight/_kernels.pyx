# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: power-law pairwise accelerations and the three-body
vector field.  Same contract as `_kernels_py`; selected by `kernels` at import.
"""

import numpy as np

from libc.math cimport sqrt, pow

IMPLEMENTATION = "cython"


cdef inline void _accel6(const double* pos, double a_exp, double* out) noexcept nogil:
    cdef double e = 0.5 * (a_exp - 2.0)
    cdef double dx, dy, c
    cdef int i, j, k
    for k in range(6):
        out[k] = 0.0
    # pairs (0,1), (1,2), (2,0)
    for k in range(3):
        i = k
        j = (k + 1) % 3
        dx = pos[2 * j] - pos[2 * i]
        dy = pos[2 * j + 1] - pos[2 * i + 1]
        c = pow(dx * dx + dy * dy, e)
        out[2 * i] += c * dx
        out[2 * i + 1] += c * dy
        out[2 * j] -= c * dx
        out[2 * j + 1] -= c * dy


def accel(pos, double a_exp):
    """Accelerations (length 6) of the three bodies at flat positions (length 6)."""
    cdef const double[::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    out_arr = np.empty(6)
    cdef double[::1] o = out_arr
    _accel6(&p[0], a_exp, &o[0])
    return out_arr


def rhs(double t, y, double a_exp):
    """Three-body vector field d/dt [positions, velocities] at state y (length 12)."""
    cdef const double[::1] s = np.ascontiguousarray(y, dtype=np.float64)
    out_arr = np.empty(12)
    cdef double[::1] o = out_arr
    cdef int k
    for k in range(6):
        o[k] = s[6 + k]
    _accel6(&s[0], a_exp, &o[6])
    return out_arr


def accel_batch(pos, double a_exp):
    """Vectorized accel: pos has shape (n, 6), returns (n, 6)."""
    cdef const double[:, ::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0]
    out_arr = np.empty((n, 6))
    cdef double[:, ::1] o = out_arr
    cdef Py_ssize_t m
    with nogil:
        for m in range(n):
            _accel6(&p[m, 0], a_exp, &o[m, 0])
    return out_arr


def min_pair_distance(pos):
    """Smallest of the three pairwise distances at flat positions (length 6)."""
    cdef const double[::1] p = np.ascontiguousarray(pos, dtype=np.float64)
    cdef double best = -1.0
    cdef double dx, dy, r2
    cdef int i, j, k
    for k in range(3):
        i = k
        j = (k + 1) % 3
        dx = p[2 * j] - p[2 * i]
        dy = p[2 * j + 1] - p[2 * i + 1]
        r2 = dx * dx + dy * dy
        if best < 0.0 or r2 < best:
            best = r2
    return sqrt(best)
