"""Kernel selection: compiled Cython extension when built, numpy fallback
otherwise.  Everything downstream imports the kernels from here.
"""

try:
    from figure_eight import _kernels as _impl
except ImportError:  # extension not built on this install
    from figure_eight import _kernels_py as _impl

accel = _impl.accel
rhs = _impl.rhs
accel_batch = _impl.accel_batch
min_pair_distance = _impl.min_pair_distance
IMPLEMENTATION = _impl.IMPLEMENTATION


def using_compiled() -> bool:
    return IMPLEMENTATION == "cython"
