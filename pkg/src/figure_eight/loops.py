"""D6-symmetric Fourier loop space for the choreography curve.

A loop is the single closed curve q(t) traversed by all three bodies with
phase shifts T/3 (body i at q(t + (i-1)T/3)).  Both coordinates are pure sine
series, with the mode masks

    x: k odd and k % 3 != 0        y: k even and k % 3 != 0

These bake in the dihedral symmetries: odd sine series give q(-t) = -q(t);
the parity split across the half period gives q(t + T/2) = (-x(t), y(t));
and dropping k % 3 == 0 makes the three phase-shifted copies sum to zero
(each excluded mode is exactly the one surviving the sum over phase shifts),
so the center of mass vanishes identically.  Consequences used downstream:
q(0) = 0 exactly (Euler configuration with body 1 at the origin) and the
t = -T/12 configuration is exactly isosceles with body 2 on the x-axis.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

DEFAULT_MODES = 24
DEFAULT_GRID = 512


def x_mode_mask(n_modes: int) -> np.ndarray:
    """Boolean mask over k = 0..n_modes: allowed x (sine) modes."""
    k = np.arange(n_modes + 1)
    return (k % 2 == 1) & (k % 3 != 0)


def y_mode_mask(n_modes: int) -> np.ndarray:
    """Boolean mask over k = 0..n_modes: allowed y (sine) modes."""
    k = np.arange(n_modes + 1)
    return (k % 2 == 0) & (k % 3 != 0) & (k > 0)


@dataclass(frozen=True)
class FourierLoop:
    """Truncated sine series of the choreography curve.

    x_coeffs[k], y_coeffs[k] multiply sin(2*pi*k*t / period); index 0 is
    unused.  Coefficients violating the symmetry masks must be zero; build
    arbitrary coefficient vectors through symmetrize().
    """

    period: float
    x_coeffs: np.ndarray
    y_coeffs: np.ndarray

    def __post_init__(self):
        if self.period <= 0:
            raise ValueError("period must be positive")
        xc = np.asarray(self.x_coeffs, dtype=float).copy()
        yc = np.asarray(self.y_coeffs, dtype=float).copy()
        if xc.ndim != 1 or yc.ndim != 1 or xc.shape != yc.shape:
            raise ValueError("coefficient arrays must be 1-d and equal length")
        n = xc.shape[0] - 1
        if np.any(xc[~x_mode_mask(n)] != 0.0) or np.any(yc[~y_mode_mask(n)] != 0.0):
            raise ValueError("coefficients violate the symmetry masks; use symmetrize()")
        xc.flags.writeable = False
        yc.flags.writeable = False
        object.__setattr__(self, "x_coeffs", xc)
        object.__setattr__(self, "y_coeffs", yc)

    @property
    def n_modes(self) -> int:
        return self.x_coeffs.shape[0] - 1

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period


def symmetrize(x_coeffs, y_coeffs, period: float) -> FourierLoop:
    """Orthogonal projection of dense sine-coefficient arrays onto the
    symmetric subspace (zero every disallowed mode).  Idempotent."""
    xc = np.array(x_coeffs, dtype=float)
    yc = np.array(y_coeffs, dtype=float)
    n = xc.shape[0] - 1
    xc[~x_mode_mask(n)] = 0.0
    yc[~y_mode_mask(n)] = 0.0
    return FourierLoop(period, xc, yc)


def seed_eight(period: float, amplitude_ratio: float,
               n_modes: int = DEFAULT_MODES) -> FourierLoop:
    """Two-mode figure-eight seed: x = sin(2 pi t/T), y = ratio * sin(4 pi t/T).

    Crosses the origin at t = 0 and t = T/2 and satisfies every symmetry
    constraint (k=1 for x, k=2 for y).
    """
    if period <= 0:
        raise ValueError("period must be positive")
    xc = np.zeros(n_modes + 1)
    yc = np.zeros(n_modes + 1)
    xc[1] = 1.0
    yc[2] = amplitude_ratio
    return FourierLoop(period, xc, yc)


def evaluate_curve(loop: FourierLoop, t, derivative_order: int = 0) -> np.ndarray:
    """q(t) (or its time derivatives) for scalar or array t; shape (..., 2)."""
    t = np.asarray(t, dtype=float)
    k = np.arange(loop.n_modes + 1)
    phase = np.multiply.outer(t, k * loop.omega)  # (..., n_modes+1)
    if derivative_order == 0:
        basis = np.sin(phase)
        scale = np.ones_like(k, dtype=float)
    elif derivative_order == 1:
        basis = np.cos(phase)
        scale = k * loop.omega
    elif derivative_order == 2:
        basis = -np.sin(phase)
        scale = (k * loop.omega) ** 2
    else:
        raise ValueError("derivative_order must be 0, 1 or 2")
    x = basis @ (scale * loop.x_coeffs)
    y = basis @ (scale * loop.y_coeffs)
    return np.stack([x, y], axis=-1)


def evaluate(loop: FourierLoop, t, derivative_order: int = 0) -> np.ndarray:
    """All three bodies at time t via phase shifts: shape (..., 3, 2).

    Body i (0-based) is the curve at t + i*T/3.
    """
    t = np.asarray(t, dtype=float)
    shifts = np.array([0.0, loop.period / 3.0, 2.0 * loop.period / 3.0])
    pts = evaluate_curve(loop, t[..., None] + shifts, derivative_order)
    return pts


def resample(loop: FourierLoop, n_points: int):
    """(positions, velocities) of the curve on the uniform grid t_m = m T / n.

    Exact to series truncation; n_points must exceed 2 * n_modes so the grid
    resolves every mode (anti-aliasing).
    """
    if n_points <= 2 * loop.n_modes:
        raise ValueError(
            f"n_points = {n_points} must exceed twice the mode cutoff ({2 * loop.n_modes})")
    t = np.arange(n_points) * (loop.period / n_points)
    return evaluate_curve(loop, t, 0), evaluate_curve(loop, t, 1)


def sine_coefficients(samples: np.ndarray, n_modes: int) -> np.ndarray:
    """Sine coefficients (k = 0..n_modes) of real samples on the uniform grid,
    via rFFT; exact for series band-limited below the grid Nyquist."""
    n = samples.shape[0]
    if n_modes >= n // 2:
        raise ValueError("grid too coarse for requested modes")
    spectrum = np.fft.rfft(samples)
    return -2.0 / n * spectrum.imag[: n_modes + 1]


def canonicalize(loop: FourierLoop) -> FourierLoop:
    """Flip coefficient signs so the loop sits in the reference frame:
    body 2 on the negative x-axis at t = -T/12 (x(T/4) < 0) and body 3 in the
    first quadrant at t = 0 (y(2T/3) > 0).

    Negating all x coefficients is the reflection across the y-axis, which is
    the same solution with the time origin shifted by T/2; negating all y
    coefficients is the reflection across the x-axis.  Both preserve the
    symmetry masks and the action.
    """
    x_vertex = float(evaluate_curve(loop, 0.25 * loop.period)[0])
    y_third = float(evaluate_curve(loop, 2.0 * loop.period / 3.0)[1])
    if x_vertex == 0.0 or y_third == 0.0:
        raise ValueError("degenerate loop: cannot orient (vertex on axis)")
    xc = -loop.x_coeffs if x_vertex > 0 else loop.x_coeffs
    yc = -loop.y_coeffs if y_third < 0 else loop.y_coeffs
    return FourierLoop(loop.period, xc, yc)


def free_coefficient_indices(n_modes: int):
    """(x_indices, y_indices): the modes the optimizer treats as unknowns."""
    return np.nonzero(x_mode_mask(n_modes))[0], np.nonzero(y_mode_mask(n_modes))[0]


def pack_coefficients(loop: FourierLoop) -> np.ndarray:
    """Free (unconstrained) coefficients as a flat vector."""
    ix, iy = free_coefficient_indices(loop.n_modes)
    return np.concatenate([loop.x_coeffs[ix], loop.y_coeffs[iy]])


def unpack_coefficients(vector: np.ndarray, n_modes: int, period: float) -> FourierLoop:
    """Inverse of pack_coefficients."""
    ix, iy = free_coefficient_indices(n_modes)
    xc = np.zeros(n_modes + 1)
    yc = np.zeros(n_modes + 1)
    xc[ix] = vector[: ix.size]
    yc[iy] = vector[ix.size:]
    return FourierLoop(period, xc, yc)


def save_loop(loop: FourierLoop, path) -> None:
    """Persist as JSON {T, N, x_coeffs, y_coeffs} at full double precision."""
    payload = {
        "T": loop.period,
        "N": loop.n_modes,
        "x_coeffs": [float(c) for c in loop.x_coeffs],
        "y_coeffs": [float(c) for c in loop.y_coeffs],
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_loop(path) -> FourierLoop:
    with open(path) as fh:
        payload = json.load(fh)
    return FourierLoop(payload["T"], np.array(payload["x_coeffs"]),
                       np.array(payload["y_coeffs"]))
