"""Action functional on the symmetric loop space, its analytic gradient, and
the quasi-Newton minimizer that finds the eight.

The action of a T-periodic triple is the integral of kinetic minus potential
energy; on the uniform grid the rectangle rule is spectrally accurate for
smooth periodic integrands.  The gradient with respect to the sine
coefficients goes through the chain rule of the quadrature: the kinetic part
turns into cosine transforms of the body velocities, the potential part into
sine transforms of the per-body forces, with phase factors 2*pi*k*i/3 from
the choreography shifts.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from figure_eight import loops
from figure_eight.dynamics import CollisionError, PotentialSpec
from figure_eight.kernels import accel_batch
from figure_eight.loops import FourierLoop

_BODY_SHIFTS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])  # fractions of the period


class ConvergenceError(RuntimeError):
    """Minimization failed; `.result` holds the best iterate for diagnosis."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


def path_action(positions, velocities, period: float, potential: PotentialSpec) -> float:
    """Quadrature action of an arbitrary sampled T-periodic triple.

    positions/velocities have shape (n, 3, 2) on the uniform grid t_m = mT/n.
    """
    pos = np.asarray(positions, dtype=float)
    vel = np.asarray(velocities, dtype=float)
    n = pos.shape[0]
    kinetic = 0.5 * np.sum(vel**2, axis=(1, 2))
    r12 = np.linalg.norm(pos[:, 0] - pos[:, 1], axis=1)
    r23 = np.linalg.norm(pos[:, 1] - pos[:, 2], axis=1)
    r31 = np.linalg.norm(pos[:, 2] - pos[:, 0], axis=1)
    rmin_idx = int(np.argmin(np.minimum(np.minimum(r12, r23), r31)))
    rmin = min(r12[rmin_idx], r23[rmin_idx], r31[rmin_idx])
    if rmin < 1e-8:
        t_bad = rmin_idx * period / n
        raise CollisionError(f"collision on quadrature grid at t={t_bad:.6g}", time=t_bad)
    a = potential.exponent
    pot = (r12**a + r23**a + r31**a) / a
    return float(period / n * np.sum(kinetic - pot))


def _grid_eval(loop: FourierLoop, n: int):
    t = np.arange(n) * (loop.period / n)
    return t, loops.evaluate(loop, t, 0), loops.evaluate(loop, t, 1)


def min_grid_distance(loop: FourierLoop, n: int = loops.DEFAULT_GRID) -> float:
    """Smallest pairwise distance over the quadrature grid."""
    _, pos, _ = _grid_eval(loop, n)
    r12 = np.linalg.norm(pos[:, 0] - pos[:, 1], axis=1)
    r23 = np.linalg.norm(pos[:, 1] - pos[:, 2], axis=1)
    r31 = np.linalg.norm(pos[:, 2] - pos[:, 0], axis=1)
    return float(np.min(np.minimum(np.minimum(r12, r23), r31)))


def loop_diameter(loop: FourierLoop, n: int = loops.DEFAULT_GRID) -> float:
    """Bounding-box diagonal of the sampled curve."""
    q, _ = loops.resample(loop, n)
    span = q.max(axis=0) - q.min(axis=0)
    return float(np.hypot(span[0], span[1]))


def action_value(loop: FourierLoop, potential: PotentialSpec,
                 n_quadrature: int = loops.DEFAULT_GRID) -> float:
    """Action of the loop's three-body triple over one period."""
    _, pos, vel = _grid_eval(loop, n_quadrature)
    return path_action(pos, vel, loop.period, potential)


def action_gradient(loop: FourierLoop, potential: PotentialSpec,
                    n_quadrature: int = loops.DEFAULT_GRID):
    """(d A / d x_k, d A / d y_k) as dense arrays over k = 0..n_modes,
    already projected onto the symmetric subspace (disallowed modes zeroed).
    """
    _, gx, gy = _raw_gradient(loop, potential, n_quadrature)
    gx[~loops.x_mode_mask(loop.n_modes)] = 0.0
    gy[~loops.y_mode_mask(loop.n_modes)] = 0.0
    return gx, gy


def _raw_gradient(loop: FourierLoop, potential: PotentialSpec, n: int):
    """Unprojected quadrature gradient for every sine mode k = 0..n_modes."""
    t, pos, vel = _grid_eval(loop, n)
    n_modes = loop.n_modes
    period = loop.period
    omega = loop.omega

    # forces on each body at each grid time; collision check mirrors the value
    flat = pos.reshape(-1, 6)
    r12 = np.linalg.norm(pos[:, 0] - pos[:, 1], axis=1)
    r23 = np.linalg.norm(pos[:, 1] - pos[:, 2], axis=1)
    r31 = np.linalg.norm(pos[:, 2] - pos[:, 0], axis=1)
    rmin = np.min(np.stack([r12, r23, r31]), axis=0)
    if np.min(rmin) < 1e-8:
        t_bad = t[int(np.argmin(rmin))]
        raise CollisionError(f"collision on quadrature grid at t={t_bad:.6g}", time=t_bad)
    acc = accel_batch(flat, potential.exponent).reshape(-1, 3, 2)

    k = np.arange(n_modes + 1)
    # C_k(f) = Re(rfft(f))[k], S_k(f) = -Im(rfft(f))[k] for k below Nyquist
    def transforms(samples):  # samples shape (n,)
        spectrum = np.fft.rfft(samples)[: n_modes + 1]
        return spectrum.real, -spectrum.imag

    gx = np.zeros(n_modes + 1)
    gy = np.zeros(n_modes + 1)
    for i in range(3):
        theta = 2.0 * np.pi * k * _BODY_SHIFTS[i]  # k * omega * (i*T/3)
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        for axis, g in ((0, gx), (1, gy)):
            c_v, s_v = transforms(vel[:, i, axis])
            c_a, s_a = transforms(acc[:, i, axis])
            g += k * omega * (cos_t * c_v - sin_t * s_v)   # kinetic part
            g += cos_t * s_a + sin_t * c_a                 # potential part
    scale = period / n
    return t, gx * scale, gy * scale


@dataclass
class MinimizeOptions:
    """Quasi-Newton controls; defaults match the 24-mode, 512-point setup."""

    max_iterations: int = 2000
    gradient_tolerance: float = 1e-8
    quadrature_points: int = loops.DEFAULT_GRID
    memory: int = 12                 # limited-memory secant pairs
    armijo_c1: float = 1e-4
    backtrack_factor: float = 0.5
    max_backtracks: int = 60
    collision_fraction: float = 0.05  # reject steps with min r < frac * diameter

    def __post_init__(self):
        if self.gradient_tolerance <= 0 or self.max_iterations <= 0:
            raise ValueError("tolerances and iteration limits must be positive")


@dataclass
class LogRow:
    iteration: int
    action: float
    gradient_norm: float
    min_pair_distance: float
    step_size: float


@dataclass
class MinimizeResult:
    loop: FourierLoop
    converged: bool
    iterations: int
    action: float
    gradient_norm: float
    log: list = field(default_factory=list)

    def write_log(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "action", "gradient_norm",
                             "min_pair_distance", "step_size"])
            for row in self.log:
                writer.writerow([row.iteration, repr(row.action), repr(row.gradient_norm),
                                 repr(row.min_pair_distance), repr(row.step_size)])


def _two_loop_direction(grad, s_list, y_list):
    """L-BFGS two-loop recursion: approximate -H^{-1} g direction."""
    q = grad.copy()
    alphas = []
    for s, y in zip(reversed(s_list), reversed(y_list)):
        rho = 1.0 / float(y @ s)
        a = rho * float(s @ q)
        alphas.append(a)
        q -= a * y
    if s_list:
        s, y = s_list[-1], y_list[-1]
        q *= float(s @ y) / float(y @ y)
    for (s, y), a in zip(zip(s_list, y_list), reversed(alphas)):
        rho = 1.0 / float(y @ s)
        b = rho * float(y @ q)
        q += (a - b) * s
    return -q


def minimize(seed: FourierLoop, potential: PotentialSpec,
             opts: MinimizeOptions | None = None) -> MinimizeResult:
    """Minimize the action over the symmetric subspace starting from seed.

    Limited-memory quasi-Newton with Armijo backtracking; trial steps whose
    minimum grid pair distance drops below collision_fraction times the loop
    diameter are rejected, keeping iterates in the seed's collision-free
    class.  Returns the canonically oriented minimizer.  Raises
    ConvergenceError when the iteration or line-search budget runs out.
    """
    opts = opts or MinimizeOptions()
    n = opts.quadrature_points
    n_modes = seed.n_modes
    period = seed.period

    def build(vec):
        return loops.unpack_coefficients(vec, n_modes, period)

    def value_grad(vec):
        lp = build(vec)
        f = action_value(lp, potential, n)
        gx, gy = action_gradient(lp, potential, n)
        ix, iy = loops.free_coefficient_indices(n_modes)
        return f, np.concatenate([gx[ix], gy[iy]])

    x = loops.pack_coefficients(seed)
    f, g = value_grad(x)
    gnorm = float(np.linalg.norm(g))
    log = [LogRow(0, f, gnorm, min_grid_distance(build(x), n), 0.0)]

    s_hist: list[np.ndarray] = []
    y_hist: list[np.ndarray] = []
    iterations = 0

    for it in range(1, opts.max_iterations + 1):
        if gnorm < opts.gradient_tolerance:
            break
        d = _two_loop_direction(g, s_hist, y_hist)
        slope = float(g @ d)
        if slope >= 0.0:  # secant model lost descent; restart on steepest descent
            d = -g
            slope = -gnorm**2
            s_hist.clear()
            y_hist.clear()

        step = 1.0
        accepted = False
        guard_blocked = False
        for _ in range(opts.max_backtracks):
            x_try = x + step * d
            loop_try = build(x_try)
            try:
                rmin = min_grid_distance(loop_try, n)
                guard = opts.collision_fraction * loop_diameter(loop_try, n)
                if rmin < guard:
                    guard_blocked = True
                    raise CollisionError("step rejected by collision guard")
                f_try, g_try = value_grad(x_try)
                guard_blocked = False
            except CollisionError:
                step *= opts.backtrack_factor
                continue
            if f_try <= f + opts.armijo_c1 * step * slope:
                accepted = True
                break
            step *= opts.backtrack_factor
        if not accepted:
            result = _finish(build(x), f, gnorm, False, it - 1, log)
            reason = ("collision approach: line search blocked by the minimum-distance guard"
                      if guard_blocked else "line search failed to find sufficient decrease")
            raise ConvergenceError(reason, result)

        s = x_try - x
        yv = g_try - g
        if float(s @ yv) > 1e-12 * float(np.linalg.norm(s)) * float(np.linalg.norm(yv)):
            s_hist.append(s)
            y_hist.append(yv)
            if len(s_hist) > opts.memory:
                s_hist.pop(0)
                y_hist.pop(0)
        x, f, g = x_try, f_try, g_try
        gnorm = float(np.linalg.norm(g))
        iterations = it
        log.append(LogRow(it, f, gnorm, min_grid_distance(build(x), n), step))

    if gnorm >= opts.gradient_tolerance:
        result = _finish(build(x), f, gnorm, False, iterations, log)
        raise ConvergenceError(
            f"no convergence after {opts.max_iterations} iterations "
            f"(gradient norm {gnorm:.3e})", result)
    return _finish(build(x), f, gnorm, True, iterations, log)


def _finish(loop, f, gnorm, converged, iterations, log):
    oriented = loops.canonicalize(loop)
    return MinimizeResult(loop=oriented, converged=converged, iterations=iterations,
                          action=f, gradient_norm=gnorm, log=log)
