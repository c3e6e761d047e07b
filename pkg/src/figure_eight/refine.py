"""Shooting refinement of the minimizer output on the fundamental domain
[-T/12, 0], plus reconstruction of the full orbit from the refined piece.

The start state at t = -T/12 is the isosceles configuration with body 2 at
the vertex on the negative x-axis, parameterized by four unknowns:

    q2 = (x2, 0)   q3 = (-x2/2, y3)   q1 = (-x2/2, -y3)     (x2 < 0, y3 > 0)
    v3 = (u, w)    v1 = (-u, w)       v2 = (0, -2w)          (w > 0)

which has zero center of mass and zero total momentum exactly.  The four
residuals at t = 0 are body 1's position (Euler configuration with 1 at the
origin) and the velocity difference v2 - v3 (equal velocities of 2 and 3,
which with zero total momentum makes them antiparallel to v1 and half its
size).  Note the start state's total angular momentum is NOT structurally
zero (it equals -3*x2*w - 2*y3*u); at a root it vanishes anyway, because the
residuals force L(0) = (q2+q3) ^ v2 = (-q1) ^ v2 = 0 and L is conserved.
refine() optionally polishes u onto that manifold at the end.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass

import numpy as np

from figure_eight import loops
from figure_eight.dynamics import (CollisionError, IntegrateOptions, PhaseState,
                                   PotentialSpec, Trajectory, derived_quantities,
                                   integrate)
from figure_eight.loops import FourierLoop

DEFAULT_SHOOT_TOL = 1e-13
DEFAULT_SHOOT_ATOL = 1e-14
DEFAULT_RESIDUAL_TOL = 1e-11


class RefinementError(RuntimeError):
    """Shooting iteration diverged or hit a singular Jacobian."""


class SeamError(RuntimeError):
    """Reconstructed orbit fails continuity at a symmetry seam."""


@dataclass(frozen=True)
class ShootingUnknowns:
    """The four shooting parameters encoding the isosceles start state."""

    x2_start: float
    y3_start: float
    u_start: float
    w_start: float

    def __post_init__(self):
        vals = (self.x2_start, self.y3_start, self.u_start, self.w_start)
        if not all(np.isfinite(v) for v in vals):
            raise ValueError("non-finite shooting unknowns")
        if self.x2_start >= 0:
            raise ValueError("x2_start must be negative (vertex on the negative x-axis)")
        if self.y3_start <= 0:
            raise ValueError("y3_start must be positive (body 3 above the axis)")
        if self.w_start <= 0:
            raise ValueError("w_start must be positive (body 2 moving down)")

    def as_array(self) -> np.ndarray:
        return np.array([self.x2_start, self.y3_start, self.u_start, self.w_start])

    @classmethod
    def from_array(cls, v) -> "ShootingUnknowns":
        return cls(float(v[0]), float(v[1]), float(v[2]), float(v[3]))

    def state(self, period: float) -> PhaseState:
        """The encoded PhaseState at t = -T/12."""
        x2, y3, u, w = self.x2_start, self.y3_start, self.u_start, self.w_start
        pos = np.array([[-x2 / 2.0, -y3], [x2, 0.0], [-x2 / 2.0, y3]])
        vel = np.array([[-u, w], [0.0, -2.0 * w], [u, w]])
        return PhaseState(pos, vel, time=-period / 12.0)

    def start_angular_momentum(self) -> float:
        """Total angular momentum of the start state: -3*x2*w - 2*y3*u."""
        return -3.0 * self.x2_start * self.w_start - 2.0 * self.y3_start * self.u_start

    def with_zero_angular_momentum(self) -> "ShootingUnknowns":
        """Project u onto the L = 0 manifold, leaving the other unknowns."""
        u = -3.0 * self.x2_start * self.w_start / (2.0 * self.y3_start)
        return ShootingUnknowns(self.x2_start, self.y3_start, u, self.w_start)


@dataclass(frozen=True)
class ShootingResiduals:
    """Boundary mismatch at t = 0; all four vanish at a true eight."""

    r1: float  # x1(0)
    r2: float  # y1(0)
    r3: float  # v2x(0) - v3x(0)
    r4: float  # v2y(0) - v3y(0)

    def as_array(self) -> np.ndarray:
        return np.array([self.r1, self.r2, self.r3, self.r4])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_array())))


def project_isosceles(positions, velocities, period: float):
    """Project an arbitrary near-isosceles state onto the four-parameter
    family (mirror symmetrization of bodies 1 and 3, body 2 snapped onto the
    x-axis).

    Returns (unknowns, displacement) where displacement is the largest
    position/velocity move the projection applied.
    """
    q = np.asarray(positions, dtype=float)
    v = np.asarray(velocities, dtype=float)
    x2 = float(q[1, 0])
    y3 = float((q[2, 1] - q[0, 1]) / 2.0)
    u = float((v[2, 0] - v[0, 0]) / 2.0)
    w = float((v[2, 1] + v[0, 1]) / 2.0)
    unknowns = ShootingUnknowns(x2, y3, u, w)
    projected = unknowns.state(period)
    displacement = max(
        float(np.max(np.linalg.norm(projected.positions - q, axis=1))),
        float(np.max(np.linalg.norm(projected.velocities - v, axis=1))),
    )
    return unknowns, displacement


def extract_unknowns(loop: FourierLoop, warn_tol: float = 1e-4) -> ShootingUnknowns:
    """Read the loop state at t = -T/12 and project onto the isosceles
    parameterization.

    For valid symmetric loops the state is already exactly isosceles, so the
    projection is the identity up to roundoff; a displacement beyond warn_tol
    times the loop diameter triggers a warning.
    """
    t0 = -loop.period / 12.0
    q = loops.evaluate(loop, t0, 0)
    v = loops.evaluate(loop, t0, 1)
    unknowns, displacement = project_isosceles(q, v, loop.period)
    from figure_eight.action import loop_diameter  # local import avoids a cycle
    if displacement > warn_tol * loop_diameter(loop):
        warnings.warn(
            f"loop is {displacement:.3e} away from the isosceles parameterization; "
            "refinement may start far from a solution", stacklevel=2)
    return unknowns


def _shoot_trajectory(unknowns: ShootingUnknowns, potential: PotentialSpec,
                      period: float, tol: float, atol: float,
                      n_samples: int) -> Trajectory:
    opts = IntegrateOptions(tol=tol, atol=atol, n_samples=n_samples)
    return integrate(unknowns.state(period), potential, 0.0, opts)


def _residuals_from(traj: Trajectory) -> ShootingResiduals:
    end = traj.state_at(0.0)
    return ShootingResiduals(
        r1=float(end.positions[0, 0]),
        r2=float(end.positions[0, 1]),
        r3=float(end.velocities[1, 0] - end.velocities[2, 0]),
        r4=float(end.velocities[1, 1] - end.velocities[2, 1]),
    )


def shoot(unknowns: ShootingUnknowns, potential: PotentialSpec, period: float,
          tol: float = DEFAULT_SHOOT_TOL, atol: float = DEFAULT_SHOOT_ATOL) -> ShootingResiduals:
    """Integrate the fundamental domain and evaluate the boundary residuals."""
    traj = _shoot_trajectory(unknowns, potential, period, tol, atol, n_samples=17)
    return _residuals_from(traj)


def fundamental_trajectory(unknowns: ShootingUnknowns, potential: PotentialSpec,
                           period: float, n_samples: int = 1025,
                           tol: float = DEFAULT_SHOOT_TOL,
                           atol: float = DEFAULT_SHOOT_ATOL) -> Trajectory:
    """Densely sampled fundamental-domain trajectory of the given unknowns,
    exactly as encoded (no refinement)."""
    return _shoot_trajectory(unknowns, potential, period, tol, atol, n_samples)


@dataclass
class RefineResult:
    unknowns: ShootingUnknowns
    trajectory: Trajectory
    residuals: ShootingResiduals
    residual_norm: float
    iterations: int
    jacobian_condition: float


def refine(warm_start: ShootingUnknowns, potential: PotentialSpec, period: float,
           residual_tol: float = DEFAULT_RESIDUAL_TOL,
           max_iterations: int = 25,
           fd_step: float = 1e-7,
           shoot_tol: float = DEFAULT_SHOOT_TOL,
           shoot_atol: float = DEFAULT_SHOOT_ATOL,
           n_samples: int = 1025,
           project_angular_momentum: bool = True) -> RefineResult:
    """Damped Newton iteration on the shooting residual map.

    The 4x4 Jacobian comes from finite differences of shoot(); steps are
    halved until the residual norm decreases.  Converges when max|r| drops
    below residual_tol (then keeps polishing while it still improves).  With
    project_angular_momentum the final unknowns are nudged onto the exact
    zero-total-angular-momentum manifold when that preserves the tolerance.
    """
    if potential.is_scaling_degenerate:
        raise ValueError("exponent -2 is scaling-degenerate; the refiner refuses to run")

    def residual_vec(vec):
        unk = ShootingUnknowns.from_array(vec)
        return shoot(unk, potential, period, shoot_tol, shoot_atol).as_array()

    x = warm_start.as_array()
    r = residual_vec(x)
    rnorm = float(np.linalg.norm(r))
    iterations = 0
    cond = np.nan

    for _ in range(max_iterations):
        if np.max(np.abs(r)) < 0.1 * residual_tol:
            break
        jac = np.empty((4, 4))
        for col in range(4):
            h = fd_step * max(abs(x[col]), 0.1)
            xp = x.copy()
            xp[col] += h
            jac[:, col] = (residual_vec(xp) - r) / h
        cond = float(np.linalg.cond(jac))
        if not np.isfinite(cond) or cond > 1e12:
            raise RefinementError(f"singular shooting Jacobian (condition {cond:.3e})")
        try:
            delta = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise RefinementError(f"Jacobian solve failed: {exc}") from exc

        step = 1.0
        improved = False
        for _ in range(20):
            try:
                r_try = residual_vec(x + step * delta)
            except (ValueError, RuntimeError, CollisionError):
                # trial left the admissible region or was unintegrable
                step *= 0.5
                continue
            if float(np.linalg.norm(r_try)) < rnorm:
                improved = True
                break
            step *= 0.5
        if not improved:
            if np.max(np.abs(r)) < residual_tol:
                break  # stagnated inside tolerance: done
            raise RefinementError(
                f"shooting iteration stagnated at residual {rnorm:.3e}")
        x = x + step * delta
        r = r_try
        rnorm = float(np.linalg.norm(r))
        iterations += 1

    if np.max(np.abs(r)) >= residual_tol:
        raise RefinementError(
            f"no convergence after {max_iterations} iterations "
            f"(max residual {np.max(np.abs(r)):.3e})")

    unknowns = ShootingUnknowns.from_array(x)
    if project_angular_momentum:
        projected = unknowns.with_zero_angular_momentum()
        r_proj = residual_vec(projected.as_array())
        if np.max(np.abs(r_proj)) < residual_tol:
            unknowns = projected
            r = r_proj
            rnorm = float(np.linalg.norm(r))

    traj = _shoot_trajectory(unknowns, potential, period, shoot_tol, shoot_atol, n_samples)
    return RefineResult(unknowns=unknowns, trajectory=traj,
                        residuals=_residuals_from(traj), residual_norm=rnorm,
                        iterations=iterations, jacobian_condition=cond)


# --- full-orbit reconstruction ---------------------------------------------
#
# The s symmetry advances time by T/6 while reflecting across the y-axis and
# cycling the labels: Q(t + T/6) = R_y (q3, q1, q2)(t).  Time reversal sigma
# maps Q(t) = (-q1, -q3, -q2)(-t) with velocities (v1, v3, v2)(-t).  Together
# they tile the period from the fundamental domain, with 12 seams (6 Euler
# instants at t = m T/6, 6 isosceles instants at t = m T/6 + T/12).

_S_PERM = np.array([2, 0, 1])       # new body i is old body _S_PERM[i]
_SIGMA_PERM = np.array([0, 2, 1])


def _branch(t: float, period: float):
    """Decompose t = t0 + m*T/6 with t0 in [-T/12, T/12)."""
    block = period / 6.0
    m = int(np.floor((t + period / 12.0) / block))
    t0 = t - m * block
    return t0, m % 6


def _eval_chart(fund: Trajectory, t0: float, m: int, sigma: bool):
    """(positions, velocities) at global time t0 + m*T/6, with the sigma flag
    selecting the time-reversed chart (needed on seams where t0 = 0 or
    |t0| = T/12 belongs to both charts)."""
    if not sigma:
        y = fund.dense(t0)
        pos = y[:6].reshape(3, 2).copy()
        vel = y[6:].reshape(3, 2).copy()
    else:
        y = fund.dense(-t0)
        pos = -y[:6].reshape(3, 2)[_SIGMA_PERM]
        vel = y[6:].reshape(3, 2)[_SIGMA_PERM].copy()
    perm = np.arange(3)
    for _ in range(m % 3):
        perm = perm[_S_PERM]
    pos = pos[perm]
    vel = vel[perm]
    if m % 2 == 1:
        pos = pos * np.array([-1.0, 1.0])
        vel = vel * np.array([-1.0, 1.0])
    return pos, vel


def orbit_state(fund: Trajectory, t) -> tuple[np.ndarray, np.ndarray]:
    """(positions, velocities) of the full orbit at arbitrary times t
    (scalar or array), shapes (..., 3, 2)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    pos = np.empty((ts.size, 3, 2))
    vel = np.empty((ts.size, 3, 2))
    period = -12.0 * fund.t0
    for idx, tv in enumerate(ts.ravel()):
        t0, m = _branch(float(tv), period)
        pos[idx], vel[idx] = _eval_chart(fund, t0, m, sigma=t0 > 0.0)
    if np.isscalar(t) or np.asarray(t).ndim == 0:
        return pos[0], vel[0]
    return pos.reshape(np.asarray(t).shape + (3, 2)), vel.reshape(np.asarray(t).shape + (3, 2))


def seam_mismatches(fund: Trajectory) -> np.ndarray:
    """Position/velocity jumps at the 12 symmetry seams of one period."""
    period = -12.0 * fund.t0
    q = period / 12.0
    gaps = np.empty(12)
    for m in range(6):
        # Euler seam at m*T/6: direct chart meets the sigma chart at t0 = 0
        left = _eval_chart(fund, 0.0, m, sigma=False)
        right = _eval_chart(fund, 0.0, m, sigma=True)
        gaps[2 * m] = _chart_gap(left, right)
        # isosceles seam at m*T/6 + T/12: sigma chart of block m at t0 = T/12
        # meets the direct chart of block m+1 at t0 = -T/12
        left = _eval_chart(fund, q, m, sigma=True)
        right = _eval_chart(fund, -q, (m + 1) % 6, sigma=False)
        gaps[2 * m + 1] = _chart_gap(left, right)
    return gaps


def _chart_gap(a, b) -> float:
    return max(float(np.max(np.abs(a[0] - b[0]))),
               float(np.max(np.abs(a[1] - b[1]))))


def reconstruct_full_orbit(fund: Trajectory, n_samples: int = 3072,
                           seam_tol: float = 1e-9) -> Trajectory:
    """Tile the refined fundamental domain over one full period [0, T).

    Returns a Trajectory sampled uniformly on [0, T) whose dense callable
    understands any t.  Raises SeamError if any of the 12 seams is
    discontinuous beyond seam_tol.
    """
    period = -12.0 * fund.t0
    gaps = seam_mismatches(fund)
    if np.max(gaps) > seam_tol:
        raise SeamError(
            f"symmetry seam mismatch {np.max(gaps):.3e} exceeds {seam_tol:.1e}; "
            "refine the solution further before reconstructing")

    times = np.arange(n_samples) * (period / n_samples)
    pos, vel = orbit_state(fund, times)
    acc, ell, kappa, dist = derived_quantities(pos, vel, fund.potential)

    def dense(t):
        p, v = orbit_state(fund, t)
        flat = np.concatenate([np.asarray(p).reshape(-1, 6),
                               np.asarray(v).reshape(-1, 6)], axis=-1)
        return flat[0] if np.asarray(t).ndim == 0 else flat.T

    return Trajectory(times=times, positions=pos, velocities=vel,
                      accelerations=acc, angular_momenta=ell, curvatures=kappa,
                      distances=dist, potential=fund.potential, dense=dense)


# --- persistence -------------------------------------------------------------

def save_refined(result: RefineResult, potential: PotentialSpec, period: float,
                 path) -> None:
    payload = {
        "potential_exponent": potential.exponent,
        "T": period,
        "unknowns": {
            "x2_start": result.unknowns.x2_start,
            "y3_start": result.unknowns.y3_start,
            "u_start": result.unknowns.u_start,
            "w_start": result.unknowns.w_start,
        },
        "residual_norm": result.residual_norm,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")


def load_refined(path):
    """(unknowns, potential, period, residual_norm) from a refined JSON file."""
    with open(path) as fh:
        payload = json.load(fh)
    unk = ShootingUnknowns(**payload["unknowns"])
    return unk, PotentialSpec(payload["potential_exponent"]), payload["T"], payload["residual_norm"]
