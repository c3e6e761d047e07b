"""Three-body dynamics for the power-law potential family, monitored
quantities, and a high-accuracy adaptive integrator with dense output.

Conventions: three equal unit masses in the plane.  The pair potential is
f(r) = r^a / a, so V = (r12^a + r23^a + r31^a) / a and a = -1 recovers the
attractive Newtonian -sum(1/r_ij).  Accelerations are
q_i'' = sum_{j != i} (q_j - q_i) * r_ij^(a-2).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from figure_eight import kernels

DEFAULT_COLLISION_FLOOR = 1e-8


class CollisionError(RuntimeError):
    """A pairwise distance fell below the collision floor."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


@dataclass(frozen=True)
class PotentialSpec:
    """Power-law pair potential f(r) = r^exponent / exponent.

    exponent = 0 is rejected (the family is undefined there); exponent = -2
    is constructible but flagged scaling-degenerate, and the solver layers
    refuse it.
    """

    exponent: float

    def __post_init__(self):
        if self.exponent == 0.0:
            raise ValueError("potential exponent must be nonzero")

    @property
    def is_scaling_degenerate(self) -> bool:
        return self.exponent == -2.0

    def pair_energy(self, r):
        return r**self.exponent / self.exponent


NEWTONIAN = PotentialSpec(-1.0)


@dataclass(frozen=True)
class PhaseState:
    """Positions and velocities of the three bodies at one instant.

    positions/velocities have shape (3, 2).  Center of mass and total
    momentum are monitored by the verifier, not enforced here.
    """

    positions: np.ndarray
    velocities: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        pos = np.array(self.positions, dtype=float)
        vel = np.array(self.velocities, dtype=float)
        if pos.shape != (3, 2) or vel.shape != (3, 2):
            raise ValueError("positions and velocities must have shape (3, 2)")
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(vel))):
            raise ValueError("non-finite phase state")
        pos.flags.writeable = False
        vel.flags.writeable = False
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "velocities", vel)

    def flat(self) -> np.ndarray:
        """State as [x1,y1,...,x3,y3, vx1,vy1,...,vx3,vy3]."""
        return np.concatenate([self.positions.ravel(), self.velocities.ravel()])

    @classmethod
    def from_flat(cls, y, time=0.0) -> "PhaseState":
        y = np.asarray(y, dtype=float)
        return cls(y[:6].reshape(3, 2), y[6:].reshape(3, 2), time)


def pairwise_distances(state: PhaseState | np.ndarray):
    """(r12, r23, r31) for a PhaseState or a (3, 2) position array."""
    pos = state.positions if isinstance(state, PhaseState) else np.asarray(state, dtype=float)
    r12 = np.linalg.norm(pos[0] - pos[1])
    r23 = np.linalg.norm(pos[1] - pos[2])
    r31 = np.linalg.norm(pos[2] - pos[0])
    return float(r12), float(r23), float(r31)


def _check_collision(pos, floor, time=None):
    rmin = kernels.min_pair_distance(np.asarray(pos, dtype=float).ravel())
    if rmin < floor:
        raise CollisionError(
            f"pairwise distance {rmin:.3e} below collision floor {floor:.1e}"
            + ("" if time is None else f" at t={time:.6g}"),
            time=time,
        )


def accelerations(positions, potential: PotentialSpec,
                  collision_floor: float = DEFAULT_COLLISION_FLOOR) -> np.ndarray:
    """Accelerations of the three unit masses, shape (3, 2).

    Also accepts a batch (..., 3, 2) and returns the same shape.
    """
    pos = np.asarray(positions, dtype=float)
    if pos.shape == (3, 2):
        _check_collision(pos, collision_floor)
        return kernels.accel(pos.ravel(), potential.exponent).reshape(3, 2)
    flat = pos.reshape(-1, 6)
    rmin = min(kernels.min_pair_distance(row) for row in flat)
    if rmin < collision_floor:
        raise CollisionError(
            f"pairwise distance {rmin:.3e} below collision floor {collision_floor:.1e}")
    return kernels.accel_batch(flat, potential.exponent).reshape(pos.shape)


def energies(state: PhaseState, potential: PotentialSpec):
    """(kinetic, potential_value, total) for unit masses."""
    _check_collision(state.positions, DEFAULT_COLLISION_FLOOR, state.time)
    kinetic = 0.5 * float(np.sum(state.velocities**2))
    pot = float(sum(potential.pair_energy(r) for r in pairwise_distances(state)))
    return kinetic, pot, kinetic + pot


def angular_momenta(state: PhaseState):
    """(l1, l2, l3, l_total) with l_j = q_j ^ v_j."""
    q, v = state.positions, state.velocities
    ells = q[:, 0] * v[:, 1] - q[:, 1] * v[:, 0]
    return float(ells[0]), float(ells[1]), float(ells[2]), float(np.sum(ells))


def torque(state: PhaseState, potential: PotentialSpec, body: int,
           com_tol: float = 1e-9) -> float:
    """d(l_body)/dt from the closed form
    (r_ij^(a-2) - r_ik^(a-2)) * (q1 ^ q2), valid for zero center of mass.

    body is 1-based.  The identity behind it needs q1+q2+q3 = 0, so a
    violation beyond com_tol (relative to configuration size) is an error.
    """
    q = state.positions
    scale = max(float(np.max(np.abs(q))), 1e-300)
    com = np.linalg.norm(q.sum(axis=0))
    if com > com_tol * 3.0 * scale:
        raise ValueError(f"torque formula requires zero center of mass (|sum q| = {com:.3e})")
    r12, r23, r31 = pairwise_distances(state)
    _check_collision(q, DEFAULT_COLLISION_FLOOR, state.time)
    w12 = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
    e = potential.exponent - 2.0
    if body == 1:
        bracket = r12**e - r31**e
    elif body == 2:
        bracket = r23**e - r12**e
    elif body == 3:
        bracket = r31**e - r23**e
    else:
        raise ValueError("body must be 1, 2 or 3")
    return float(bracket * w12)


def torque_body3(state: PhaseState, potential: PotentialSpec) -> float:
    """d(l3)/dt = (r13^(a-2) - r23^(a-2)) * (q1 ^ q2); a = -1 gives the
    (1/r13^3 - 1/r23^3) * (q1 ^ q2) form."""
    return torque(state, potential, 3)


@dataclass
class IntegrateOptions:
    """Controls for the adaptive integrator (DOP853, order 8, dense output)."""

    tol: float = 1e-12            # relative local error per step
    atol: float = 1e-12
    n_samples: int = 512          # uniform samples cached on the trajectory
    sample_times: np.ndarray | None = None
    collision_floor: float = DEFAULT_COLLISION_FLOOR
    max_step: float = np.inf


@dataclass(frozen=True)
class Trajectory:
    """Densely sampled solution with cached derived quantities.

    Immutable after construction; `dense` is an interpolant (t -> flat state,
    vectorized over t) accurate to the integration tolerance.
    """

    times: np.ndarray             # (n,), strictly monotone
    positions: np.ndarray         # (n, 3, 2)
    velocities: np.ndarray        # (n, 3, 2)
    accelerations: np.ndarray     # (n, 3, 2)
    angular_momenta: np.ndarray   # (n, 3)
    curvatures: np.ndarray        # (n, 3)
    distances: np.ndarray         # (n, 3) = (r12, r23, r31)
    potential: PotentialSpec
    dense: object = field(repr=False)

    def __post_init__(self):
        for name in ("times", "positions", "velocities", "accelerations",
                     "angular_momenta", "curvatures", "distances"):
            arr = np.asarray(getattr(self, name))
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    def state_at(self, t: float) -> PhaseState:
        return PhaseState.from_flat(self.dense(t), time=t)

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t1(self) -> float:
        return float(self.times[-1])

    def to_csv(self, path) -> None:
        """Export samples; one row per time, header as documented in README."""
        header = (["t"]
                  + [f"{q}{i}" for q in ("x", "y") for i in (1, 2, 3)]
                  + [f"{q}{i}" for q in ("vx", "vy") for i in (1, 2, 3)]
                  + [f"{q}{i}" for q in ("ax", "ay") for i in (1, 2, 3)]
                  + [f"l{i}" for i in (1, 2, 3)]
                  + [f"k{i}" for i in (1, 2, 3)]
                  + ["r12", "r23", "r31"])
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for k in range(len(self.times)):
                row = [self.times[k]]
                for arr in (self.positions, self.velocities, self.accelerations):
                    row += list(arr[k, :, 0]) + list(arr[k, :, 1])
                row += list(self.angular_momenta[k])
                row += list(self.curvatures[k])
                row += list(self.distances[k])
                writer.writerow([repr(float(v)) for v in row])


def derived_quantities(positions, velocities, potential: PotentialSpec,
                       collision_floor: float = DEFAULT_COLLISION_FLOOR):
    """(accelerations, angular momenta, curvatures, distances) for sample
    batches of shape (n, 3, 2)."""
    pos = np.asarray(positions, dtype=float)
    vel = np.asarray(velocities, dtype=float)
    acc = accelerations(pos, potential, collision_floor)
    ell = pos[..., 0] * vel[..., 1] - pos[..., 1] * vel[..., 0]
    speed3 = np.sum(vel**2, axis=-1) ** 1.5
    with np.errstate(divide="ignore", invalid="ignore"):
        # curvature is undefined (nan) at zero-speed samples
        kappa = (vel[..., 0] * acc[..., 1] - vel[..., 1] * acc[..., 0]) / speed3
    d12 = np.linalg.norm(pos[..., 0, :] - pos[..., 1, :], axis=-1)
    d23 = np.linalg.norm(pos[..., 1, :] - pos[..., 2, :], axis=-1)
    d31 = np.linalg.norm(pos[..., 2, :] - pos[..., 0, :], axis=-1)
    dist = np.stack([d12, d23, d31], axis=-1)
    return acc, ell, kappa, dist


def integrate(initial: PhaseState, potential: PotentialSpec, t_end: float,
              opts: IntegrateOptions | None = None) -> Trajectory:
    """Integrate Newton's equations from initial.time to t_end.

    Adaptive DOP853 with dense output; raises CollisionError if any pairwise
    distance reaches the collision floor, RuntimeError on step-size underflow.
    """
    opts = opts or IntegrateOptions()
    t0 = initial.time
    if t_end == t0:
        raise ValueError("empty integration interval")
    a_exp = potential.exponent

    def f(t, y):
        return kernels.rhs(t, y, a_exp)

    def collision_event(t, y):
        return kernels.min_pair_distance(y[:6]) - opts.collision_floor

    collision_event.terminal = True

    if opts.sample_times is not None:
        t_eval = np.asarray(opts.sample_times, dtype=float)
    else:
        t_eval = np.linspace(t0, t_end, opts.n_samples)

    try:
        sol = solve_ivp(f, (t0, t_end), initial.flat(), method="DOP853",
                        rtol=opts.tol, atol=opts.atol, dense_output=True,
                        t_eval=t_eval, events=collision_event, max_step=opts.max_step)
    except ValueError as exc:
        # scipy's dense output rejects degenerate step sequences (e.g. a
        # terminal event inside the very first step of a violent encounter)
        raise RuntimeError(f"integration failed: {exc}") from exc
    if sol.status == 1:  # terminated by the collision event
        t_c = float(sol.t_events[0][0])
        raise CollisionError(f"collision detected at t={t_c:.6g}", time=t_c)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")

    times = sol.t
    states = sol.y.T  # (n, 12)
    if times.size > 1 and times[1] < times[0]:
        # backward integration: keep the samples in increasing time order
        times = times[::-1].copy()
        states = states[::-1]
    pos = states[:, :6].reshape(-1, 3, 2)
    vel = states[:, 6:].reshape(-1, 3, 2)
    acc, ell, kappa, dist = derived_quantities(pos, vel, potential, opts.collision_floor)

    dense = sol.sol
    return Trajectory(times=times, positions=pos, velocities=vel,
                      accelerations=acc, angular_momenta=ell, curvatures=kappa,
                      distances=dist, potential=potential, dense=dense)
