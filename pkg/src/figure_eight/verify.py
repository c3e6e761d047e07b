"""Numerical certification of the orbit's stated geometric properties,
culminating in the convexity of each lobe.

Every check returns a CheckResult whose worst_margin is signed so that
positive means satisfied; margins are evaluated on dense samples of the open
fundamental interval, with samples within an endpoint window treated as
endpoint samples (several quantities legitimately vanish exactly at the
endpoints: l1 and kappa1 at the Euler time, the x-velocity of body 2 at the
isosceles time).  Raw sample margins are reduced by a local Lipschitz
uncertainty estimated from neighboring samples, so a pass is honest about
resolution without interval arithmetic.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from figure_eight import geometry
from figure_eight.dynamics import (CollisionError, IntegrateOptions, PhaseState,
                                   PotentialSpec, Trajectory, accelerations,
                                   derived_quantities, integrate)
from figure_eight.geometry import Line2, SplitResult, Vec2
from figure_eight.refine import orbit_state

COM_TOL = 1e-9
ORIENTATION_EQ_TOL = 1e-9
ENDPOINT_RELATION_TOL = 1e-9
IDENTITY_RTOL = 1e-8
TANGENT_RTOL = 1e-7


def _wedge(u, v):
    """Vectorized planar wedge u_x v_y - u_y v_x over (..., 2) arrays."""
    u = np.asarray(u)
    v = np.asarray(v)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass
class VerifyOptions:
    samples: int = 2048
    endpoint_window: float = 1e-4       # fraction of the period
    sign_window: float = 5e-4           # wider window for strict-sign margins
    tangent_samples: int = 512
    synthetic_triples: int = 50
    synthetic_solutions: int = 100
    synthetic_window: float = 3.0       # time span of each random solution
    seed: int = 0


@dataclass
class CheckResult:
    name: str
    passed: bool
    worst_margin: float
    worst_time: float
    detail: str


@dataclass
class VerificationReport:
    exponent: float
    gauge: dict
    sampling_resolution: int
    checks: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {
            "gauge": self.gauge,
            "exponent": self.exponent,
            "sampling_resolution": self.sampling_resolution,
            "checks": [
                {"name": c.name, "passed": bool(c.passed),
                 "worst_margin": float(c.worst_margin),
                 "worst_time": (float(c.worst_time)
                                if np.isfinite(c.worst_time) else None),
                 "detail": c.detail}
                for c in self.checks
            ],
        }

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    def table(self) -> str:
        width = max(len(c.name) for c in self.checks)
        lines = [f"verification report  (a = {self.exponent}, T = {self.gauge['T']}, "
                 f"{self.sampling_resolution} samples)"]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(f"  {c.name:<{width}}  {status}  margin={c.worst_margin: .3e}"
                         f"  at t={c.worst_time: .6f}  {c.detail}")
        verdict = "ALL CHECKS PASSED" if self.all_passed else "CHECKS FAILED"
        lines.append(f"  -> {verdict}")
        return "\n".join(lines)


# --- shared sampled data -----------------------------------------------------

@dataclass
class _Sampled:
    """Dense samples of the fundamental domain and the reconstructed curve."""

    t: np.ndarray            # all sample times over [t0, t1]
    interior: np.ndarray     # mask: outside the endpoint windows
    sign_interior: np.ndarray  # wider mask for strict-sign margins (many of
                               # those quantities vanish exactly at an endpoint)
    pos: np.ndarray          # (n, 3, 2)
    vel: np.ndarray
    acc: np.ndarray
    ell: np.ndarray          # (n, 3)
    elldot: np.ndarray       # (n, 3) torque closed form
    kappa: np.ndarray        # (n, 3)
    dist: np.ndarray         # (n, 3) = (r12, r23, r31)
    wedges: np.ndarray       # (n, 3) = (q1^q2, q2^q3, q3^q1)
    period: float
    curve_t: np.ndarray      # full-period curve samples
    curve_pos: np.ndarray    # (m, 2)
    curve_vel: np.ndarray
    curve_kappa: np.ndarray


def _sample(fund: Trajectory, full: Trajectory, potential: PotentialSpec,
            opts: VerifyOptions) -> _Sampled:
    period = 12.0 * (fund.t1 - fund.t0)
    n = opts.samples
    t = np.linspace(fund.t0, fund.t1, n)
    window = opts.endpoint_window * period
    interior = (t - fund.t0 > window) & (fund.t1 - t > window)
    sign_window = opts.sign_window * period
    sign_interior = (t - fund.t0 > sign_window) & (fund.t1 - t > sign_window)

    y = fund.dense(t)
    pos = y[:6].T.reshape(-1, 3, 2)
    vel = y[6:].T.reshape(-1, 3, 2)
    acc, ell, kappa, dist = derived_quantities(pos, vel, potential)

    w12 = _wedge(pos[:, 0], pos[:, 1])
    w23 = _wedge(pos[:, 1], pos[:, 2])
    w31 = _wedge(pos[:, 2], pos[:, 0])
    wedges = np.stack([w12, w23, w31], axis=1)

    e = potential.exponent - 2.0
    r12, r23, r31 = dist[:, 0], dist[:, 1], dist[:, 2]
    elldot = np.stack([
        (r12**e - r31**e) * w12,
        (r23**e - r12**e) * w12,
        (r31**e - r23**e) * w12,
    ], axis=1)

    return _Sampled(t=t, interior=interior, sign_interior=sign_interior,
                    pos=pos, vel=vel, acc=acc, ell=ell,
                    elldot=elldot, kappa=kappa, dist=dist, wedges=wedges,
                    period=period,
                    curve_t=full.times, curve_pos=full.positions[:, 0],
                    curve_vel=full.velocities[:, 0],
                    curve_kappa=full.curvatures[:, 0])


def _worst(times, values):
    """(margin, time): minimum sampled value reduced by a local Lipschitz
    uncertainty from neighboring samples."""
    values = np.asarray(values, dtype=float)
    k = int(np.argmin(values))
    lo, hi = max(k - 2, 0), min(k + 3, values.size)
    local = values[lo:hi]
    uncertainty = 0.5 * float(np.max(np.abs(np.diff(local)))) if local.size > 1 else 0.0
    return float(values[k] - uncertainty), float(np.asarray(times)[k])


def _combine(*parts):
    """Minimum of (margin, time) pairs."""
    margin, time = min(parts, key=lambda p: p[0])
    return float(margin), float(time)


# --- individual checks -------------------------------------------------------

def check_center_of_mass(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    dev_fund = np.linalg.norm(data.pos.sum(axis=1), axis=1)
    full_pos, _ = _full_arrays(full)
    dev_full = np.linalg.norm(full_pos.sum(axis=1), axis=1)
    m1 = _worst(data.t, COM_TOL - dev_fund)
    m2 = _worst(full.times, COM_TOL - dev_full)
    margin, t_worst = _combine(m1, m2)
    return CheckResult("center_of_mass", margin > 0, margin, t_worst,
                       f"max |q1+q2+q3| = {max(dev_fund.max(), dev_full.max()):.3e} "
                       f"(tolerance {COM_TOL:.0e})")


def _full_arrays(full: Trajectory):
    return full.positions, full.velocities


def check_quadrants(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    x, y = data.pos[i, :, 0], data.pos[i, :, 1]
    coords = np.stack([x[:, 0], -y[:, 0],      # body 1 in quadrant 4
                       -x[:, 1], -y[:, 1],     # body 2 in quadrant 3
                       x[:, 2], y[:, 2]], axis=1)  # body 3 in quadrant 1
    margin, t_worst = _worst(data.t[i], coords.min(axis=1))
    return CheckResult("quadrants", margin > 0, margin, t_worst,
                       "bodies 1/2/3 confined to quadrants 4/3/1 on the open interval")


def check_distance_ordering(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    r12, r23, r31 = data.dist[i, 0], data.dist[i, 1], data.dist[i, 2]
    gaps = np.minimum(r12 - r31, r23 - r12)   # r13 < r12 < r23
    margin, t_worst = _worst(data.t[i], gaps)
    return CheckResult("distance_ordering", margin > 0, margin, t_worst,
                       "r13 < r12 < r23 strictly on the open interval")


def check_orientation(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.interior
    eq_dev = np.max(np.abs(data.wedges[i] - data.wedges[i][:, [0]]), axis=1)
    m_eq = _worst(data.t[i], ORIENTATION_EQ_TOL - eq_dev)
    s_i = data.sign_interior
    m_sign = _worst(data.t[s_i], -data.wedges[s_i].max(axis=1))
    margin, t_worst = _combine(m_eq, m_sign)
    return CheckResult("orientation", margin > 0, margin, t_worst,
                       f"q1^q2 = q2^q3 = q3^q1 < 0; max equality dev {eq_dev.max():.3e}")


def check_angular_momentum(fund, full, potential, opts=None, data=None) -> CheckResult:
    opts = opts or VerifyOptions()
    data = data or _sample(fund, full, potential, opts)
    i = data.sign_interior
    t_i = data.t[i]
    parts = [
        _worst(t_i, -data.ell[i, 0]),      # l1 < 0
        _worst(t_i, data.ell[i, 1]),       # l2 > 0
        _worst(t_i, -data.ell[i, 2]),      # l3 < 0
        _worst(t_i, data.elldot[i, 0]),    # dl1/dt > 0
        _worst(t_i, data.elldot[i, 1]),    # dl2/dt > 0
        _worst(t_i, -data.elldot[i, 2]),   # dl3/dt < 0
    ]
    # endpoint relation at the isosceles time: l1s = l3s = -l2s/2 < 0
    ell_s = data.ell[0]
    devs = max(abs(ell_s[0] - ell_s[2]), abs(ell_s[0] + 0.5 * ell_s[1]))
    parts.append((ENDPOINT_RELATION_TOL - devs, data.t[0]))
    parts.append((-ell_s[0], data.t[0]))
    # right lobe of the curve: l = q ^ qdot < 0 where x > 0
    ell_curve = _wedge(data.curve_pos, data.curve_vel)
    lobe = _lobe_mask(data, right=True)
    parts.append(_worst(data.curve_t[lobe], -ell_curve[lobe]))
    margin, t_worst = _combine(*parts)
    return CheckResult("angular_momentum", margin > 0, margin, t_worst,
                       "signs of l_j and dl_j/dt, isosceles endpoint relation "
                       "l1s = l3s = -l2s/2 < 0, and l < 0 on the right lobe")


def _lobe_mask(data: _Sampled, right: bool) -> np.ndarray:
    """Samples of the reconstructed curve on one lobe, windowed away from the
    origin crossings at t = 0 and t = T/2 (where the curve's angular momentum
    vanishes quadratically with the crossing distance)."""
    period = data.period
    window = 5e-3 * period
    t = data.curve_t
    if right:
        lo, hi = period / 2.0 + window, period - window
    else:
        lo, hi = window, period / 2.0 - window
    return (t > lo) & (t < hi)


def _true_runs(mask: np.ndarray) -> list[slice]:
    """Contiguous runs of True samples."""
    runs = []
    start = None
    for k, flag in enumerate(np.append(mask, False)):
        if flag and start is None:
            start = k
        elif not flag and start is not None:
            runs.append(slice(start, k))
            start = None
    return runs


def _longest_run(mask: np.ndarray) -> slice:
    """Longest contiguous run of True samples."""
    runs = _true_runs(mask)
    if not runs:
        return slice(0, 0)
    return max(runs, key=lambda r: r.stop - r.start)


def check_star_shaped(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    x = data.curve_pos[:, 0]
    run = _longest_run(x > 1e-6 * float(np.max(np.abs(x))))  # the right lobe
    t = data.curve_t[run]
    # window the lobe ends in time (the origin crossings, where l vanishes)
    w = 5e-3 * data.period
    keep = (t - t[0] > w) & (t[-1] - t > w)
    if not np.any(keep):
        keep = np.ones_like(t, dtype=bool)
    t = t[keep]
    q = data.curve_pos[run][keep]
    qd = data.curve_vel[run][keep]
    ell = _wedge(q, qd)
    m_ell = _worst(t, np.abs(ell))                # l bounded away from 0
    theta = np.unwrap(np.arctan2(q[:, 1], q[:, 0]))
    dtheta = np.diff(theta)
    direction = np.sign(np.median(ell))           # sign of theta-dot = sign of l
    m_mono = _worst(t[1:], direction * dtheta / np.diff(t))  # strictly monotone
    tv = float(np.sum(np.abs(dtheta)))
    m_tv = (2.0 * np.pi - tv, t[0])
    margin, t_worst = _combine(m_ell, m_mono, m_tv)
    return CheckResult("star_shaped", margin > 0, margin, t_worst,
                       f"right lobe (x > 0): l bounded away from 0, theta "
                       f"monotone, total variation {tv:.4f} < 2*pi")


def check_convexity(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    t_i = data.t[i]
    m1 = _worst(t_i, -data.kappa[i, 0])   # kappa1 < 0 away from t = 0
    m2 = _worst(t_i, data.kappa[i, 1])    # kappa2 > 0
    m3 = _worst(t_i, -data.kappa[i, 2])   # kappa3 < 0
    # global statement on the reconstructed curve: no vanishing curvature on
    # either lobe away from the self-intersection
    left = _lobe_mask(data, right=False)
    right = _lobe_mask(data, right=True)
    m_left = _worst(data.curve_t[left], data.curve_kappa[left])
    m_right = _worst(data.curve_t[right], -data.curve_kappa[right])
    margin, t_worst = _combine(m1, m2, m3, m_left, m_right)
    detail = (f"min|kappa|: arc1 {np.min(np.abs(data.kappa[i, 0])):.3e}, "
              f"arc2 {np.min(np.abs(data.kappa[i, 1])):.3e}, "
              f"arc3 {np.min(np.abs(data.kappa[i, 2])):.3e}; "
              "kappa1<0 (to 0 only at t=0), kappa2>0, kappa3<0, lobes convex")
    return CheckResult("convexity", margin > 0, margin, t_worst, detail)


def check_arc1_auxiliary(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    s_i = data.sign_interior
    m_vel = _worst(data.t[s_i], data.vel[s_i, 0, 1])
    m_acc = _worst(data.t[s_i], data.acc[s_i, 0, 1])
    # identity: dl1/dt * ydot1 - l1 * yacc1 = y1 * v1^3 * kappa1
    i = data.interior
    t_i = data.t[i]
    lhs = data.elldot[i, 0] * data.vel[i, 0, 1] - data.ell[i, 0] * data.acc[i, 0, 1]
    speed1 = np.linalg.norm(data.vel[i, 0], axis=1)
    rhs = data.pos[i, 0, 1] * speed1**3 * data.kappa[i, 0]
    rel = np.abs(lhs - rhs) / np.maximum(np.abs(rhs), 1e-30)
    m_id = _worst(t_i, IDENTITY_RTOL - rel)
    margin, t_worst = _combine(m_vel, m_acc, m_id)
    return CheckResult("arc1_auxiliary", margin > 0, margin, t_worst,
                       "ydot1 > 0 and yddot1 > 0 on arc 1; angular-momentum "
                       f"expansion identity holds to {rel.max():.2e} relative")


def check_arc2_gauss_map(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    m_acc = _worst(data.t, data.acc[:, 1, 0])        # xddot2 > 0 on the closed arc
    m_vel = _worst(data.t[i], data.vel[i, 1, 0])     # xdot2 > 0 on the open arc
    phi = np.unwrap(np.arctan2(data.vel[i, 1, 1], data.vel[i, 1, 0]))
    m_ccw = _worst(data.t[i][1:], np.diff(phi) / np.diff(data.t[i]))
    margin, t_worst = _combine(m_acc, m_vel, m_ccw)
    return CheckResult("arc2_gauss_map", margin > 0, margin, t_worst,
                       "xddot2 > 0 on the entire arc, xdot2 > 0 on the open arc, "
                       "unit tangent rotates monotonically counterclockwise")


def _tangent_lines(pos, vel):
    return [Line2(Vec2(*pos[j]), Vec2(*vel[j])) for j in range(3)]


def check_three_tangents(fund, full, potential, opts=None, data=None) -> CheckResult:
    opts = opts or VerifyOptions()
    data = data or _sample(fund, full, potential, opts)
    i = np.nonzero(data.interior)[0]
    idx = i[np.linspace(0, i.size - 1, min(opts.tangent_samples, i.size)).astype(int)]
    rel = np.empty(idx.size)
    for out, k in enumerate(idx):
        lines = _tangent_lines(data.pos[k], data.vel[k])
        resid = geometry.concurrency_residual(*lines)
        rel[out] = resid / np.max(data.dist[k])
    m_eight = _worst(data.t[idx], TANGENT_RTOL - rel)

    parts = [m_eight]
    n_triples = opts.synthetic_triples
    if n_triples > 0:
        rng = np.random.default_rng(opts.seed + 1)
        worst_syn = -np.inf
        for _ in range(n_triples):
            pos, vel = synthetic_tangent_triple(rng)
            lines = _tangent_lines(pos, vel)
            resid = geometry.concurrency_residual(*lines)
            scale = max(np.linalg.norm(pos[a] - pos[b])
                        for a, b in ((0, 1), (1, 2), (2, 0)))
            worst_syn = max(worst_syn, resid / scale)
        parts.append((TANGENT_RTOL - worst_syn, np.nan))
    margin, t_worst = _combine(*parts)
    detail = (f"max residual/diameter {rel.max():.2e} on {idx.size} samples"
              + (f"; {n_triples} synthetic zero-momentum triples" if n_triples else ""))
    return CheckResult("three_tangents", margin > 0, margin, t_worst, detail)


def synthetic_tangent_triple(rng):
    """Random instantaneous triple with zero total linear and angular momentum.

    Take random centered positions and velocities with zero sum, then add the
    rotational velocity shear phi_dot * J q_i with phi_dot = -L / sum |q_i|^2,
    which cancels the total angular momentum without touching the linear one.
    """
    while True:
        pos = rng.normal(size=(3, 2))
        pos -= pos.mean(axis=0)
        vel = rng.normal(size=(3, 2))
        vel -= vel.mean(axis=0)
        if min(np.linalg.norm(pos[a] - pos[b]) for a, b in ((0, 1), (1, 2), (2, 0))) < 0.3:
            continue
        ell = float(np.sum(_wedge(pos, vel)))
        size2 = float(np.sum(pos**2))
        phidot = -ell / size2
        vel = vel + phidot * np.stack([-pos[:, 1], pos[:, 0]], axis=1)
        if np.min(np.linalg.norm(vel, axis=1)) > 1e-3:
            return pos, vel


def check_splitting_lemma(fund, full, potential, opts=None, data=None) -> CheckResult:
    """Monte-Carlo check of the inflection splitting property on random
    (non-eight) solutions: at every detected inflection instant the tangent
    line either splits the other two bodies or all three are collinear."""
    opts = opts or VerifyOptions()
    rng = np.random.default_rng(opts.seed + 2)
    n_inflections = 0
    worst = np.inf
    worst_t = np.nan
    counterexamples = 0
    solutions = 0
    attempts = 0
    while solutions < opts.synthetic_solutions and attempts < 20 * opts.synthetic_solutions:
        attempts += 1
        traj = random_solution(rng, potential, opts.synthetic_window)
        if traj is None:
            continue
        solutions += 1
        for body in range(3):
            for t_star in detect_inflections(traj, body):
                q, v = _state_arrays(traj, t_star)
                speed = np.linalg.norm(v[body])
                scale = max(np.linalg.norm(q[a] - q[b])
                            for a, b in ((0, 1), (1, 2), (2, 0)))
                if speed < 1e-6 * scale:
                    continue  # lemma requires nonzero speed
                n_inflections += 1
                line = Line2(Vec2(*q[body]), Vec2(*v[body]))
                others = [j for j in range(3) if j != body]
                band = 1e-7  # collinearity band, relative to configuration size
                verdict = geometry.splits(line, Vec2(*q[others[0]]),
                                          Vec2(*q[others[1]]), tol=band * scale)
                d = [geometry.signed_distance(line, Vec2(*q[j])) / scale for j in others]
                if verdict is SplitResult.ON_LINE:
                    quality = band
                elif verdict is SplitResult.SPLIT:
                    quality = min(abs(d[0]), abs(d[1]))
                else:
                    quality = -min(abs(d[0]), abs(d[1]))
                    counterexamples += 1
                if quality < worst:
                    worst = quality
                    worst_t = t_star
    margin = worst if n_inflections else 1.0
    detail = (f"{n_inflections} inflections across {solutions} random solutions, "
              f"{counterexamples} counterexamples")
    return CheckResult("splitting_lemma", counterexamples == 0 and margin > 0,
                       float(margin), float(worst_t), detail)


def _state_arrays(traj: Trajectory, t: float):
    y = traj.dense(t)
    return y[:6].reshape(3, 2), y[6:].reshape(3, 2)


def random_solution(rng, potential: PotentialSpec, window: float):
    """Integrate a random bounded-ish initial condition; None when the draw
    is unusable (immediate collision or unresolvable close encounter)."""
    for _ in range(8):
        pos = rng.uniform(-1.5, 1.5, size=(3, 2))
        pos -= pos.mean(axis=0)
        if min(np.linalg.norm(pos[a] - pos[b]) for a, b in ((0, 1), (1, 2), (2, 0))) < 0.5:
            continue
        vel = 0.4 * rng.normal(size=(3, 2))
        vel -= vel.mean(axis=0)
        state = PhaseState(pos, vel, time=0.0)
        opts = IntegrateOptions(tol=1e-10, atol=1e-12, n_samples=1024,
                                collision_floor=1e-6)
        try:
            return integrate(state, potential, window, opts)
        except CollisionError as exc:
            # keep the collision-free prefix when it is long enough
            if exc.time is not None and exc.time > 0.25 * window:
                try:
                    return integrate(state, potential, 0.9 * exc.time, opts)
                except (CollisionError, RuntimeError):
                    continue
            continue
        except RuntimeError:
            continue  # step underflow in an unresolvable encounter
    return None


def detect_inflections(traj: Trajectory, body: int, xtol: float = 1e-10):
    """Times where the body's path curvature changes sign, located by
    bisection on the dense output."""

    def kappa_at(t):
        q, v = _state_arrays(traj, t)
        acc = accelerations(q, traj.potential)
        b_v, b_a = v[body], acc[body]
        speed = np.linalg.norm(b_v)
        return (b_v[0] * b_a[1] - b_v[1] * b_a[0]) / speed**3

    kappa = traj.curvatures[:, body]
    times = traj.times
    roots = []
    sign_change = np.nonzero(np.sign(kappa[:-1]) * np.sign(kappa[1:]) < 0)[0]
    for k in sign_change:
        roots.append(float(brentq(kappa_at, times[k], times[k + 1], xtol=xtol)))
    return roots


class PropositionPreconditionError(ValueError):
    """The reference line intersects the curve: the tangent-sweep proposition
    does not apply."""


def tangent_sweep_params(curve_pos, curve_vel, m: Line2):
    """Intersection parameter P(t) of the moving tangent line with m, for
    sampled curve points; AT_INFINITY entries are returned as nan.

    Raises PropositionPreconditionError if the curve touches or crosses m.
    """
    dists = np.array([geometry.signed_distance(m, Vec2(*p)) for p in curve_pos])
    scale = float(np.max(np.abs(dists)))
    if np.min(np.abs(dists)) <= 1e-9 * max(scale, 1.0) or np.min(dists) * np.max(dists) < 0:
        raise PropositionPreconditionError("line m intersects the curve")
    out = np.empty(curve_pos.shape[0])
    for k, (p, v) in enumerate(zip(curve_pos, curve_vel)):
        val = geometry.tangent_line_intersection_param(Vec2(*p), Vec2(*v), m)
        out[k] = np.nan if val is geometry.AT_INFINITY else val
    return out


def check_convexity_proposition(fund, full, potential, opts=None, data=None) -> CheckResult:
    """Tangent lines of arc 1 sweep the chord m of arc 2 monotonically, and
    the intersection stays on the part of m in the massless quadrant."""
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    t_i = data.t[i]
    p2s = data.pos[0, 1]
    p2e = data.pos[-1, 1]
    m = Line2(Vec2(*p2s), Vec2(*(p2e - p2s)))
    try:
        params = tangent_sweep_params(data.pos[i, 0], data.vel[i, 0], m)
    except PropositionPreconditionError as exc:
        return CheckResult("convexity_proposition", False, -np.inf, np.nan, str(exc))
    finite = np.isfinite(params)
    if not np.all(finite):
        detail_par = f"{np.count_nonzero(~finite)} parallel instants windowed out; "
    else:
        detail_par = ""
    # monotonicity within each contiguous finite run: P sweeps through
    # infinity at a parallelism instant, so differences must not straddle one
    segments = [(t_i[r], params[r]) for r in _true_runs(finite)
                if r.stop - r.start >= 2]
    dpar_all = np.concatenate([np.diff(p) / np.diff(t) for t, p in segments])
    direction = np.sign(np.median(dpar_all))
    m_mono = _combine(*[_worst(t[1:], direction * np.diff(p) / np.diff(t))
                        for t, p in segments])
    # intersection point on m stays in the massless quadrant (x < 0, y > 0)
    t_f = t_i[finite]
    par = params[finite]
    dn = np.linalg.norm([m.direction.x, m.direction.y])
    ux, uy = m.direction.x / dn, m.direction.y / dn
    px = p2s[0] + par * ux
    py = p2s[1] + par * uy
    m_quad = _combine(_worst(t_f, -px), _worst(t_f, py))
    margin, t_worst = _combine(m_mono, m_quad)
    return CheckResult("convexity_proposition", margin > 0, margin, t_worst,
                       detail_par + "P(t) monotone along m and inside the "
                       "massless quadrant (x<0, y>0)")


def check_no_degenerate_times(fund, full, potential, opts=None, data=None) -> CheckResult:
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    i = data.sign_interior
    t_i = data.t[i]
    m_col = _worst(t_i, np.abs(data.wedges[i, 0]))   # |q1 ^ q2| > 0: no syzygy
    r12, r23, r31 = data.dist[i, 0], data.dist[i, 1], data.dist[i, 2]
    gaps = np.min(np.stack([np.abs(r12 - r23), np.abs(r23 - r31), np.abs(r31 - r12)]), axis=0)
    m_iso = _worst(t_i, gaps)
    margin, t_worst = _combine(m_col, m_iso)
    return CheckResult("no_degenerate_times", margin > 0, margin, t_worst,
                       "no collinear and no isosceles configuration on the "
                       "open interval (endpoints exempt)")


def check_d6_reconstruction(fund, full, potential, opts=None, data=None) -> CheckResult:
    """Continuity of the D6 tiling (12 seams), closure over one period, and
    the choreography condition; fails loudly on non-solution trajectories."""
    from figure_eight.refine import seam_mismatches
    data = data or _sample(fund, full, potential, opts or VerifyOptions())
    period = data.period
    gaps = seam_mismatches(fund)
    p0, v0 = orbit_state(fund, 0.0)
    pT, vT = orbit_state(fund, period)
    closure = max(float(np.max(np.abs(pT - p0))), float(np.max(np.abs(vT - v0))))
    ts = np.linspace(0.1 * period, 0.9 * period, 64)
    pos, _ = orbit_state(fund, ts)
    shifted, _ = orbit_state(fund, ts + period / 3.0)
    chorus = float(np.max(np.abs(pos[:, 1] - shifted[:, 0])))
    worst = max(float(np.max(gaps)), closure, chorus)
    margin = COM_TOL - worst
    return CheckResult("d6_reconstruction", margin > 0, margin,
                       float(np.argmax(gaps)) * period / 12.0,
                       f"max seam gap {np.max(gaps):.3e}, closure {closure:.3e}, "
                       f"choreography residual {chorus:.3e}")


ALL_CHECKS = [
    check_center_of_mass,
    check_quadrants,
    check_distance_ordering,
    check_orientation,
    check_angular_momentum,
    check_star_shaped,
    check_convexity,
    check_arc1_auxiliary,
    check_arc2_gauss_map,
    check_three_tangents,
    check_splitting_lemma,
    check_convexity_proposition,
    check_no_degenerate_times,
    check_d6_reconstruction,
]


def run_all(fund: Trajectory, full: Trajectory, potential: PotentialSpec,
            opts: VerifyOptions | None = None) -> VerificationReport:
    """Execute every check once, in order; a check that raises (rather than
    fails) aborts with its diagnostics."""
    opts = opts or VerifyOptions()
    data = _sample(fund, full, potential, opts)
    report = VerificationReport(
        exponent=potential.exponent,
        gauge={"T": data.period, "masses": [1.0, 1.0, 1.0]},
        sampling_resolution=opts.samples,
    )
    for check in ALL_CHECKS:
        report.checks.append(check(fund, full, potential, opts, data))
    return report
