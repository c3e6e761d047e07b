import math

import numpy as np
import pytest

from figure_eight import loops
from figure_eight.action import (ConvergenceError, MinimizeOptions,
                                 action_gradient, action_value, minimize,
                                 path_action)
from figure_eight.dynamics import NEWTONIAN, CollisionError, PotentialSpec, accelerations
from figure_eight.loops import evaluate, seed_eight, symmetrize


def random_valid_loop(rng, scale=0.25):
    base = loops.pack_coefficients(seed_eight(12.0, 0.3))
    vec = base + scale * rng.standard_normal(base.shape)
    return loops.unpack_coefficients(vec, 24, 12.0)


def circular_choreography_samples(radius, period, n):
    """All three bodies on one circle, phases 2*pi/3 apart."""
    t = np.arange(n) * (period / n)
    omega = 2 * np.pi / period
    shifts = np.array([0.0, period / 3, 2 * period / 3])
    phase = omega * (t[:, None] + shifts[None, :])
    pos = radius * np.stack([np.cos(phase), np.sin(phase)], axis=-1)
    vel = radius * omega * np.stack([-np.sin(phase), np.cos(phase)], axis=-1)
    return pos, vel


class TestActionValue:
    def test_rotating_equilateral_closed_form(self):
        # A = T * (3 R^2 w^2 / 2 + sqrt(3)/R) for the circular choreography,
        # pairwise distance R*sqrt(3), constant speed R*w
        radius, period = 1.3, 12.0
        omega = 2 * np.pi / period
        pos, vel = circular_choreography_samples(radius, period, 512)
        expected = period * (1.5 * radius**2 * omega**2 + math.sqrt(3) / radius)
        assert path_action(pos, vel, period, NEWTONIAN) == pytest.approx(expected, rel=1e-10)

    def test_zero_loop_rejected(self):
        zero = symmetrize(np.zeros(25), np.zeros(25), 12.0)
        with pytest.raises(CollisionError):
            action_value(zero, NEWTONIAN)

    def test_grid_self_convergence_on_eight(self, eight_loop):
        a1 = action_value(eight_loop, NEWTONIAN, 512)
        a2 = action_value(eight_loop, NEWTONIAN, 1024)
        assert abs(a2 - a1) / abs(a1) < 1e-12

    def test_matches_path_action(self, eight_loop):
        t = np.arange(512) * (12.0 / 512)
        pos = evaluate(eight_loop, t, 0)
        vel = evaluate(eight_loop, t, 1)
        assert action_value(eight_loop, NEWTONIAN, 512) == pytest.approx(
            path_action(pos, vel, 12.0, NEWTONIAN), rel=1e-14)


class TestActionGradient:
    def test_finite_difference_oracle(self, rng):
        h = 1e-6
        for _ in range(5):
            loop = random_valid_loop(rng, scale=0.1)
            vec = loops.pack_coefficients(loop)
            gx, gy = action_gradient(loop, NEWTONIAN)
            ix, iy = loops.free_coefficient_indices(24)
            grad = np.concatenate([gx[ix], gy[iy]])
            for m in range(vec.size):
                vp, vm = vec.copy(), vec.copy()
                vp[m] += h
                vm[m] -= h
                fp = action_value(loops.unpack_coefficients(vp, 24, 12.0), NEWTONIAN)
                fm = action_value(loops.unpack_coefficients(vm, 24, 12.0), NEWTONIAN)
                fd = (fp - fm) / (2 * h)
                assert grad[m] == pytest.approx(fd, rel=1e-6, abs=1e-9)

    def test_projected_onto_symmetric_subspace(self, rng):
        loop = random_valid_loop(rng)
        gx, gy = action_gradient(loop, NEWTONIAN)
        assert np.all(gx[~loops.x_mode_mask(24)] == 0)
        assert np.all(gy[~loops.y_mode_mask(24)] == 0)

    def test_kinetic_term_parseval(self):
        # kinetic action of a single x-mode c*sin(k w t) is 3*(k w)^2*(T/4)*c^2
        # (three bodies, mean of cos^2 = 1/2), so its gradient is
        # 3*(k w)^2*(T/2)*c; isolate it by finite differences of the sampled
        # kinetic integrand alone
        period, k, c = 12.0, 5, 0.37
        omega = 2 * np.pi / period

        def kinetic(coeff):
            xc = np.zeros(25)
            xc[k] = coeff
            loop = symmetrize(xc, np.zeros(25), period)
            _, vel = loops.resample(loop, 512)
            return period / 512 * np.sum(0.5 * 3.0 * np.sum(vel**2, axis=1))

        h = 1e-7
        fd = (kinetic(c + h) - kinetic(c - h)) / (2 * h)
        closed_form = 3.0 * (k * omega) ** 2 * (period / 2.0) * c
        assert fd == pytest.approx(closed_form, rel=1e-9)

    def test_gradient_small_at_converged_eight(self, newton_minimized):
        assert newton_minimized.gradient_norm < MinimizeOptions().gradient_tolerance


class TestMinimize:
    def test_converges_from_seed(self, newton_minimized):
        assert newton_minimized.converged
        seed_action = action_value(seed_eight(12.0, 0.3), NEWTONIAN)
        assert newton_minimized.action <= seed_action

    def test_restart_from_converged_is_immediate(self, eight_loop):
        res = minimize(eight_loop, NEWTONIAN)
        assert res.iterations == 0

    def test_action_monotone_along_accepted_steps(self, newton_minimized):
        actions = [row.action for row in newton_minimized.log]
        assert all(b <= a + 1e-12 for a, b in zip(actions, actions[1:]))

    def test_log_columns(self, newton_minimized, tmp_path):
        path = tmp_path / "log.csv"
        newton_minimized.write_log(path)
        header = path.read_text().splitlines()[0]
        assert header == "iteration,action,gradient_norm,min_pair_distance,step_size"

    def test_iterates_stay_collision_free(self, newton_minimized):
        assert min(row.min_pair_distance for row in newton_minimized.log) > 0.05

    def test_weak_newton_equations(self, eight_loop, rng):
        # parameterization acceleration vs forces, at spectral-truncation level
        for t in rng.uniform(0, 12, size=64):
            param_acc = evaluate(eight_loop, t, 2)
            force = accelerations(evaluate(eight_loop, t, 0), NEWTONIAN)
            rel = np.max(np.abs(param_acc - force)) / np.max(np.abs(force))
            assert rel < 1e-4

    def test_continuation_small_step(self, eight_loop):
        res = minimize(eight_loop, PotentialSpec(-1.05))
        assert res.converged

    def test_nonconvergence_raises_with_result(self, rng):
        with pytest.raises(ConvergenceError) as excinfo:
            minimize(seed_eight(12.0, 0.3), NEWTONIAN,
                     MinimizeOptions(max_iterations=3))
        assert excinfo.value.result is not None
        assert excinfo.value.result.iterations == 3

    def test_canonical_output_frame(self, eight_loop):
        q = evaluate(eight_loop, -1.0)
        assert q[1, 0] < 0          # body 2 on the negative x-axis
        q0 = evaluate(eight_loop, 0.0)
        assert q0[2, 0] > 0 and q0[2, 1] > 0   # body 3 in the first quadrant
