import json

import numpy as np
import pytest

from figure_eight.loops import (FourierLoop, canonicalize, evaluate,
                                evaluate_curve, free_coefficient_indices,
                                load_loop, pack_coefficients, resample,
                                save_loop, seed_eight, sine_coefficients,
                                symmetrize, unpack_coefficients, x_mode_mask,
                                y_mode_mask)


def random_valid_loop(rng, n_modes=24, period=12.0, scale=0.3):
    xc = rng.normal(size=n_modes + 1) * scale
    yc = rng.normal(size=n_modes + 1) * scale
    return symmetrize(xc, yc, period)


class TestModeMasks:
    def test_x_modes_odd_not_multiple_of_three(self):
        allowed = np.nonzero(x_mode_mask(24))[0]
        np.testing.assert_array_equal(allowed, [1, 5, 7, 11, 13, 17, 19, 23])

    def test_y_modes_even_not_multiple_of_three(self):
        allowed = np.nonzero(y_mode_mask(24))[0]
        np.testing.assert_array_equal(allowed, [2, 4, 8, 10, 14, 16, 20, 22])

    def test_constructor_rejects_invalid(self):
        xc = np.zeros(25)
        yc = np.zeros(25)
        xc[2] = 1.0  # even mode forbidden for x
        with pytest.raises(ValueError):
            FourierLoop(12.0, xc, yc)


class TestSymmetrize:
    def test_valid_loop_unchanged(self, rng):
        loop = random_valid_loop(rng)
        again = symmetrize(loop.x_coeffs, loop.y_coeffs, loop.period)
        np.testing.assert_array_equal(again.x_coeffs, loop.x_coeffs)
        np.testing.assert_array_equal(again.y_coeffs, loop.y_coeffs)

    def test_even_x_mode_zeroed(self):
        xc = np.zeros(25)
        xc[2] = 1.0
        loop = symmetrize(xc, np.zeros(25), 12.0)
        assert np.all(loop.x_coeffs == 0)

    def test_y_multiple_of_three_zeroed(self):
        yc = np.zeros(25)
        yc[6] = 1.0
        loop = symmetrize(np.zeros(25), yc, 12.0)
        assert np.all(loop.y_coeffs == 0)

    def test_projection_norm_nonincreasing(self, rng):
        for _ in range(20):
            xc = rng.normal(size=25)
            yc = rng.normal(size=25)
            loop = symmetrize(xc, yc, 12.0)
            before = np.sum(xc**2) + np.sum(yc**2)
            after = np.sum(loop.x_coeffs**2) + np.sum(loop.y_coeffs**2)
            assert after <= before + 1e-15


class TestSeed:
    def test_rightmost_excursion(self):
        loop = seed_eight(12.0, 0.3)
        q1 = evaluate(loop, 3.0)[0]  # t = T/4
        np.testing.assert_allclose(q1, [1.0, 0.0], atol=1e-15)

    def test_origin_crossings(self):
        loop = seed_eight(12.0, 0.3)
        np.testing.assert_allclose(evaluate_curve(loop, 0.0), [0, 0], atol=1e-15)
        np.testing.assert_allclose(evaluate_curve(loop, 6.0), [0, 0], atol=1e-13)

    def test_passes_symmetrize_unchanged(self):
        loop = seed_eight(12.0, 0.3)
        again = symmetrize(loop.x_coeffs, loop.y_coeffs, loop.period)
        np.testing.assert_array_equal(again.x_coeffs, loop.x_coeffs)

    def test_invalid_period(self):
        with pytest.raises(ValueError):
            seed_eight(-1.0, 0.3)


class TestEvaluate:
    def test_zero_center_of_mass(self, rng):
        loop = random_valid_loop(rng)
        for t in rng.uniform(0, 12, size=25):
            triple = evaluate(loop, t)
            np.testing.assert_allclose(triple.sum(axis=0), [0, 0], atol=1e-12)

    def test_body_one_at_origin_at_zero(self, rng):
        loop = random_valid_loop(rng)
        np.testing.assert_allclose(evaluate(loop, 0.0)[0], [0, 0], atol=1e-15)

    def test_half_period_reflection(self, rng):
        # q(t + T/2) = (-x(t), y(t)), structurally
        loop = random_valid_loop(rng)
        t = rng.uniform(0, 12, size=100)
        a = evaluate_curve(loop, t + 6.0)
        b = evaluate_curve(loop, t) * np.array([-1.0, 1.0])
        assert np.max(np.abs(a - b)) < 1e-12

    def test_time_odd(self, rng):
        loop = random_valid_loop(rng)
        t = rng.uniform(0, 12, size=50)
        np.testing.assert_allclose(evaluate_curve(loop, -t), -evaluate_curve(loop, t),
                                   atol=1e-12)

    def test_s_map_invariance(self, rng):
        # Q(t) = R_y (q3, q1, q2)(t - T/6) pointwise on random valid loops
        for _ in range(10):
            loop = random_valid_loop(rng)
            t = rng.uniform(0, 12, size=20)
            lhs = evaluate(loop, t)
            shifted = evaluate(loop, t - 2.0)[:, [2, 0, 1], :]
            rhs = shifted * np.array([-1.0, 1.0])
            assert np.max(np.abs(lhs - rhs)) < 1e-12

    def test_derivative_orders(self, rng):
        loop = random_valid_loop(rng)
        h = 1e-6
        for t in (0.37, 2.5, 9.1):
            v = evaluate_curve(loop, t, 1)
            fd = (evaluate_curve(loop, t + h) - evaluate_curve(loop, t - h)) / (2 * h)
            np.testing.assert_allclose(v, fd, rtol=1e-7, atol=1e-8)
            a = evaluate_curve(loop, t, 2)
            fd2 = (evaluate_curve(loop, t + h, 1) - evaluate_curve(loop, t - h, 1)) / (2 * h)
            np.testing.assert_allclose(a, fd2, rtol=1e-6, atol=1e-7)

    def test_isosceles_structure_at_minus_t12(self, rng):
        # body 2 on the x-axis, bodies 1 and 3 mirror images, at t = -T/12
        loop = random_valid_loop(rng)
        q = evaluate(loop, -1.0)
        assert abs(q[1, 1]) < 1e-13
        np.testing.assert_allclose(q[0], q[2] * np.array([1.0, -1.0]), atol=1e-12)


class TestResample:
    def test_zero_loop(self):
        loop = symmetrize(np.zeros(25), np.zeros(25), 12.0)
        q, qd = resample(loop, 64)
        assert np.all(q == 0) and np.all(qd == 0)

    def test_seed_first_sample_origin(self):
        q, _ = resample(seed_eight(12.0, 0.3), 256)
        np.testing.assert_allclose(q[0], [0, 0], atol=1e-15)

    def test_aliasing_guard(self):
        with pytest.raises(ValueError):
            resample(seed_eight(12.0, 0.3, n_modes=24), 48)

    def test_transform_round_trip(self, rng):
        # forward sine transform of resampled values recovers coefficients
        loop = random_valid_loop(rng)
        q, _ = resample(loop, 256)
        xc = sine_coefficients(q[:, 0], loop.n_modes)
        yc = sine_coefficients(q[:, 1], loop.n_modes)
        np.testing.assert_allclose(xc, loop.x_coeffs, atol=1e-12)
        np.testing.assert_allclose(yc, loop.y_coeffs, atol=1e-12)


class TestPacking:
    def test_round_trip(self, rng):
        loop = random_valid_loop(rng)
        vec = pack_coefficients(loop)
        ix, iy = free_coefficient_indices(loop.n_modes)
        assert vec.size == ix.size + iy.size
        back = unpack_coefficients(vec, loop.n_modes, loop.period)
        np.testing.assert_array_equal(back.x_coeffs, loop.x_coeffs)
        np.testing.assert_array_equal(back.y_coeffs, loop.y_coeffs)


class TestCanonicalize:
    def test_seed_gets_x_flipped(self):
        loop = canonicalize(seed_eight(12.0, 0.3))
        # body 2 now on the negative x-axis at t = -T/12
        q2 = evaluate(loop, -1.0)[1]
        assert q2[0] < 0 and abs(q2[1]) < 1e-13
        # body 3 in the first quadrant at t = 0
        q3 = evaluate(loop, 0.0)[2]
        assert q3[0] > 0 and q3[1] > 0

    def test_idempotent(self):
        once = canonicalize(seed_eight(12.0, 0.3))
        twice = canonicalize(once)
        np.testing.assert_array_equal(once.x_coeffs, twice.x_coeffs)
        np.testing.assert_array_equal(once.y_coeffs, twice.y_coeffs)

    def test_flips_are_symmetries_of_the_masks(self, rng):
        loop = random_valid_loop(rng)
        flipped = canonicalize(loop)
        assert np.all(np.abs(flipped.x_coeffs) == np.abs(loop.x_coeffs))
        assert np.all(np.abs(flipped.y_coeffs) == np.abs(loop.y_coeffs))


class TestPersistence:
    def test_json_round_trip(self, tmp_path, rng):
        loop = random_valid_loop(rng)
        path = tmp_path / "loop.json"
        save_loop(loop, path)
        back = load_loop(path)
        assert back.period == loop.period
        np.testing.assert_array_equal(back.x_coeffs, loop.x_coeffs)
        np.testing.assert_array_equal(back.y_coeffs, loop.y_coeffs)

    def test_schema(self, tmp_path):
        path = tmp_path / "loop.json"
        save_loop(seed_eight(12.0, 0.3), path)
        payload = json.loads(path.read_text())
        assert set(payload) == {"T", "N", "x_coeffs", "y_coeffs"}
        assert payload["N"] == 24
        assert len(payload["x_coeffs"]) == 25
