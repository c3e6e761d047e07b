"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`.  Criterion 1 executes the
full pipeline fresh through the CLI and is the slowest single test; criteria
7 and 8 run the full-size Monte-Carlo and the exponent sweep.
"""

import json
import time

import numpy as np

from figure_eight import action, cli, geometry, loops, refine, verify
from figure_eight.dynamics import (NEWTONIAN, accelerations, angular_momenta,
                                   energies, torque_body3)
from figure_eight.geometry import AT_INFINITY, Line2, Vec2


def _report(number, passed, text):
    print(f"[{'PASS' if passed else 'FAIL'}] criterion {number}: {text}")
    assert passed, f"criterion {number}: {text}"


class TestAcceptance:
    def test_criterion_1_pipeline_end_to_end(self, tmp_path):
        out = str(tmp_path / "run")
        t0 = time.time()
        ok = (cli.main(["solve", "--out", out]) == 0
              and cli.main(["refine", f"{out}/loop.json", "--out", out]) == 0
              and cli.main(["verify", f"{out}/refined.json", "--out", out]) == 0)
        elapsed = time.time() - t0

        refined = json.loads(open(f"{out}/refined.json").read())
        report = json.loads(open(f"{out}/report.json").read())
        residual_ok = refined["residual_norm"] < 1e-11
        margins_ok = all(c["passed"] and c["worst_margin"] > 0
                         for c in report["checks"])
        convexity = next(c for c in report["checks"] if c["name"] == "convexity")
        _report(1, ok and elapsed < 300 and residual_ok and margins_ok,
                f"solve/refine/verify in {elapsed:.1f}s (< 300s), shooting "
                f"residual {refined['residual_norm']:.2e} < 1e-11, all checks "
                f"positive margins; {convexity['detail']}")

    def test_criterion_2_symmetry_suite(self, refined):
        fund = refined.trajectory
        rng = np.random.default_rng(0)
        ts = rng.uniform(0.0, 12.0, size=200)

        pos, vel = refine.orbit_state(fund, ts)
        spos, svel = refine.orbit_state(fund, ts - 2.0)
        flip = np.array([-1.0, 1.0])
        d6 = max(float(np.max(np.abs(pos - spos[:, [2, 0, 1]] * flip))),
                 float(np.max(np.abs(vel - svel[:, [2, 0, 1]] * flip))))

        cpos, _ = refine.orbit_state(fund, ts + 4.0)
        chor = float(np.max(np.abs(pos[:, 1] - cpos[:, 0])))

        com = float(np.max(np.linalg.norm(pos.sum(axis=1), axis=1)))
        _report(2, d6 < 1e-9 and chor < 1e-9 and com < 1e-9,
                f"D6 residual {d6:.2e}, choreography residual {chor:.2e}, "
                f"center of mass {com:.2e} (all < 1e-9)")

    def test_criterion_3_conservation_suite(self, refined):
        traj = refined.trajectory
        ts = np.linspace(-1.0, 0.0, 257)
        e = np.array([energies(traj.state_at(t), NEWTONIAN)[2] for t in ts])
        l_tot = np.array([angular_momenta(traj.state_at(t))[3] for t in ts])
        l_body = np.array([angular_momenta(traj.state_at(t))[:3] for t in ts])
        e_drift = float((e.max() - e.min()) / abs(e.mean()))
        l_scale = float(np.max(np.abs(l_body)))
        l_drift = float((l_tot.max() - l_tot.min()) / l_scale)
        l_mag = float(np.max(np.abs(l_tot)))
        _report(3, e_drift < 1e-10 and l_drift < 1e-10 and l_mag < 1e-11,
                f"energy drift {e_drift:.2e}, total angular momentum drift "
                f"{l_drift:.2e} (both < 1e-10 relative), |L| {l_mag:.2e} < 1e-11")

    def test_criterion_4_oracle_agreements(self):
        rng = np.random.default_rng(11)

        # action gradient vs central finite differences on 20 random loops
        base = loops.pack_coefficients(loops.seed_eight(12.0, 0.3))
        h = 1e-6
        worst_grad = 0.0
        for _ in range(20):
            vec = base + 0.15 * rng.standard_normal(base.shape)
            loop = loops.unpack_coefficients(vec, 24, 12.0)
            gx, gy = action.action_gradient(loop, NEWTONIAN)
            ix, iy = loops.free_coefficient_indices(24)
            grad = np.concatenate([gx[ix], gy[iy]])
            for m in range(vec.size):
                vp, vm = vec.copy(), vec.copy()
                vp[m] += h
                vm[m] -= h
                fd = (action.action_value(loops.unpack_coefficients(vp, 24, 12.0), NEWTONIAN)
                      - action.action_value(loops.unpack_coefficients(vm, 24, 12.0), NEWTONIAN)) / (2 * h)
                worst_grad = max(worst_grad, abs(grad[m] - fd) / max(abs(fd), 1e-9))

        # torque vs force-based wedge on 100 random zero-CoM configurations
        from figure_eight.dynamics import PhaseState
        worst_torque = 0.0
        for _ in range(100):
            pos = rng.normal(size=(3, 2))
            pos -= pos.mean(axis=0)
            if min(np.linalg.norm(pos[i] - pos[j])
                   for i, j in ((0, 1), (1, 2), (2, 0))) < 0.3:
                continue
            state = PhaseState(pos, rng.normal(size=(3, 2)))
            acc = accelerations(pos, NEWTONIAN)
            oracle = pos[2, 0] * acc[2, 1] - pos[2, 1] * acc[2, 0]
            worst_torque = max(worst_torque,
                               abs(torque_body3(state, NEWTONIAN) - oracle)
                               / max(abs(oracle), 1e-300))

        # tangent sweep velocity vs finite differences on random curves
        worst_dp = 0.0
        checked = 0
        while checked < 50:
            c = rng.normal(size=(3, 2))
            m = Line2(Vec2(*rng.normal(size=2)), Vec2(*rng.normal(size=2)))

            def curve(t):
                return (Vec2(*(c[0] + c[1] * t + c[2] * t * t)),
                        Vec2(*(c[1] + 2 * c[2] * t)), Vec2(*(2 * c[2])))

            p, v, a = curve(0.0)
            if v.norm() < 1e-2:
                continue
            an = geometry.dP_dt(p, v, a, m)
            lo = geometry.tangent_line_intersection_param(*curve(-1e-6)[:2], m)
            hi = geometry.tangent_line_intersection_param(*curve(1e-6)[:2], m)
            if an is AT_INFINITY or lo is AT_INFINITY or hi is AT_INFINITY:
                continue
            fd = (hi - lo) / 2e-6
            if abs(fd) < 1e-4:
                continue
            worst_dp = max(worst_dp, abs(an - fd) / abs(fd))
            checked += 1

        _report(4, worst_grad < 1e-6 and worst_torque < 1e-12 and worst_dp < 1e-6,
                f"gradient vs FD {worst_grad:.2e} < 1e-6 (20 loops), torque vs "
                f"wedge {worst_torque:.2e} < 1e-12 (100 configs), dP/dt vs FD "
                f"{worst_dp:.2e} < 1e-6")

    def test_criterion_5_torque_identity_along_eight(self, refined):
        traj = refined.trajectory
        ts = np.linspace(-0.98, -0.02, 256)
        h = 1e-4
        worst = 0.0
        for t in ts:
            l_p = angular_momenta(traj.state_at(t + h))[2]
            l_m = angular_momenta(traj.state_at(t - h))[2]
            fd = (l_p - l_m) / (2 * h)
            state = traj.state_at(t)
            q = state.positions
            r12 = np.linalg.norm(q[0] - q[1])
            r13 = np.linalg.norm(q[0] - q[2])
            r23 = np.linalg.norm(q[1] - q[2])
            w12 = q[0, 0] * q[1, 1] - q[0, 1] * q[1, 0]
            closed_form = (1.0 / r13**3 - 1.0 / r23**3) * w12
            worst = max(worst, abs(fd - closed_form) / abs(closed_form))
        _report(5, worst < 1e-6,
                f"dl3/dt finite differences vs (1/r13^3 - 1/r23^3)(q1^q2): "
                f"worst relative error {worst:.2e} < 1e-6 at 256 samples")

    def test_criterion_6_three_tangents(self, refined, full_orbit):
        opts = verify.VerifyOptions(tangent_samples=512, synthetic_triples=50)
        res = verify.check_three_tangents(refined.trajectory, full_orbit,
                                          NEWTONIAN, opts)
        _report(6, res.passed,
                f"concurrency residual margin {res.worst_margin:.2e} at 512 "
                f"samples plus 50 synthetic zero-momentum triples ({res.detail})")

    def test_criterion_7_splitting_monte_carlo(self, refined, full_orbit):
        opts = verify.VerifyOptions(synthetic_solutions=100, seed=0)
        res = verify.check_splitting_lemma(refined.trajectory, full_orbit,
                                           NEWTONIAN, opts)
        _report(7, res.passed and "100 random solutions" in res.detail
                and "0 counterexamples" in res.detail,
                res.detail)

    def test_criterion_8_corollary_sweep(self, tmp_path):
        out = tmp_path / "sweep"
        code = cli.main(["sweep", "--out", str(out), "--",
                         "-2.5", "-2.0", "-1.2", "-1.1", "-1.0", "-0.9"])
        rows = (out / "sweep_summary.csv").read_text().splitlines()[1:]
        by_a = {row.split(",")[0]: row for row in rows}
        refused = "skipped" in by_a["-2.0"] and "scaling-degenerate" in by_a["-2.0"]
        converged = all(by_a[a].split(",")[1] == "True" and
                        by_a[a].split(",")[3] == "True"
                        for a in ("-2.5", "-1.2", "-1.1", "-1.0", "-0.9"))
        lobes_convex = True
        for a in ("-2.5", "-1.2", "-1.1", "-1.0", "-0.9"):
            kappas = [float(v) for v in by_a[a].split(",")[2].split(";")]
            lobes_convex = lobes_convex and all(k > 0 for k in kappas)
        _report(8, code == 0 and refused and converged and lobes_convex,
                "exponents -2.5/-1.2/-1.1/-1.0/-0.9 converged via continuation "
                "with all checks passed and min|kappa| > 0 per arc; "
                "a = -2 refused as scaling-degenerate")

    def test_criterion_9_robustness(self, refined, tmp_path):
        good = tmp_path / "refined.json"
        refine.save_refined(refined, NEWTONIAN, 12.0, good)
        payload = json.loads(good.read_text())
        payload["unknowns"]["w_start"] *= 1.01
        bad = tmp_path / "perturbed.json"
        bad.write_text(json.dumps(payload))
        out = tmp_path / "out"
        code = cli.main(["verify", str(bad), "--out", str(out)])
        report = json.loads((out / "report.json").read_text())
        n_failed = sum(1 for c in report["checks"] if not c["passed"])
        _report(9, code == cli.EXIT_VERIFICATION and n_failed > 0,
                f"perturbed trajectory: report generated with {n_failed} failing "
                f"checks, exit code {code} (= 3), no crash")
