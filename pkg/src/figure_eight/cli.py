"""Command-line front end: solve | refine | verify | sweep | plot.

Exit codes are a stable scripting contract: 0 success, 1 usage/config error,
2 numerical failure, 3 verification failure.  A run is deterministic given
the config file plus flags (flags override file values) and the random seed.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from figure_eight import action, loops, refine, verify
from figure_eight.action import ConvergenceError, MinimizeOptions
from figure_eight.dynamics import CollisionError, PotentialSpec
from figure_eight.refine import RefinementError, SeamError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERICAL = 2
EXIT_VERIFICATION = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; the contract is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


@dataclass
class RunConfig:
    a: float = -1.0
    T: float = 12.0
    modes: int = loops.DEFAULT_MODES
    grid: int = loops.DEFAULT_GRID
    tol: float = 1e-11               # shooting residual target
    gradient_tolerance: float = 1e-8
    amplitude_ratio: float = 0.3
    samples: int = 2048              # verifier sampling resolution
    out: str = "runs"
    seed: int = 0
    jobs: int = 1
    synthetic: bool = False

    @classmethod
    def load(cls, path, overrides: dict) -> "RunConfig":
        values = {}
        if path is not None:
            with open(path) as fh:
                file_values = json.load(fh)
            known = {f.name for f in fields(cls)}
            unknown = set(file_values) - known
            if unknown:
                raise UsageError(f"unknown config keys: {sorted(unknown)}")
            values.update(file_values)
        values.update({k: v for k, v in overrides.items() if v is not None})
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self):
        if self.a == 0.0:
            raise UsageError("exponent a = 0 is outside the power-law family")
        if self.a == -2.0:
            raise UsageError("exponent a = -2 is scaling-degenerate and refused")
        if self.T <= 0:
            raise UsageError("period T must be positive")
        if self.grid <= 2 * self.modes:
            raise UsageError("grid must exceed twice the mode cutoff")

    def potential(self) -> PotentialSpec:
        return PotentialSpec(self.a)

    def out_dir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="JSON config file; flags override its values")
    p.add_argument("--a", type=float, default=None, help="potential exponent")
    p.add_argument("--T", type=float, default=None, help="loop period (gauge, default 12)")
    p.add_argument("--modes", type=int, default=None, help="Fourier mode cutoff")
    p.add_argument("--grid", type=int, default=None, help="action quadrature points")
    p.add_argument("--tol", type=float, default=None, help="shooting residual target")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="random seed for synthetic suites")
    p.add_argument("--jobs", type=int, default=None, help="sweep worker processes")
    p.add_argument("--synthetic", action="store_true", default=None,
                   help="run the full-size synthetic Monte-Carlo suites")


def _config_from(args) -> RunConfig:
    overrides = {k: getattr(args, k) for k in
                 ("a", "T", "modes", "grid", "tol", "out", "seed", "jobs", "synthetic")
                 if hasattr(args, k)}
    return RunConfig.load(args.config, overrides)


def _solve(cfg: RunConfig, warm_loop=None):
    seed_loop = warm_loop if warm_loop is not None else loops.seed_eight(
        cfg.T, cfg.amplitude_ratio, cfg.modes)
    opts = MinimizeOptions(gradient_tolerance=cfg.gradient_tolerance,
                           quadrature_points=cfg.grid)
    return action.minimize(seed_loop, cfg.potential(), opts)


def cmd_solve(args) -> int:
    cfg = _config_from(args)
    out = cfg.out_dir()
    result = _solve(cfg)
    loops.save_loop(result.loop, out / "loop.json")
    result.write_log(out / "convergence.csv")
    print(f"solve: action {result.action:.12g}, gradient norm {result.gradient_norm:.3e}, "
          f"{result.iterations} iterations -> {out / 'loop.json'}")
    return EXIT_OK


def cmd_refine(args) -> int:
    cfg = _config_from(args)
    out = cfg.out_dir()
    # canonicalize so hand-written loops in a mirrored frame refine too
    loop = loops.canonicalize(loops.load_loop(args.loop_file))
    warm = refine.extract_unknowns(loop)
    result = refine.refine(warm, cfg.potential(), loop.period, residual_tol=cfg.tol)
    refine.save_refined(result, cfg.potential(), loop.period, out / "refined.json")
    result.trajectory.to_csv(out / "fundamental.csv")
    print(f"refine: max residual {result.residuals.max_abs:.3e} after "
          f"{result.iterations} iterations (Jacobian condition "
          f"{result.jacobian_condition:.3g}) -> {out / 'refined.json'}")
    return EXIT_OK


def _verify_solution(solution_file, cfg: RunConfig):
    # verify the trajectory exactly as encoded in the solution file: a
    # perturbed (non-solution) file must yield a failing report, not a crash
    unknowns, potential, period, _ = refine.load_refined(solution_file)
    fund = refine.fundamental_trajectory(unknowns, potential, period)
    full = refine.reconstruct_full_orbit(fund, seam_tol=np.inf)
    if cfg.synthetic:
        vopts = verify.VerifyOptions(samples=cfg.samples, seed=cfg.seed)
    else:
        vopts = verify.VerifyOptions(samples=cfg.samples, seed=cfg.seed,
                                     synthetic_solutions=10, synthetic_triples=10)
    return verify.run_all(fund, full, potential, vopts)


def cmd_verify(args) -> int:
    cfg = _config_from(args)
    out = cfg.out_dir()
    report = _verify_solution(args.solution_file, cfg)
    report.save(out / "report.json")
    print(report.table())
    return EXIT_OK if report.all_passed else EXIT_VERIFICATION


def _continuation_path(a_target: float, a_from: float, max_step: float = 0.2):
    """Exponents stepping from a_from to a_target, skipping the degenerate
    neighborhood of -2."""
    path = []
    a = a_from
    while abs(a_target - a) > 1e-12:
        step = np.clip(a_target - a, -max_step, max_step)
        nxt = a + step
        if abs(nxt + 2.0) < 0.05 and abs(a_target + 2.0) > 0.05:
            nxt = -2.0 + np.sign(a_target + 2.0) * 0.05  # hop across the gap
            if (a_target - nxt) * step < 0:
                nxt = a_target
        path.append(float(nxt))
        a = nxt
    return path


def cmd_sweep(args) -> int:
    """Continuation phase runs sequentially (each exponent warm-starts from
    its solved neighbor); the refine-and-verify phase fans out to a worker
    pool sized by --jobs, each worker owning its own output files."""
    cfg = _config_from(args)
    out = cfg.out_dir()
    requested = [float(v) for v in args.exponents]
    rows = {}
    solutions = {}

    anchor = -1.0
    solutions[anchor] = _solve(_with_a(cfg, anchor)).loop

    runnable = []
    for a_req in requested:
        if a_req == 0.0:
            rows[a_req] = (a_req, False, None, None, "skipped: a = 0 undefined")
            continue
        if a_req == -2.0:
            rows[a_req] = (a_req, False, None, None,
                           "skipped: a = -2 scaling-degenerate (refused)")
            continue
        try:
            _continue_to(cfg, a_req, solutions)
            runnable.append(a_req)
        except (ConvergenceError, RefinementError, CollisionError, SeamError,
                RuntimeError) as exc:
            rows[a_req] = (a_req, False, None, None, f"continuation failed: {exc}")

    tasks = [(a_req, _loop_payload(solutions[a_req]), _config_dict(cfg), str(out))
             for a_req in runnable]
    if cfg.jobs > 1 and len(tasks) > 1:
        import concurrent.futures
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for result in pool.map(_sweep_verify_worker, tasks):
                rows[result[0]] = result
    else:
        for task in tasks:
            result = _sweep_verify_worker(task)
            rows[result[0]] = result

    ordered = [rows[a] for a in requested]
    summary = out / "sweep_summary.csv"
    with open(summary, "w") as fh:
        fh.write("a,converged,min_abs_kappa_per_arc,all_checks_passed,note\n")
        for a_req, conv, minkappa, passed, note in ordered:
            mk = "" if minkappa is None else ";".join(f"{v:.6g}" for v in minkappa)
            fh.write(f"{a_req},{conv},{mk},{passed},{note}\n")
    print(f"sweep: {sum(1 for r in ordered if r[1])}/{len(ordered)} converged -> {summary}")
    for a_req, conv, minkappa, passed, note in ordered:
        status = "converged, all checks passed" if (conv and passed) else note
        print(f"  a = {a_req:g}: {status}")
    if all((r[1] and r[3]) or r[4].startswith("skipped") for r in ordered):
        return EXIT_OK
    return EXIT_NUMERICAL


def _with_a(cfg: RunConfig, a: float) -> RunConfig:
    import copy
    new = copy.copy(cfg)
    new.a = a
    return new


def _config_dict(cfg: RunConfig) -> dict:
    return {f.name: getattr(cfg, f.name) for f in fields(RunConfig)}


def _loop_payload(loop) -> dict:
    return {"T": loop.period, "x": [float(v) for v in loop.x_coeffs],
            "y": [float(v) for v in loop.y_coeffs]}


def _continue_to(cfg: RunConfig, a_req: float, solutions: dict) -> None:
    """Warm-start chain from the nearest solved exponent to a_req."""
    nearest = min(solutions, key=lambda k: abs(k - a_req))
    loop = solutions[nearest]
    for a_step in _continuation_path(a_req, nearest):
        result = _solve(_with_a(cfg, a_step), warm_loop=loop)
        loop = result.loop
        solutions[a_step] = loop


def _sweep_verify_worker(task):
    """Refine and verify one exponent; writes that exponent's solution and
    report files.  Safe to run in a separate process."""
    a_req, payload, cfg_dict, out_dir = task
    cfg = RunConfig(**cfg_dict)
    out = Path(out_dir)
    tag = f"{a_req}"
    loop = loops.FourierLoop(payload["T"], np.array(payload["x"]),
                             np.array(payload["y"]))
    potential = PotentialSpec(a_req)
    try:
        refined = refine.refine(refine.extract_unknowns(loop), potential, cfg.T,
                                residual_tol=cfg.tol)
        loops.save_loop(loop, out / f"loop_a_{tag}.json")
        refine.save_refined(refined, potential, cfg.T, out / f"refined_a_{tag}.json")
        full = refine.reconstruct_full_orbit(refined.trajectory)
        vopts = verify.VerifyOptions(
            samples=cfg.samples, seed=cfg.seed,
            synthetic_solutions=100 if cfg.synthetic else 10,
            synthetic_triples=50 if cfg.synthetic else 10)
        report = verify.run_all(refined.trajectory, full, potential, vopts)
        report.save(out / f"report_a_{tag}.json")
        window = vopts.sign_window * cfg.T
        t = refined.trajectory.times
        interior = (t - t[0] > window) & (t[-1] - t > window)
        kappa = refined.trajectory.curvatures
        minkappa = tuple(float(np.min(np.abs(kappa[interior, j]))) for j in range(3))
        return (a_req, True, minkappa, report.all_passed, "ok")
    except (ConvergenceError, RefinementError, CollisionError, SeamError,
            RuntimeError) as exc:
        return (a_req, False, None, None, f"failed: {exc}")


def cmd_plot(args) -> int:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    cfg = _config_from(args)
    out = cfg.out_dir()
    unknowns, potential, period, _ = refine.load_refined(args.solution_file)
    fund = refine.fundamental_trajectory(unknowns, potential, period)
    if fund.times.size == 0:
        raise RefinementError("empty trajectory")
    full = refine.reconstruct_full_orbit(fund, seam_tol=np.inf)

    fig, ax = plt.subplots(figsize=(7, 4.2))
    curve = full.positions[:, 0]
    ax.plot(curve[:, 0], curve[:, 1], color="0.8", lw=1.0, zorder=1,
            label="eight (full period)")
    colors = ["tab:red", "tab:green", "tab:blue"]
    for j in range(3):
        arc = fund.positions[:, j]
        ax.plot(arc[:, 0], arc[:, 1], color=colors[j], lw=2.0, zorder=2,
                label=f"arc {j + 1}")
        for t_mark, tag in ((fund.t0, "s"), (fund.t1, "e")):
            state = fund.state_at(t_mark)
            px, py = state.positions[j]
            ax.plot([px], [py], "o", color=colors[j], ms=6, zorder=3)
            ax.annotate(f"{j + 1}{tag}", (px, py), textcoords="offset points",
                        xytext=(6, 5), fontsize=9)
    ax.axhline(0, color="0.9", lw=0.5)
    ax.axvline(0, color="0.9", lw=0.5)
    ax.set_aspect("equal")
    ax.legend(loc="upper right", fontsize=8)
    ax.set_title(f"figure eight, a = {potential.exponent:g}, T = {period:g}")
    target = out / "eight.svg"
    fig.savefig(target, format="svg", bbox_inches="tight")
    plt.close(fig)
    print(f"plot -> {target}")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="figure-eight",
                     description="find, refine and certify figure-eight "
                                 "three-body choreographies")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="action minimization from the seed loop")
    _add_common(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_refine = sub.add_parser("refine", help="shooting refinement of a loop file")
    p_refine.add_argument("loop_file")
    _add_common(p_refine)
    p_refine.set_defaults(func=cmd_refine)

    p_verify = sub.add_parser("verify", help="run the certification suite")
    p_verify.add_argument("solution_file")
    _add_common(p_verify)
    p_verify.set_defaults(func=cmd_verify)

    p_sweep = sub.add_parser("sweep", help="exponent continuation sweep")
    p_sweep.add_argument("exponents", nargs="+",
                         help="exponents, e.g. -- -2.5 -1.1 -1.0")
    _add_common(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_plot = sub.add_parser("plot", help="SVG of the eight with labeled arcs")
    p_plot.add_argument("solution_file")
    _add_common(p_plot)
    p_plot.set_defaults(func=cmd_plot)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except json.JSONDecodeError as exc:
        print(f"error: malformed JSON input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ConvergenceError, RefinementError, CollisionError, SeamError,
            RuntimeError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
