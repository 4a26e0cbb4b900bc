"""Command line entry point: ``pose-ik {run,synth,solve,metrics}``.

Exit codes: 0 success, 1 configuration or input error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path

from . import harness
from .chain import RobotDefinition, load_robot
from .constraints import extract_human_pose, map_to_robot
from .ingestion import exponential_smooth, load_trajectory, save_trajectory, synth_demo, to_robot_frame
from .metrics import DEFAULT_DELTA, evaluate
from .solvers import Mode, SolverConfig, solve_trajectory

log = logging.getLogger("pose_ik")

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


class InputError(Exception):
    """Bad arguments, config or input files: exit code 1."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _json_safe(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _json_safe(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_json_safe(v) for v in x]
    return x


def _load_inputs(fn, *args):
    try:
        return fn(*args)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(str(exc)) from None


# -- run -----------------------------------------------------------------------


def cmd_run(args) -> int:
    cfg = harness.ExperimentConfig.from_file(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_dir = args.out
    if args.workers is not None:
        cfg.workers = args.workers
    report = harness.run_experiment(cfg)
    out = Path(cfg.output_dir)
    written = harness.emit_report(report, out, timing=args.timing)
    written += harness.emit_plot_data(report, out, figures=not args.no_figures)
    for p in written:
        print(p)
    if report.failed:
        log.warning("%d of %d rows failed", len(report.failed), len(report.rows))
    if len(report.failed) == len(report.rows):
        log.error("every row failed")
        return EXIT_RUNTIME
    return EXIT_OK


# -- synth ---------------------------------------------------------------------


def cmd_synth(args) -> int:
    if args.n < 1 or args.frames < 2:
        raise InputError("--n must be >= 1 and --frames >= 2")
    if args.task not in harness.SYNTH_TASKS:
        raise InputError(f"unknown task {args.task!r}; choose from {', '.join(harness.SYNTH_TASKS)}")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for k in range(args.n):
        traj = synth_demo(args.task, args.frames, seed=args.seed * 1000 + k)
        print(save_trajectory(traj, out / f"{args.task}-{k:02d}.jsonl"))
    return EXIT_OK


# -- solve ---------------------------------------------------------------------


def cmd_solve(args) -> int:
    robot = _load_inputs(load_robot, args.robot)
    traj = _load_inputs(load_trajectory, args.traj, args.arm)
    try:
        mode = Mode.parse(args.method)
        eta = 0 if mode is not Mode.PICS else args.eta
        cfg = SolverConfig(args.max_iterations, args.tolerance, eta, mode)
        if not 0 < args.alpha <= 1:
            raise ValueError("--alpha must be in (0, 1]")
    except ValueError as exc:
        raise InputError(str(exc)) from None
    human = to_robot_frame(exponential_smooth(traj, args.alpha), robot.transform)
    constraints = None if mode is Mode.FABRIK else [map_to_robot(extract_human_pose(*p), robot) for p in human.points]
    sols = solve_trajectory(robot, human, constraints, cfg)

    stream = open(args.out, "w") if args.out else sys.stdout
    try:
        header = {
            "robot": robot.to_dict(),
            "trajectory": str(args.traj),
            "task": traj.task,
            "arm": traj.arm,
            "method": mode.value,
            "eta": eta if mode is not Mode.FABRIK else None,
            "smoothing_alpha": args.alpha,
        }
        stream.write(json.dumps(header) + "\n")
        for i, (t, s) in enumerate(zip(human.t.tolist(), sols)):
            stream.write(json.dumps(_json_safe({"frame": i, "t": t, **s.to_dict()})) + "\n")
    finally:
        if stream is not sys.stdout:
            stream.close()
    return EXIT_OK


# -- metrics -------------------------------------------------------------------


def _read_solution_stream(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty solution stream")
    header = json.loads(lines[0])
    if "robot" not in header:
        raise ValueError(f"{path}: first line must be the solve header")
    frames = [json.loads(ln) for ln in lines[1:]]
    return header, [f["joints"] for f in frames]


def cmd_metrics(args) -> int:
    traj = _load_inputs(load_trajectory, args.human, args.arm)
    header, joints = _load_inputs(_read_solution_stream, args.robot_solution)
    robot = _load_inputs(RobotDefinition.from_dict, header["robot"])
    if len(joints) != len(traj):
        raise InputError(f"{len(traj)} human frames but {len(joints)} robot frames")
    if not args.delta > 0:
        raise InputError("--delta must be positive")
    alpha = args.alpha if args.alpha is not None else header.get("smoothing_alpha", 0.3)
    human = to_robot_frame(exponential_smooth(traj, alpha), robot.transform)

    roi_spec = None
    if args.roi:
        roi_spec = _load_inputs(lambda p: json.loads(Path(p).read_text()), args.roi)
    else:
        roi_spec = harness.default_rois().get(traj.task)
    roi = _load_inputs(harness.resolve_roi, roi_spec, robot) if roi_spec else None

    report = evaluate(human.points, joints, robot.constrained_joints, roi, args.delta)
    out = report.to_dict()
    if not args.per_frame:
        out.pop("per_frame")
    out = {"robot": robot.name, "method": header.get("method"), "eta": header.get("eta"), "delta": args.delta, **out}
    print(json.dumps(_json_safe(out), indent=1))
    return EXIT_OK


# -- entry ---------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="pose-ik", description="Octant-constrained pose imitation for robot arms.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run an experiment grid and write reports and figures")
    r.add_argument("--config", required=True)
    r.add_argument("--seed", type=int)
    r.add_argument("--out")
    r.add_argument("--workers", type=int)
    r.add_argument("--no-figures", action="store_true", help="skip PNG rendering")
    r.add_argument("--timing", action="store_true", help="also write timing.csv (not reproducible)")
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("synth", help="write seeded synthetic demonstrations")
    s.add_argument("--task", required=True)
    s.add_argument("--n", type=int, default=10)
    s.add_argument("--frames", type=int, default=60)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("solve", help="solve one trajectory and print a JSON Lines solution stream")
    v.add_argument("--robot", required=True, help="robot JSON file or builtin:<name>")
    v.add_argument("--traj", required=True)
    v.add_argument("--arm", choices=("left", "right"))
    v.add_argument("--method", default="pic")
    v.add_argument("--eta", type=int, default=1)
    v.add_argument("--max-iterations", type=int, default=20)
    v.add_argument("--tolerance", type=float, default=1e-3)
    v.add_argument("--alpha", type=float, default=0.3, help="smoothing factor; 1 disables smoothing")
    v.add_argument("--out", help="write the stream here instead of stdout")
    v.set_defaults(func=cmd_solve)

    m = sub.add_parser("metrics", help="score a solution stream against its human demonstration")
    m.add_argument("--human", required=True)
    m.add_argument("--robot-solution", required=True)
    m.add_argument("--arm", choices=("left", "right"))
    m.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    m.add_argument("--alpha", type=float, help="defaults to the value recorded by solve")
    m.add_argument("--roi", help="ROI spec JSON in capture coordinates; defaults to the task's")
    m.add_argument("--per-frame", action="store_true")
    m.set_defaults(func=cmd_metrics)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except InputError as exc:
        print(f"pose-ik: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (InputError, harness.ConfigError) as exc:
        print(f"pose-ik: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"pose-ik: failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
