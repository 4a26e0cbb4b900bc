"""Experiment pipeline: smooth, retarget, constrain, solve and score every
(robot, trajectory, method, eta) combination, then write reports."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .chain import RobotDefinition, load_robot
from .constraints import extract_human_pose, map_to_robot
from .ingestion import TASKS, SkeletonTrajectory, exponential_smooth, load_trajectory, synth_demo, to_robot_frame
from .metrics import DEFAULT_DELTA, ROI, chain_links, gate_frames, occlusion_percentage, pose_accuracy, pose_angle
from .solvers import Mode, SolverConfig, solve_trajectory

log = logging.getLogger(__name__)

SYNTH_TASKS = TASKS[:5]
ROW_COLUMNS = (
    "robot",
    "task",
    "trajectory",
    "method",
    "eta",
    "pacc",
    "po",
    "po_human",
    "mean_residual",
    "convergence_rate",
    "mean_iterations",
    "frames",
    "frames_gated",
    "error",
)
AGG_COLUMNS = ("robot", "task", "method", "eta", "rows", "pacc", "po", "po_human", "mean_residual", "convergence_rate", "mean_iterations")
METRIC_FIELDS = ("pacc", "po", "po_human", "mean_residual", "convergence_rate", "mean_iterations")


class ConfigError(ValueError):
    pass


def default_rois() -> dict:
    return json.loads(resources.files("pose_ik.data").joinpath("tasks.json").read_text())


@dataclass
class ExperimentConfig:
    robots: List[str]
    trajectories: List[str] = field(default_factory=list)
    synth: Optional[dict] = None
    methods: List[str] = field(default_factory=lambda: ["FABRIK", "PIC", "PICS"])
    etas: List[int] = field(default_factory=lambda: [1, 2, 3])
    delta: float = DEFAULT_DELTA
    rois: Dict[str, dict] = field(default_factory=dict)
    smoothing_alpha: float = 0.3
    solver: dict = field(default_factory=dict)
    output_dir: str = "results"
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if not self.robots:
            raise ConfigError("at least one robot definition is required")
        if not self.methods:
            raise ConfigError("at least one method is required")
        try:
            self.methods = [Mode.parse(m).value for m in self.methods]
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if any(e not in (1, 2, 3) for e in self.etas):
            raise ConfigError(f"etas must be drawn from 1, 2, 3; got {self.etas}")
        if "PICS" in self.methods and not self.etas:
            raise ConfigError("PICS needs at least one eta")
        if not self.trajectories and not self.synth:
            raise ConfigError("at least one input trajectory (or a synth spec) is required")
        if self.synth:
            tasks = self.synth.get("tasks", list(SYNTH_TASKS))
            bad = [t for t in tasks if t not in SYNTH_TASKS]
            if bad:
                raise ConfigError(f"unknown synth tasks {bad}")
            if int(self.synth.get("n_demos", 10)) < 1 or int(self.synth.get("n_frames", 60)) < 2:
                raise ConfigError("synth needs n_demos >= 1 and n_frames >= 2")
        if not self.delta > 0:
            raise ConfigError("delta must be positive")
        if not 0 < self.smoothing_alpha <= 1:
            raise ConfigError("smoothing_alpha must be in (0, 1]")
        try:
            self.solver_config()
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid solver config: {exc}") from None

    def solver_config(self) -> SolverConfig:
        keys = {"max_iterations", "position_tolerance"}
        extra = set(self.solver) - keys
        if extra:
            raise ValueError(f"unknown solver keys {sorted(extra)}")
        return SolverConfig(**self.solver)

    def variants(self) -> List[Tuple[str, Optional[int]]]:
        out = []
        for m in self.methods:
            if m == "FABRIK":
                out.append(("FABRIK", None))
            elif m == "PIC":
                out.append(("PIC", 0))
            else:
                out.extend(("PICS", e) for e in sorted(set(self.etas)))
        return out

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        base = path.parent

        def resolve(p: str) -> str:
            if p.startswith("builtin:") or Path(p).is_absolute():
                return p
            return str(base / p)

        data["robots"] = [resolve(p) for p in data.get("robots", [])]
        data["trajectories"] = [resolve(p) for p in data.get("trajectories", [])]
        if "output_dir" in data:
            data["output_dir"] = resolve(data["output_dir"])
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(f"bad config field: {exc}") from None


@dataclass
class ReportRow:
    robot: str
    task: str
    trajectory: str
    method: str
    eta: Optional[int]
    pacc: Optional[float] = None
    po: Optional[float] = None
    po_human: Optional[float] = None
    mean_residual: Optional[float] = None
    convergence_rate: Optional[float] = None
    mean_iterations: Optional[float] = None
    frames: int = 0
    frames_gated: int = 0
    error: str = ""
    ms_per_frame: Optional[float] = field(default=None, compare=False)

    @property
    def ok(self) -> bool:
        return not self.error

    @property
    def key(self) -> tuple:
        return (self.robot, self.task, self.trajectory, _method_rank(self.method, self.eta))


def _method_rank(method: str, eta: Optional[int]) -> tuple:
    return ({"FABRIK": 0, "PIC": 1, "PICS": 2}[method], -1 if eta is None else eta)


@dataclass
class ExperimentReport:
    rows: List[ReportRow]
    task_means: List[dict] = field(default_factory=list)
    method_means: List[dict] = field(default_factory=list)
    seed: int = 0

    def __post_init__(self):
        self.rows = sorted(self.rows, key=lambda r: r.key)
        if not self.task_means and not self.method_means:
            self.task_means, self.method_means = aggregate(self.rows)

    @property
    def failed(self) -> List[ReportRow]:
        return [r for r in self.rows if not r.ok]

    def select(self, method: str, eta: Optional[int] = None, task_prefix: str = "") -> List[ReportRow]:
        return [
            r
            for r in self.rows
            if r.ok and r.method == method and (eta is None or r.eta == eta) and r.task.startswith(task_prefix)
        ]

    def mean(self, metric: str, method: str, eta: Optional[int] = None, task_prefix: str = "") -> float:
        vals = [getattr(r, metric) for r in self.select(method, eta, task_prefix)]
        vals = [v for v in vals if v is not None]
        return float(np.mean(vals)) if vals else float("nan")

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "rows": [{k: getattr(r, k) for k in ROW_COLUMNS} for r in self.rows],
            "task_means": self.task_means,
            "method_means": self.method_means,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        rows = [ReportRow(**r) for r in d["rows"]]
        return cls(rows, d["task_means"], d["method_means"], d.get("seed", 0))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ExperimentReport):
            return NotImplemented
        return self.to_dict() == other.to_dict()


def _mean_or_none(vals) -> Optional[float]:
    vals = [v for v in vals if v is not None]
    return math.fsum(vals) / len(vals) if vals else None


def aggregate(rows: Sequence[ReportRow]) -> Tuple[List[dict], List[dict]]:
    """Per (robot, task, method, eta) cell means and per-method means."""
    ok = [r for r in rows if r.ok]
    cells: Dict[tuple, List[ReportRow]] = {}
    methods: Dict[tuple, List[ReportRow]] = {}
    for r in ok:
        cells.setdefault((r.robot, r.task, r.method, r.eta), []).append(r)
        methods.setdefault((r.method, r.eta), []).append(r)

    def summarise(key_fields: dict, group: List[ReportRow]) -> dict:
        out = dict(key_fields)
        out["rows"] = len(group)
        for m in METRIC_FIELDS:
            out[m] = _mean_or_none([getattr(r, m) for r in group])
        return out

    task_means = [
        summarise({"robot": k[0], "task": k[1], "method": k[2], "eta": k[3]}, g)
        for k, g in sorted(cells.items(), key=lambda kv: (kv[0][0], kv[0][1], _method_rank(kv[0][2], kv[0][3])))
    ]
    method_means = [
        summarise({"robot": "*", "task": "*", "method": k[0], "eta": k[1]}, g)
        for k, g in sorted(methods.items(), key=lambda kv: _method_rank(*kv[0]))
    ]
    return task_means, method_means


# -- pipeline ------------------------------------------------------------------


def resolve_roi(spec: dict, robot: RobotDefinition) -> ROI:
    """Task ROI (capture-frame spec) carried into the robot's workspace."""
    size = spec.get("size")
    base = ROI(spec["origin"], spec["u"], spec["normal"], spec.get("width", 1.0), spec.get("height", 1.0))
    if size == "max_reach":
        return base.transformed(robot.transform, (robot.max_reach, robot.max_reach))
    if size is not None:
        raise ValueError(f"unknown ROI size rule {size!r}")
    return base.transformed(robot.transform)


@dataclass
class _Prepared:
    traj_id: str
    task: str
    human: SkeletonTrajectory  # smoothed, in robot frame
    constraints: list
    theta_human: np.ndarray
    roi: Optional[ROI]
    gate: Optional[np.ndarray]
    po_human: Optional[float]


def prepare(traj: SkeletonTrajectory, traj_id: str, robot: RobotDefinition, roi_spec: Optional[dict], alpha: float) -> _Prepared:
    human = to_robot_frame(exponential_smooth(traj, alpha), robot.transform)
    constraints = [map_to_robot(extract_human_pose(*p), robot) for p in human.points]
    theta = np.array([pose_angle(*p) for p in human.points])
    roi = gate = po_human = None
    if roi_spec is not None:
        roi = resolve_roi(roi_spec, robot)
        gate = gate_frames(human.wrist, roi)
        if gate.any():
            po_human = float(
                np.mean([occlusion_percentage(chain_links(human.points[i]), roi) for i in np.flatnonzero(gate)])
            )
    return _Prepared(traj_id, traj.task, human, constraints, theta, roi, gate, po_human)


def run_variant(robot: RobotDefinition, prep: _Prepared, method: str, eta: Optional[int], base_cfg: SolverConfig, delta: float) -> ReportRow:
    row = ReportRow(robot.name, prep.task, prep.traj_id, method, eta, frames=len(prep.human))
    try:
        cfg = SolverConfig(base_cfg.max_iterations, base_cfg.position_tolerance, eta or 0, Mode(method))
        t0 = time.perf_counter()
        sols = solve_trajectory(robot, prep.human, prep.constraints, cfg)
        row.ms_per_frame = (time.perf_counter() - t0) * 1e3 / len(sols)
        rs, re, rw = robot.constrained_joints
        theta_r = np.array([pose_angle(s.chain.joints[rs - 1], s.chain.joints[re - 1], s.chain.joints[rw - 1]) for s in sols])
        row.pacc = pose_accuracy(prep.theta_human, theta_r, delta)
        row.mean_residual = float(np.mean([s.residual for s in sols]))
        row.convergence_rate = float(np.mean([s.converged for s in sols]))
        row.mean_iterations = float(np.mean([s.iterations_used for s in sols]))
        if prep.roi is not None:
            row.frames_gated = int(prep.gate.sum())
            if not prep.gate.any():
                raise ValueError("no frames over ROI")
            row.po_human = prep.po_human
            row.po = float(np.mean([occlusion_percentage(chain_links(sols[i].chain.joints), prep.roi) for i in np.flatnonzero(prep.gate)]))
    except Exception as exc:  # a failing stage only sinks its own row
        row.error = f"{type(exc).__name__}: {exc}"
        for name in METRIC_FIELDS:
            setattr(row, name, None)
    return row


def _inputs(cfg: ExperimentConfig) -> List[Tuple[str, SkeletonTrajectory]]:
    items = []
    for p in cfg.trajectories:
        items.append((Path(p).stem, load_trajectory(p)))
    if cfg.synth:
        n_demos = int(cfg.synth.get("n_demos", 10))
        n_frames = int(cfg.synth.get("n_frames", 60))
        for task in cfg.synth.get("tasks", list(SYNTH_TASKS)):
            for k in range(n_demos):
                items.append((f"{task}-{k:02d}", synth_demo(task, n_frames, seed=cfg.seed * 1000 + k)))
    return items


def _run_unit(args) -> List[ReportRow]:
    robot, traj_id, traj, roi_spec, cfg = args
    solver_cfg = cfg.solver_config()
    try:
        prep = prepare(traj, traj_id, robot, roi_spec, cfg.smoothing_alpha)
    except Exception as exc:
        return [
            ReportRow(robot.name, traj.task, traj_id, m, e, frames=len(traj), error=f"{type(exc).__name__}: {exc}")
            for m, e in cfg.variants()
        ]
    return [run_variant(robot, prep, m, e, solver_cfg, cfg.delta) for m, e in cfg.variants()]


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    try:
        robots = [load_robot(p) for p in cfg.robots]
        inputs = _inputs(cfg)
    except (OSError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    rois = default_rois()
    rois.update(cfg.rois)
    units = [(robot, tid, traj, rois.get(traj.task), cfg) for robot in robots for tid, traj in inputs]
    rows: List[ReportRow] = []
    if cfg.workers > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            for chunk in pool.map(_run_unit, units):
                rows.extend(chunk)
    else:
        for unit in units:
            rows.extend(_run_unit(unit))
    for r in rows:
        if r.error:
            log.warning("row %s/%s/%s/%s failed: %s", r.robot, r.trajectory, r.method, r.eta, r.error)
    return ExperimentReport(rows, seed=cfg.seed)


# -- output --------------------------------------------------------------------


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _csv_text(columns: Sequence[str], records: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_cell(rec.get(c)) for c in columns])
    return buf.getvalue()


def emit_report(report: ExperimentReport, out_dir, formats=("csv", "json"), timing: bool = False) -> List[Path]:
    """Writes report.csv / summary.csv and report.json; bytes depend only on
    the report. With ``timing`` the wall-clock costs also go to timing.csv,
    which is not reproducible."""
    if not report.rows:
        raise ValueError("cannot emit an empty report")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        rows = [{k: getattr(r, k) for k in ROW_COLUMNS} for r in report.rows]
        (out / "report.csv").write_text(_csv_text(ROW_COLUMNS, rows))
        (out / "summary.csv").write_text(_csv_text(AGG_COLUMNS, report.task_means + report.method_means))
        written += [out / "report.csv", out / "summary.csv"]
    if "json" in formats:
        (out / "report.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
        written.append(out / "report.json")
    unknown = set(formats) - {"csv", "json"}
    if unknown:
        raise ValueError(f"unknown report formats {sorted(unknown)}")
    if not timing:
        return written
    rows = [
        {"robot": r.robot, "trajectory": r.trajectory, "method": r.method, "eta": r.eta, "ms_per_frame": r.ms_per_frame}
        for r in report.rows
    ]
    (out / "timing.csv").write_text(_csv_text(("robot", "trajectory", "method", "eta", "ms_per_frame"), rows))
    written.append(out / "timing.csv")
    return written


ETA_LEVELS = (0, 1, 2, 3)


def softening_series(report: ExperimentReport, metric: str) -> dict:
    """Mean and population std of a metric per softening level (0 = PIC),
    plus the FABRIK reference."""

    def stats(rows):
        vals = [getattr(r, metric) for r in rows if getattr(r, metric) is not None]
        if not vals:
            return None
        a = np.asarray(vals)
        return {"mean": float(a.mean()), "std": float(a.std()), "n": len(vals)}

    points, missing = [], []
    for eta in ETA_LEVELS:
        rows = report.select("PIC") if eta == 0 else report.select("PICS", eta)
        s = stats(rows)
        if s is None:
            missing.append(eta)
            continue
        points.append({"eta": eta, "label": "PIC" if eta == 0 else f"PICs eta={eta}", **s})
    return {
        "metric": metric,
        "points": points,
        "fabrik": stats(report.select("FABRIK")),
        "complete": not missing,
        "missing_eta": missing,
    }


def emit_plot_data(report: ExperimentReport, out_dir, figures: bool = True) -> List[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for metric in ("pacc", "po"):
        series = softening_series(report, metric)
        if not series["complete"]:
            log.warning("%s series is missing eta levels %s", metric, series["missing_eta"])
        path = out / f"{metric}_vs_eta.json"
        path.write_text(json.dumps(series, indent=1) + "\n")
        written.append(path)
        if figures:
            from .plotting import plot_softening

            written.append(plot_softening(series, out / f"{metric}_vs_eta.png"))
    return written
