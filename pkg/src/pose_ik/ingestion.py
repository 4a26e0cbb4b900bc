"""Demonstration trajectories: JSON Lines IO, exponential smoothing, the
capture-to-robot workspace transform and a seeded synthetic demo generator."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional

import numpy as np

from .chain import WorkspaceTransform

TASKS = ("incision-straight", "incision-curve", "assembly-1", "assembly-2", "assembly-3", "other")
ARMS = ("left", "right")
JOINT_FIELDS = ("shoulder", "elbow", "wrist")

UPPER_ARM = 30.0
FOREARM = 28.0

__all__ = [
    "ARMS",
    "JOINT_FIELDS",
    "TASKS",
    "SkeletonFrame",
    "SkeletonTrajectory",
    "TrajectoryFormatError",
    "WorkspaceTransform",
    "exponential_smooth",
    "load_trajectory",
    "save_trajectory",
    "synth_demo",
    "to_robot_frame",
]


class TrajectoryFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SkeletonFrame:
    t: float
    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray


@dataclass(frozen=True, eq=False)
class SkeletonTrajectory:
    """One arm over time. ``points`` has shape (n_frames, 3, 3), ordered
    shoulder, elbow, wrist."""

    t: np.ndarray
    points: np.ndarray
    task: str = "other"
    arm: str = "right"
    units: str = "cm"

    def __post_init__(self):
        t = np.array(self.t, dtype=float)
        pts = np.array(self.points, dtype=float)
        if t.ndim != 1 or t.size == 0:
            raise ValueError("a trajectory needs at least one frame")
        if pts.shape != (t.size, 3, 3):
            raise ValueError(f"points must have shape ({t.size}, 3, 3), got {pts.shape}")
        if np.any(np.diff(t) <= 0):
            raise ValueError("non-monotone timestamps")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(pts))):
            raise ValueError("trajectory contains non-finite values")
        if self.task not in TASKS:
            raise ValueError(f"unknown task label {self.task!r}")
        if self.arm not in ARMS:
            raise ValueError(f"unknown arm {self.arm!r}")
        t.setflags(write=False)
        pts.setflags(write=False)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.t.size

    @property
    def shoulder(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def elbow(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def wrist(self) -> np.ndarray:
        return self.points[:, 2]

    @property
    def frames(self) -> List[SkeletonFrame]:
        return [SkeletonFrame(float(t), p[0], p[1], p[2]) for t, p in zip(self.t, self.points)]

    def replace_points(self, points) -> "SkeletonTrajectory":
        return SkeletonTrajectory(self.t, points, self.task, self.arm, self.units)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SkeletonTrajectory):
            return NotImplemented
        return (
            (self.task, self.arm, self.units) == (other.task, other.arm, other.units)
            and np.array_equal(self.t, other.t)
            and np.array_equal(self.points, other.points)
        )


def _fail(path, lineno: int, msg: str):
    raise TrajectoryFormatError(f"{path}:{lineno}: {msg}")


def load_trajectory(path, arm: Optional[str] = None) -> SkeletonTrajectory:
    """Parses a JSON Lines trajectory.

    The first line may be a header ``{"task": ..., "units": ...}``. Each other
    line is one frame. Files holding both arms need ``arm`` to pick one.
    """
    path = Path(path)
    lines = path.read_text().splitlines()
    header = {}
    rows = []
    frame_idx = 0
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            _fail(path, lineno, f"invalid JSON ({exc.msg})")
        if not isinstance(obj, dict):
            _fail(path, lineno, "expected a JSON object")
        if "t" not in obj:
            if rows or header:
                _fail(path, lineno, "missing field 't'")
            header = obj
            continue
        try:
            t = float(obj["t"])
            row_arm = obj.get("arm", "right")
            pts = []
            for name in JOINT_FIELDS:
                p = [float(c) for c in obj[name]]
                if len(p) != 3:
                    _fail(path, lineno, f"frame {frame_idx}: field '{name}' needs 3 coordinates")
                pts.append(p)
        except KeyError as exc:
            _fail(path, lineno, f"frame {frame_idx}: missing field {exc}")
        except (TypeError, ValueError) as exc:
            if isinstance(exc, TrajectoryFormatError):
                raise
            _fail(path, lineno, f"frame {frame_idx}: bad value ({exc})")
        if not math.isfinite(t):
            _fail(path, lineno, f"frame {frame_idx}: field 't' is not finite")
        for name, p in zip(JOINT_FIELDS, pts):
            if not all(math.isfinite(c) for c in p):
                _fail(path, lineno, f"frame {frame_idx}: field '{name}' has a non-finite coordinate")
        rows.append((lineno, row_arm, t, pts))
        frame_idx += 1
    if not rows:
        raise TrajectoryFormatError(f"{path}: no frames")

    arms = sorted({r[1] for r in rows})
    if arm is None:
        if len(arms) > 1:
            raise TrajectoryFormatError(f"{path}: file holds arms {arms}; choose one")
        arm = arms[0]
    rows = [r for r in rows if r[1] == arm]
    if not rows:
        raise TrajectoryFormatError(f"{path}: no frames for arm {arm!r}")
    for (_, _, t0, _), (lineno, _, t1, _) in zip(rows, rows[1:]):
        if not t1 > t0:
            _fail(path, lineno, "non-monotone timestamps")
    return SkeletonTrajectory(
        t=[r[2] for r in rows],
        points=[r[3] for r in rows],
        task=header.get("task", "other"),
        arm=arm,
        units=header.get("units", "cm"),
    )


def dumps_trajectory(traj: SkeletonTrajectory) -> str:
    out = [json.dumps({"task": traj.task, "units": traj.units})]
    for t, p in zip(traj.t.tolist(), traj.points.tolist()):
        out.append(json.dumps({"t": t, "arm": traj.arm, "shoulder": p[0], "elbow": p[1], "wrist": p[2]}))
    return "\n".join(out) + "\n"


def save_trajectory(traj: SkeletonTrajectory, path) -> Path:
    path = Path(path)
    path.write_text(dumps_trajectory(traj))
    return path


def exponential_smooth(traj: SkeletonTrajectory, alpha: float = 0.3) -> SkeletonTrajectory:
    """s_0 = x_0, s_t = alpha * x_t + (1 - alpha) * s_{t-1}, per joint and axis."""
    if not 0 < alpha <= 1:
        raise ValueError(f"smoothing factor must be in (0, 1], got {alpha}")
    x = traj.points
    s = np.empty_like(x)
    s[0] = x[0]
    for i in range(1, len(x)):
        s[i] = alpha * x[i] + (1 - alpha) * s[i - 1]
    return traj.replace_points(s)


def to_robot_frame(traj: SkeletonTrajectory, tf: WorkspaceTransform) -> SkeletonTrajectory:
    return traj.replace_points(tf.apply(traj.points))


# -- synthetic demonstrations -------------------------------------------------
#
# Capture frame: z up, y pointing from the person toward the table, x to the
# person's right. The right shoulder sits at the origin and the table top at
# z = TABLE_Z. Every demo keeps the torso still and moves only the arm.

TABLE_Z = -35.0
PAD_X = -15.0  # incision pad centre, in front of and inside the right shoulder


def _elbow_for(shoulder, wrist, swivel: float) -> np.ndarray:
    """Elbow on the circle of valid positions, ``swivel`` radians outward
    from the lowest point."""
    axis = wrist - shoulder
    d = float(np.linalg.norm(axis))
    if not abs(UPPER_ARM - FOREARM) < d < UPPER_ARM + FOREARM:
        raise ValueError(f"wrist at distance {d:.3f} is out of the arm's reach")
    a = axis / d
    along = (UPPER_ARM**2 - FOREARM**2 + d * d) / (2 * d)
    radius = math.sqrt(UPPER_ARM**2 - along**2)
    down = np.array([0.0, 0.0, -1.0])
    u = down - down.dot(a) * a
    u /= np.linalg.norm(u)
    v = np.cross(a, u)
    if v[0] < 0:
        v = -v
    return shoulder + along * a + radius * (math.cos(swivel) * u + math.sin(swivel) * v)


def _ease(n: int) -> np.ndarray:
    tau = np.linspace(0.0, 1.0, n)
    return 0.5 - 0.5 * np.cos(np.pi * tau)


def _wrist_path(kind: str, n: int, rng: np.random.Generator) -> np.ndarray:
    s = _ease(n)[:, None]
    jitter = rng.uniform(-1.0, 1.0, size=3) * np.array([2.0, 2.0, 1.0])
    hover = TABLE_Z + 3.0 + 0.5 * jitter[2]
    if kind == "incision-straight":
        start = np.array([PAD_X - 7.0, 36.0, hover]) + jitter * [1, 1, 0]
        stop = np.array([PAD_X + 7.0, 36.0 + rng.uniform(-3, 3), hover]) + jitter * [1, 1, 0]
        return start + s * (stop - start)
    if kind == "incision-curve":
        centre = np.array([PAD_X, 31.0, hover]) + jitter * [1, 1, 0]
        radius = 7.0 + rng.uniform(-1, 1)
        ang = np.deg2rad(200.0) + s[:, 0] * np.deg2rad(140.0)
        return centre + radius * np.stack([np.cos(ang), -np.sin(ang), np.zeros_like(ang)], axis=1)
    pick = np.array([22.0, 24.0, TABLE_Z + 3.0]) + jitter
    goals = {
        "assembly-1": np.array([0.0, 42.0, TABLE_Z + 14.0]),  # frontal plane
        "assembly-2": np.array([24.0, 34.0, TABLE_Z + 12.0]),  # side plane
        "assembly-3": np.array([4.0, 34.0, TABLE_Z + 6.0]),  # table plane
    }
    goal = goals[kind] + rng.uniform(-1.5, 1.5, size=3)
    return pick + s * (goal - pick)


def synth_demo(kind: str, n_frames: int = 60, seed: int = 0, fps: float = 30.0) -> SkeletonTrajectory:
    """Seeded smooth right-arm demonstration for one task variant.

    Incisions sweep the wrist along a line or an arc just above the table;
    assemblies carry it from a pick pose to a task-specific alignment plane.
    Link lengths are exact (upper arm 30, forearm 28).
    """
    if kind not in TASKS or kind == "other":
        raise ValueError(f"cannot synthesise task {kind!r}")
    if n_frames < 2:
        raise ValueError("n_frames must be >= 2")
    rng = np.random.default_rng([seed, TASKS.index(kind)])
    wrist = _wrist_path(kind, n_frames, rng)
    shoulder = np.zeros(3)
    swivel0 = rng.uniform(0.8, 1.2)
    swivel1 = swivel0 + rng.uniform(-0.15, 0.15)
    swivel = swivel0 + _ease(n_frames) * (swivel1 - swivel0)
    pts = np.empty((n_frames, 3, 3))
    for i in range(n_frames):
        pts[i, 0] = shoulder
        pts[i, 1] = _elbow_for(shoulder, wrist[i], swivel[i])
        pts[i, 2] = wrist[i]
    return SkeletonTrajectory(t=np.arange(n_frames) / fps, points=pts, task=kind, arm="right")
