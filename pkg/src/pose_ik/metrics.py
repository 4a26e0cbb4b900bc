"""Pose accuracy and percentage of occlusion/obstruction over a region of interest."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from .chain import WorkspaceTransform
from .geom import angle_between, as_vec3

DEFAULT_DELTA = math.radians(10.0) ** 2

Segment2D = Tuple[Tuple[float, float], Tuple[float, float]]


class NoGatedFrames(ValueError):
    def __init__(self, message: str = "no frames over ROI"):
        super().__init__(message)


@dataclass(frozen=True)
class PoseAngleSeries:
    values: np.ndarray
    source: str = "human"

    def __post_init__(self):
        v = np.array(self.values, dtype=float).reshape(-1)
        if np.any((v < 0) | (v > math.pi)) or not np.all(np.isfinite(v)):
            raise ValueError("pose angles must lie in [0, pi]")
        if self.source not in ("human", "robot"):
            raise ValueError(f"source must be 'human' or 'robot', got {self.source!r}")
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True, eq=False)
class ROI:
    """Rectangle [0, width] x [0, height] on a plane.

    ``u`` is the in-plane x axis and ``normal`` the plane normal; the height
    axis is ``normal x u``.
    """

    origin: np.ndarray
    u: np.ndarray
    normal: np.ndarray
    width: float
    height: float

    def __post_init__(self):
        o = as_vec3(self.origin, "origin").copy()
        u = as_vec3(self.u, "u").copy()
        n = as_vec3(self.normal, "normal").copy()
        if abs(np.linalg.norm(u) - 1) > 1e-9 or abs(np.linalg.norm(n) - 1) > 1e-9 or abs(u.dot(n)) > 1e-9:
            raise ValueError("ROI axes must be orthonormal")
        if not (self.width > 0 and self.height > 0):
            raise ValueError("ROI width and height must be positive")
        object.__setattr__(self, "origin", o)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "normal", n)
        object.__setattr__(self, "width", float(self.width))
        object.__setattr__(self, "height", float(self.height))

    def __eq__(self, other) -> bool:
        if not isinstance(other, ROI):
            return NotImplemented
        return self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(repr(self.to_dict()))

    @property
    def v(self) -> np.ndarray:
        return np.cross(self.normal, self.u)

    @property
    def area(self) -> float:
        return self.width * self.height

    def plane_coords(self, points) -> np.ndarray:
        """(x, y) of each point's orthographic projection; y is the height."""
        p = np.asarray(points, dtype=float) - self.origin
        return np.stack([p @ self.u, p @ self.v], axis=-1)

    def transformed(self, tf: WorkspaceTransform, size=None) -> "ROI":
        """The same rectangle after a workspace transform. Reflections keep the
        height axis pointing the same way relative to the scene."""
        u = tf.apply_direction(self.u)
        v = tf.apply_direction(self.v)
        w, h = (self.width * tf.scale, self.height * tf.scale) if size is None else size
        return ROI(tf.apply(self.origin), u, np.cross(u, v), w, h)

    def to_dict(self) -> dict:
        return {
            "origin": self.origin.tolist(),
            "u": self.u.tolist(),
            "normal": self.normal.tolist(),
            "width": self.width,
            "height": self.height,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ROI":
        return cls(d["origin"], d["u"], d["normal"], d["width"], d["height"])


def pose_angle(shoulder, elbow, wrist) -> float:
    """Angle between the upper-arm and forearm links (0 for a straight arm)."""
    s, e, w = (as_vec3(p) for p in (shoulder, elbow, wrist))
    return angle_between(e - s, w - e)


def pose_accuracy(human, robot, delta: float = DEFAULT_DELTA) -> float:
    h = human.values if isinstance(human, PoseAngleSeries) else np.asarray(human, dtype=float)
    r = robot.values if isinstance(robot, PoseAngleSeries) else np.asarray(robot, dtype=float)
    if h.shape != r.shape:
        raise ValueError(f"series lengths differ: {h.size} vs {r.size}")
    if h.size == 0:
        raise ValueError("empty series")
    if not delta > 0:
        raise ValueError("delta must be positive")
    return float(np.mean((h - r) ** 2 < delta))


def project_link(p1, p2, roi: ROI) -> Segment2D:
    a, b = roi.plane_coords(np.stack([as_vec3(p1), as_vec3(p2)]))
    return (float(a[0]), float(a[1])), (float(b[0]), float(b[1]))


def clamped_area(seg: Segment2D, width: float, height: float) -> float:
    """Integral of the segment's line, clamped to [0, height], over its x
    extent clipped to [0, width]. Vertical segments contribute nothing."""
    (x1, y1), (x2, y2) = seg
    if x1 == x2:
        return 0.0
    if x1 > x2:
        x1, y1, x2, y2 = x2, y2, x1, y1
    lo, hi = max(x1, 0.0), min(x2, width)
    if lo >= hi:
        return 0.0
    m = (y2 - y1) / (x2 - x1)
    b = y1 - m * x1

    def g(x):
        return min(height, max(0.0, m * x + b))

    # clamp(f) is linear between consecutive breakpoints, so trapezoids are exact
    xs = [lo, hi]
    if m != 0.0:
        for level in (0.0, height):
            xc = (level - b) / m
            if lo < xc < hi:
                xs.append(xc)
    xs.sort()
    return math.fsum((xb - xa) * (g(xa) + g(xb)) / 2.0 for xa, xb in zip(xs, xs[1:]))


def occlusion_percentage(links: Sequence, roi: ROI) -> float:
    """Sum of the clamped areas under each projected link over the ROI area.

    ``links`` holds 3D segments ``(p1, p2)``. Overlaps are counted once per
    link, so the result can exceed 1.
    """
    total = 0.0
    for p1, p2 in links:
        total += clamped_area(project_link(p1, p2, roi), roi.width, roi.height)
    return total / roi.area


def chain_links(joints) -> list:
    j = np.asarray(joints, dtype=float)
    return [(j[i], j[i + 1]) for i in range(len(j) - 1)]


def gate_frames(wrists, roi: ROI) -> np.ndarray:
    """True where the wrist projects inside the closed ROI rectangle."""
    xy = roi.plane_coords(np.asarray(wrists, dtype=float).reshape(-1, 3))
    return (xy[:, 0] >= 0) & (xy[:, 0] <= roi.width) & (xy[:, 1] >= 0) & (xy[:, 1] <= roi.height)


def task_po(link_sets: Sequence[Sequence], wrists, roi: ROI) -> float:
    """Mean occlusion over frames where the human wrist hovers over the ROI.

    ``link_sets[i]`` is the list of 3D links for frame i: every link of a
    robot chain, or upper arm and forearm for the human columns.
    """
    mask = gate_frames(wrists, roi)
    if len(link_sets) != mask.size:
        raise ValueError(f"{len(link_sets)} frames of links but {mask.size} wrist positions")
    if not mask.any():
        raise NoGatedFrames()
    return float(np.mean([occlusion_percentage(link_sets[i], roi) for i in np.flatnonzero(mask)]))


@dataclass
class MetricsReport:
    pacc: float
    po: float
    frames_evaluated: int
    frames_gated: int
    per_frame: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "pacc": self.pacc,
            "po": self.po,
            "frames_evaluated": self.frames_evaluated,
            "frames_gated": self.frames_gated,
            "per_frame": self.per_frame,
        }


def evaluate(human_points, robot_joints, constrained_joints, roi: ROI = None, delta: float = DEFAULT_DELTA) -> MetricsReport:
    """Per-frame pose angles, Pacc, and (with an ROI) gated PO of the robot.

    ``human_points`` is (n, 3, 3) shoulder/elbow/wrist; ``robot_joints`` is a
    sequence of (N, 3) chains; ``constrained_joints`` holds 1-based r_s, r_e, r_w.
    """
    hp = np.asarray(human_points, dtype=float)
    rs, re, rw = constrained_joints
    th = np.array([pose_angle(*p) for p in hp])
    tr = np.array([pose_angle(j[rs - 1], j[re - 1], j[rw - 1]) for j in robot_joints])
    pacc = pose_accuracy(PoseAngleSeries(th, "human"), PoseAngleSeries(tr, "robot"), delta)
    per_frame = [
        {"frame": i, "theta_human": float(a), "theta_robot": float(b), "hit": bool((a - b) ** 2 < delta)}
        for i, (a, b) in enumerate(zip(th, tr))
    ]
    po = float("nan")
    gated = 0
    if roi is not None:
        mask = gate_frames(hp[:, 2], roi)
        gated = int(mask.sum())
        for i, rec in enumerate(per_frame):
            rec["gated"] = bool(mask[i])
            if mask[i]:
                rec["po"] = occlusion_percentage(chain_links(robot_joints[i]), roi)
        po = task_po([chain_links(j) for j in robot_joints], hp[:, 2], roi)
    return MetricsReport(pacc=pacc, po=po, frames_evaluated=len(per_frame), frames_gated=gated, per_frame=per_frame)
