"""Serial kinematic chains stored as joint positions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .geom import as_vec3

LENGTH_TOL = 1e-6


@dataclass(frozen=True)
class WorkspaceTransform:
    """Per-axis sign flip, uniform scale and offset: p -> signs * scale * p + offset."""

    axis_signs: tuple = (1, 1, 1)
    offset: tuple = (0.0, 0.0, 0.0)
    scale: float = 1.0

    def __post_init__(self):
        if len(self.axis_signs) != 3 or any(s not in (-1, 1) for s in self.axis_signs):
            raise ValueError(f"axis_signs must be three entries of +/-1, got {self.axis_signs}")
        if not self.scale > 0:
            raise ValueError(f"scale must be positive, got {self.scale}")
        as_vec3(self.offset, "offset")
        object.__setattr__(self, "axis_signs", tuple(int(s) for s in self.axis_signs))
        object.__setattr__(self, "offset", tuple(float(c) for c in self.offset))
        object.__setattr__(self, "scale", float(self.scale))

    def apply(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return np.asarray(self.axis_signs, dtype=float) * self.scale * p + np.asarray(self.offset)

    def apply_direction(self, v) -> np.ndarray:
        """Maps a free vector (no offset, no scale)."""
        return np.asarray(self.axis_signs, dtype=float) * np.asarray(v, dtype=float)

    def to_dict(self) -> dict:
        return {"axis_signs": list(self.axis_signs), "offset": list(self.offset), "scale": self.scale}

    @classmethod
    def from_dict(cls, d: dict) -> "WorkspaceTransform":
        return cls(
            axis_signs=tuple(d.get("axis_signs", (1, 1, 1))),
            offset=tuple(d.get("offset", (0.0, 0.0, 0.0))),
            scale=d.get("scale", 1.0),
        )


@dataclass(frozen=True, eq=False)
class KinematicChain:
    """Joint positions (N x 3) plus the fixed link lengths between them.

    ``joints[0]`` is the base. Chains are treated as values: solvers return
    new chains instead of mutating their input.
    """

    joints: np.ndarray
    link_lengths: np.ndarray
    base: np.ndarray
    name: str = ""

    def __post_init__(self):
        joints = np.array(self.joints, dtype=float)
        lengths = np.array(self.link_lengths, dtype=float)
        if joints.ndim != 2 or joints.shape[1] != 3:
            raise ValueError(f"joints must be an (N, 3) array, got shape {joints.shape}")
        if joints.shape[0] < 3:
            raise ValueError(f"a chain needs at least 3 joints, got {joints.shape[0]}")
        if lengths.shape != (joints.shape[0] - 1,):
            raise ValueError(
                f"expected {joints.shape[0] - 1} link lengths, got {lengths.shape[0] if lengths.ndim else 0}"
            )
        if np.any(lengths <= 0):
            raise ValueError("link lengths must be positive")
        if not np.all(np.isfinite(joints)):
            raise ValueError("joint positions must be finite")
        joints.setflags(write=False)
        lengths.setflags(write=False)
        object.__setattr__(self, "joints", joints)
        object.__setattr__(self, "link_lengths", lengths)
        object.__setattr__(self, "base", as_vec3(self.base, "base").copy())

    @property
    def n_joints(self) -> int:
        return self.joints.shape[0]

    def length_errors(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.joints, axis=0), axis=1)
        return np.abs(seg - self.link_lengths)

    def is_assembled(self, tol: float = LENGTH_TOL) -> bool:
        return bool(np.all(self.length_errors() <= tol))

    def directions(self) -> np.ndarray:
        seg = np.diff(self.joints, axis=0)
        return seg / np.linalg.norm(seg, axis=1)[:, None]

    def links(self) -> list:
        return [(self.joints[i], self.joints[i + 1]) for i in range(self.n_joints - 1)]

    def with_joints(self, joints) -> "KinematicChain":
        return KinematicChain(joints, self.link_lengths, self.base, self.name)

    def __eq__(self, other) -> bool:
        if not isinstance(other, KinematicChain):
            return NotImplemented
        return (
            self.name == other.name
            and np.array_equal(self.joints, other.joints)
            and np.array_equal(self.link_lengths, other.link_lengths)
            and np.array_equal(self.base, other.base)
        )


def end_effector(chain: KinematicChain) -> np.ndarray:
    return chain.joints[-1].copy()


def max_reach(chain) -> float:
    lengths = chain.link_lengths if hasattr(chain, "link_lengths") else chain
    return float(np.sum(lengths))


@dataclass(frozen=True)
class RobotDefinition:
    """Chain template plus the joints that play shoulder, elbow and wrist.

    ``constrained_joints`` holds 1-based joint indices ``(r_s, r_e, r_w)``.
    """

    name: str
    base: tuple
    link_lengths: tuple
    constrained_joints: tuple
    rest_directions: Optional[tuple] = None
    transform: WorkspaceTransform = field(default_factory=WorkspaceTransform)

    def __post_init__(self):
        object.__setattr__(self, "base", tuple(float(c) for c in as_vec3(self.base, "base")))
        lengths = tuple(float(x) for x in self.link_lengths)
        object.__setattr__(self, "link_lengths", lengths)
        if len(lengths) < 2:
            raise ValueError("a robot needs at least 2 links (3 joints)")
        if any(not x > 0 for x in lengths):
            raise ValueError("link lengths must be positive")
        idx = tuple(int(i) for i in self.constrained_joints)
        if len(idx) != 3:
            raise ValueError("constrained_joints needs shoulder, elbow and wrist indices")
        rs, re, rw = idx
        if not (1 <= rs < re < rw <= self.n_joints):
            raise ValueError(
                f"constrained joints must satisfy 1 <= r_s < r_e < r_w <= {self.n_joints}, got {idx}"
            )
        object.__setattr__(self, "constrained_joints", idx)
        if self.rest_directions is not None:
            dirs = tuple(tuple(float(c) for c in d) for d in self.rest_directions)
            if len(dirs) != len(lengths):
                raise ValueError("rest_directions must have one entry per link")
            object.__setattr__(self, "rest_directions", dirs)

    @property
    def n_joints(self) -> int:
        return len(self.link_lengths) + 1

    @property
    def max_reach(self) -> float:
        return float(sum(self.link_lengths))

    def rest_chain(self) -> KinematicChain:
        if self.rest_directions is None:
            dirs = [(0.0, 0.0, 1.0)] * len(self.link_lengths)
        else:
            dirs = [np.asarray(d) / np.linalg.norm(d) for d in self.rest_directions]
        return assemble(self, dirs)

    def to_dict(self) -> dict:
        rs, re, rw = self.constrained_joints
        d = {
            "name": self.name,
            "base": list(self.base),
            "link_lengths": list(self.link_lengths),
            "constrained_joints": {"shoulder": rs, "elbow": re, "wrist": rw},
        }
        if self.rest_directions is not None:
            d["rest_directions"] = [list(v) for v in self.rest_directions]
        d["transform"] = self.transform.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RobotDefinition":
        try:
            cj = d["constrained_joints"]
            return cls(
                name=str(d["name"]),
                base=tuple(d["base"]),
                link_lengths=tuple(d["link_lengths"]),
                constrained_joints=(cj["shoulder"], cj["elbow"], cj["wrist"]),
                rest_directions=d.get("rest_directions"),
                transform=WorkspaceTransform.from_dict(d.get("transform", {})),
            )
        except KeyError as exc:
            raise ValueError(f"robot definition is missing field {exc}") from None


BUILTIN_ROBOTS = ("baxter", "yumi")


def load_robot(path) -> RobotDefinition:
    """Reads a robot definition file, or a shipped one via ``builtin:<name>``."""
    spec = str(path)
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_ROBOTS:
            raise ValueError(f"unknown builtin robot {name!r}; choose from {BUILTIN_ROBOTS}")
        text = resources.files("pose_ik.data.robots").joinpath(f"{name}.json").read_text()
    else:
        text = Path(spec).read_text()
    return RobotDefinition.from_dict(json.loads(text))


def assemble(definition: RobotDefinition, initial_directions: Sequence) -> KinematicChain:
    dirs = np.asarray(initial_directions, dtype=float)
    n_links = len(definition.link_lengths)
    if dirs.ndim != 2 or dirs.shape != (n_links, 3):
        raise ValueError(f"expected {n_links} directions, got {len(dirs)}")
    norms = np.linalg.norm(dirs, axis=1)
    if np.any(np.abs(norms - 1.0) > 1e-6):
        raise ValueError("initial directions must be unit vectors")
    joints = np.empty((n_links + 1, 3))
    joints[0] = definition.base
    for i, length in enumerate(definition.link_lengths):
        joints[i + 1] = joints[i] + length * dirs[i]
    return KinematicChain(joints, definition.link_lengths, definition.base, definition.name)
