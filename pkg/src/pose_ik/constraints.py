"""Octant pose constraints: extraction from a human arm, mapping onto a robot,
and Hamming softening of the admissible regions."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .chain import RobotDefinition
from .geom import (
    OCTANTS,
    _index_unchecked,
    _project_xyz,
    OctantSet,
    angle_between,
    as_vec3,
    normalize,
    octant_index,
    octant_signs,
    project_into_octant,
)

MAX_ETA = 3


class DegenerateSkeleton(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintPair:
    """OUT octant at ``out_joint`` and IN octant at ``in_joint`` (1-based).

    OUT limits the link leaving ``out_joint`` toward the next joint; IN limits
    the direction from ``in_joint`` back toward the previous joint.
    """

    out_joint: int
    out_octant: int
    in_joint: int
    in_octant: int

    def __post_init__(self):
        octant_signs(self.out_octant)
        octant_signs(self.in_octant)
        if not self.in_joint > self.out_joint:
            raise ValueError(f"in_joint ({self.in_joint}) must follow out_joint ({self.out_joint})")
        if self.out_joint < 1:
            raise ValueError("joint indices are 1-based")


@dataclass(frozen=True)
class PoseConstraintSet:
    """Two constraint pairs sharing the elbow: (shoulder -> elbow), (elbow -> wrist)."""

    pairs: Tuple[ConstraintPair, ConstraintPair]

    def __post_init__(self):
        pairs = tuple(self.pairs)
        if len(pairs) != 2:
            raise ValueError("a pose constraint set holds exactly two pairs")
        if pairs[0].in_joint != pairs[1].out_joint:
            raise ValueError("the two pairs must share the elbow joint")
        object.__setattr__(self, "pairs", pairs)

    @property
    def joints(self) -> Tuple[int, int, int]:
        a, b = self.pairs
        return a.out_joint, a.in_joint, b.in_joint

    @property
    def octants(self) -> Tuple[int, int, int, int]:
        """(OUT shoulder, IN elbow, OUT elbow, IN wrist)."""
        a, b = self.pairs
        return a.out_octant, a.in_octant, b.out_octant, b.in_octant

    def out_constraints(self) -> dict:
        return {p.out_joint: p.out_octant for p in self.pairs}

    def in_constraints(self) -> dict:
        return {p.in_joint: p.in_octant for p in self.pairs}

    def to_dict(self) -> dict:
        return {
            "pairs": [
                {"out_joint": p.out_joint, "out_octant": p.out_octant, "in_joint": p.in_joint, "in_octant": p.in_octant}
                for p in self.pairs
            ]
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PoseConstraintSet":
        return cls(tuple(ConstraintPair(**p) for p in d["pairs"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=False)

    @classmethod
    def from_json(cls, text: str) -> "PoseConstraintSet":
        return cls.from_dict(json.loads(text))


def _checked_eta(eta: int) -> int:
    if isinstance(eta, bool) or int(eta) != eta or not 0 <= eta <= MAX_ETA:
        raise ValueError(f"softening factor must be an integer in 0..{MAX_ETA}, got {eta!r}")
    return int(eta)


def extract_human_pose(shoulder, elbow, wrist) -> PoseConstraintSet:
    """Octant constraints of a human arm frame, addressed to joints 1, 2, 3."""
    s = as_vec3(shoulder, "shoulder")
    e = as_vec3(elbow, "elbow")
    w = as_vec3(wrist, "wrist")
    for a, b in ((s, e), (e, w), (s, w)):
        if np.linalg.norm(a - b) <= 1e-6:
            raise DegenerateSkeleton("degenerate skeleton frame")
    return PoseConstraintSet(
        (
            ConstraintPair(1, octant_index(e - s), 2, octant_index(s - e)),
            ConstraintPair(2, octant_index(w - e), 3, octant_index(e - w)),
        )
    )


def map_to_robot(human: PoseConstraintSet, robot) -> PoseConstraintSet:
    """Re-addresses the human constraints onto the robot's (r_s, r_e, r_w).

    ``robot`` is a :class:`RobotDefinition` or a bare index triple. Octants are
    carried over unchanged.
    """
    if isinstance(robot, RobotDefinition):
        rs, re, rw = robot.constrained_joints
        n = robot.n_joints
    else:
        rs, re, rw = (int(i) for i in robot)
        n = None
    if not (1 <= rs < re < rw) or (n is not None and rw > n):
        raise ValueError(f"robot joint indices out of bounds: {(rs, re, rw)}")
    a, b = human.pairs
    return PoseConstraintSet(
        (
            ConstraintPair(rs, a.out_octant, re, a.in_octant),
            ConstraintPair(re, b.out_octant, rw, b.in_octant),
        )
    )


def _hamming(a: int, b: int) -> int:
    return bin((a - 1) ^ (b - 1)).count("1")


# The sign bits of an index map one-to-one onto (x, y, z), so Hamming distance
# between sign triples is the popcount of the XOR of (index - 1).
_NEIGHBOURS = {
    (o, eta): OctantSet(q for q in OCTANTS if _hamming(o, q) <= eta) for o in OCTANTS for eta in range(MAX_ETA + 1)
}


def neighbor_octants(octant: int, eta: int) -> OctantSet:
    octant_signs(octant)
    return _NEIGHBOURS[(octant, _checked_eta(eta))]


def admissible_set(octant: int, eta: int) -> OctantSet:
    """Admissible region of a constraint octant under softening ``eta``."""
    return neighbor_octants(octant, eta)


def _project_set_xyz(x: float, y: float, z: float, octants: OctantSet):
    # (x, y, z) must already be unit length. Largest cosine is smallest angle.
    mask = octants.mask
    if mask >> (_index_unchecked(x, y, z) - 1) & 1:
        return x, y, z
    best = None
    best_cos = -2.0
    for o in octants:
        p = _project_xyz(x, y, z, o)
        c = x * p[0] + y * p[1] + z * p[2]
        if c > best_cos:
            best, best_cos = p, c
    return best


def project_into_set(v, octants: OctantSet) -> np.ndarray:
    """Nearest unit direction to ``v`` within the union of ``octants``.

    Ties between equally near octants go to the lowest index.
    """
    if not octants:
        raise ValueError("cannot project into an empty octant set")
    d = normalize(v)
    return np.array(_project_set_xyz(d[0], d[1], d[2], octants))


def deviation_from_set(v, octants: OctantSet, tol: float = 1e-9) -> float:
    """Angle (radians) from ``v`` to the closed admissible region; 0 inside it."""
    d = normalize(v)
    best = np.inf
    for o in octants:
        s = octant_signs(o)
        if all(si * di >= -tol for si, di in zip(s, d)):
            return 0.0
        if all(si * di < 0 for si, di in zip(s, d)):
            # the projection falls back to the diagonal here; the true nearest
            # point is the boundary axis with the least negative component
            i = max(range(3), key=lambda k: s[k] * d[k])
            nearest = np.zeros(3)
            nearest[i] = s[i]
        else:
            nearest = project_into_octant(d, o)
        best = min(best, angle_between(d, nearest))
    return float(best)
