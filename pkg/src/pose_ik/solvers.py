"""FABRIK, PIC and PICs solvers over a shared backward/forward iteration.

PIC enforces IN constraints while walking back from the target and OUT
constraints while walking out from the base, so the OUT octants always have
the last word. PICs widens each constraint octant to its Hamming
neighbourhood before projecting.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence

import numpy as np

from .chain import KinematicChain, RobotDefinition
from .constraints import MAX_ETA, PoseConstraintSet, _project_set_xyz, admissible_set, deviation_from_set
from .geom import GEOM_TOL, OctantSet, _index_unchecked, as_vec3, in_octant_closure

_DEGENERATE = 1e-12
_UP = (0.0, 0.0, 1.0)

PassHook = Callable[[str, np.ndarray], None]


class Mode(str, enum.Enum):
    FABRIK = "FABRIK"
    PIC = "PIC"
    PICS = "PICS"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown solver mode {value!r}; choose FABRIK, PIC or PICS") from None


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 20
    position_tolerance: float = 1e-3
    eta: int = 0
    mode: Mode = Mode.PIC

    def __post_init__(self):
        object.__setattr__(self, "mode", Mode.parse(self.mode))
        if isinstance(self.max_iterations, bool) or int(self.max_iterations) != self.max_iterations:
            raise ValueError("max_iterations must be an integer")
        if self.max_iterations < 1:
            raise ValueError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if not self.position_tolerance > 0:
            raise ValueError(f"position_tolerance must be > 0, got {self.position_tolerance}")
        if isinstance(self.eta, bool) or int(self.eta) != self.eta or not 0 <= self.eta <= MAX_ETA:
            raise ValueError(f"eta must be an integer in 0..{MAX_ETA}, got {self.eta!r}")
        object.__setattr__(self, "max_iterations", int(self.max_iterations))
        object.__setattr__(self, "eta", int(self.eta))

    @property
    def effective_eta(self) -> int:
        return 0 if self.mode is Mode.PIC else self.eta


@dataclass(frozen=True)
class ConstraintStatus:
    kind: str  # "OUT" or "IN"
    joint: int
    octant: int
    eta: int
    in_octant: bool
    admissible: bool
    deviation: float

    @property
    def status(self) -> str:
        if self.in_octant:
            return "satisfied"
        if self.admissible:
            return "softened"
        return "violated"

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "joint": self.joint,
            "octant": self.octant,
            "eta": self.eta,
            "status": self.status,
            "deviation": self.deviation,
        }


@dataclass(frozen=True, eq=False)
class Solution:
    chain: KinematicChain
    iterations_used: int
    residual: float
    converged: bool
    constraint_report: tuple = ()
    residual_history: tuple = field(default=(), repr=False)

    def to_dict(self) -> dict:
        return {
            "joints": self.chain.joints.tolist(),
            "iterations": self.iterations_used,
            "residual": self.residual,
            "converged": self.converged,
            "constraints": [c.to_dict() for c in self.constraint_report],
        }


def _sets(constraints: Optional[PoseConstraintSet], eta: int):
    if constraints is None:
        return {}, {}
    ins = {j: admissible_set(o, eta) for j, o in constraints.in_constraints().items()}
    outs = {j: admissible_set(o, eta) for j, o in constraints.out_constraints().items()}
    return ins, outs


def _unit(vx: float, vy: float, vz: float):
    n = math.sqrt(vx * vx + vy * vy + vz * vz)
    if n < _DEGENERATE:
        return None
    return vx / n, vy / n, vz / n


def _constrain(d, admissible: Optional[OctantSet]):
    if admissible is None or admissible.is_full:
        return d
    return _project_set_xyz(d[0], d[1], d[2], admissible)


def _prior_dir(js, i: int):
    """Direction of link i (joint i -> i+1) before the pass, for degenerate steps."""
    for k in range(i, -1, -1):
        a, b = js[k], js[k + 1]
        d = _unit(b[0] - a[0], b[1] - a[1], b[2] - a[2])
        if d is not None:
            return d
    return _UP


# Passes work on lists of float tuples; numpy per-element overhead dominates
# on 3-vectors. A coincident pair of joints reuses the link's prior direction.


def _backward(js: list, lengths, target, in_sets: dict) -> list:
    n = len(js)
    out = list(js)
    out[n - 1] = target
    for i in range(n - 1, 0, -1):
        a, b = out[i], out[i - 1]
        d = _unit(b[0] - a[0], b[1] - a[1], b[2] - a[2])
        if d is None:
            p = _prior_dir(js, i - 1)
            d = (-p[0], -p[1], -p[2])
        d = _constrain(d, in_sets.get(i + 1))
        L = lengths[i - 1]
        out[i - 1] = (a[0] + L * d[0], a[1] + L * d[1], a[2] + L * d[2])
    return out


def _forward(js: list, lengths, base, out_sets: dict) -> list:
    n = len(js)
    out = list(js)
    out[0] = base
    for i in range(n - 1):
        a, b = out[i], out[i + 1]
        d = _unit(b[0] - a[0], b[1] - a[1], b[2] - a[2])
        if d is None:
            d = _prior_dir(js, i)
        d = _constrain(d, out_sets.get(i + 1))
        L = lengths[i]
        out[i + 1] = (a[0] + L * d[0], a[1] + L * d[1], a[2] + L * d[2])
    return out


def _stretch(js: list, lengths, base, target, out_sets: dict) -> list:
    out = list(js)
    out[0] = base
    for i in range(len(js) - 1):
        a = out[i]
        d = _unit(target[0] - a[0], target[1] - a[1], target[2] - a[2])
        if d is None:
            d = _prior_dir(js, i)
        d = _constrain(d, out_sets.get(i + 1))
        L = lengths[i]
        out[i + 1] = (a[0] + L * d[0], a[1] + L * d[1], a[2] + L * d[2])
    return out


def _outs_admissible(js: list, out_sets: dict) -> bool:
    for j, allowed in out_sets.items():
        a, b = js[j - 1], js[j]
        if not allowed.mask >> (_index_unchecked(b[0] - a[0], b[1] - a[1], b[2] - a[2]) - 1) & 1:
            return False
    return True


def _as_tuples(joints) -> list:
    return [tuple(float(c) for c in row) for row in np.asarray(joints)]


def _dist(a, b) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


def backward_pass(chain: KinematicChain, target, constraints: Optional[PoseConstraintSet] = None, eta: int = 0):
    """Pins the end effector on ``target`` and walks back toward the base.

    Directions into joints carrying an IN constraint are projected into the
    admissible set. The base is left wherever the walk puts it.
    """
    ins, _ = _sets(constraints, eta)
    target = tuple(as_vec3(target, "target").tolist())
    joints = _backward(_as_tuples(chain.joints), chain.link_lengths.tolist(), target, ins)
    return chain.with_joints(joints)


def forward_pass(chain: KinematicChain, base=None, constraints: Optional[PoseConstraintSet] = None, eta: int = 0):
    """Re-pins the base and walks out, projecting OUT-constrained links."""
    base = chain.base if base is None else as_vec3(base, "base")
    _, outs = _sets(constraints, eta)
    joints = _forward(_as_tuples(chain.joints), chain.link_lengths.tolist(), tuple(base.tolist()), outs)
    return chain.with_joints(joints)


def constraint_report(chain: KinematicChain, constraints: Optional[PoseConstraintSet], eta: int = 0) -> tuple:
    """Satisfaction and angular deviation of every constrained link."""
    if constraints is None:
        return ()
    j = chain.joints
    rows = []
    for p in constraints.pairs:
        for kind, joint, octant in (("OUT", p.out_joint, p.out_octant), ("IN", p.in_joint, p.in_octant)):
            if kind == "OUT":
                v = j[joint] - j[joint - 1]
            else:
                v = j[joint - 2] - j[joint - 1]
            allowed = admissible_set(octant, eta)
            dev = deviation_from_set(v, allowed, GEOM_TOL)
            rows.append(
                ConstraintStatus(
                    kind=kind,
                    joint=joint,
                    octant=octant,
                    eta=eta,
                    in_octant=in_octant_closure(octant, v, GEOM_TOL),
                    admissible=dev == 0.0,
                    deviation=dev,
                )
            )
    return tuple(rows)


def solve(
    chain: KinematicChain,
    target,
    constraints: Optional[PoseConstraintSet] = None,
    cfg: SolverConfig = SolverConfig(),
    on_pass: Optional[PassHook] = None,
) -> Solution:
    """Runs backward/forward passes until the end effector is within tolerance.

    Targets beyond the chain's reach get a single stretch toward the target
    (OUT constraints still apply) and come back non-converged. A chain that
    already meets the tolerance with admissible OUT links is returned after
    zero iterations. ``on_pass`` is
    called with ``("backward" | "forward" | "stretch", joints)`` after each pass.
    """
    if not isinstance(cfg, SolverConfig):
        raise TypeError("cfg must be a SolverConfig")
    if not chain.is_assembled():
        raise ValueError("chain is not assembled: link lengths are violated")
    if constraints is not None:
        top = max(constraints.joints)
        if top > chain.n_joints:
            raise ValueError(f"constraint addresses joint {top} on a {chain.n_joints}-joint chain")
    target_arr = as_vec3(target, "target")
    target = tuple(target_arr.tolist())
    eta = cfg.effective_eta
    active = None if cfg.mode is Mode.FABRIK else constraints
    ins, outs = _sets(active, eta)
    lengths = chain.link_lengths.tolist()
    base = tuple(chain.base.tolist())
    joints = _as_tuples(chain.joints)
    tol = cfg.position_tolerance

    def emit(kind, js):
        if on_pass is not None:
            on_pass(kind, np.array(js))

    history = []
    iterations = 0
    if _dist(target, base) > math.fsum(lengths):
        joints = _stretch(joints, lengths, base, target, outs)
        iterations = 1
        emit("stretch", joints)
        history.append(_dist(joints[-1], target))
    elif _dist(joints[-1], target) > tol or joints[0] != base or not _outs_admissible(joints, outs):
        for iterations in range(1, cfg.max_iterations + 1):
            joints = _backward(joints, lengths, target, ins)
            emit("backward", joints)
            joints = _forward(joints, lengths, base, outs)
            emit("forward", joints)
            history.append(_dist(joints[-1], target))
            if history[-1] <= tol:
                break

    final = chain.with_joints(joints)
    residual = float(np.linalg.norm(final.joints[-1] - target_arr))
    report_eta = 0 if cfg.mode is Mode.FABRIK else eta
    return Solution(
        chain=final,
        iterations_used=iterations,
        residual=residual,
        converged=residual <= tol,
        constraint_report=constraint_report(final, constraints, report_eta),
        residual_history=tuple(history),
    )


def _targets_of(traj) -> np.ndarray:
    if hasattr(traj, "frames"):
        return np.array([f.wrist for f in traj.frames], dtype=float)
    return np.asarray(traj, dtype=float).reshape(-1, 3)


def solve_trajectory(
    definition: RobotDefinition,
    traj,
    constraints: Optional[Sequence[Optional[PoseConstraintSet]]],
    cfg: SolverConfig = SolverConfig(),
    initial: Optional[KinematicChain] = None,
) -> List[Solution]:
    """Solves every frame, warm-starting from the previous frame's chain.

    ``traj`` is a skeleton trajectory already in the robot frame (the wrist is
    the target) or an array of targets. The first frame starts from
    ``initial`` or the robot's rest chain.
    """
    targets = _targets_of(traj)
    if len(targets) == 0:
        raise ValueError("empty trajectory")
    if constraints is not None and len(constraints) != len(targets):
        raise ValueError(f"got {len(constraints)} constraint sets for {len(targets)} frames")
    chain = definition.rest_chain() if initial is None else initial
    solutions = []
    for i, target in enumerate(targets):
        sol = solve(chain, target, None if constraints is None else constraints[i], cfg)
        solutions.append(sol)
        chain = sol.chain
    return solutions


def with_mode(cfg: SolverConfig, mode, eta: Optional[int] = None) -> SolverConfig:
    mode = Mode.parse(mode)
    return replace(cfg, mode=mode, eta=cfg.eta if eta is None else eta)
