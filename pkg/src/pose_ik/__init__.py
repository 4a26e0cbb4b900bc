"""Octant-constrained pose imitation for serial robot arms.

A human arm pose is reduced to four octants (shoulder and elbow link
directions, both ways) which a FABRIK-style solver enforces on the robot while
reaching for the human's wrist position.
"""

from .chain import KinematicChain, RobotDefinition, WorkspaceTransform, assemble, load_robot
from .constraints import (
    ConstraintPair,
    PoseConstraintSet,
    admissible_set,
    extract_human_pose,
    map_to_robot,
    neighbor_octants,
    project_into_set,
)
from .geom import OctantSet, octant_contains, octant_index, project_into_octant
from .harness import ExperimentConfig, ExperimentReport, emit_plot_data, emit_report, run_experiment
from .ingestion import SkeletonTrajectory, exponential_smooth, load_trajectory, synth_demo, to_robot_frame
from .metrics import ROI, occlusion_percentage, pose_accuracy, pose_angle
from .solvers import Mode, Solution, SolverConfig, solve, solve_trajectory

__version__ = "0.1.0"

__all__ = [
    "ConstraintPair",
    "ExperimentConfig",
    "ExperimentReport",
    "KinematicChain",
    "Mode",
    "OctantSet",
    "PoseConstraintSet",
    "ROI",
    "RobotDefinition",
    "SkeletonTrajectory",
    "Solution",
    "SolverConfig",
    "WorkspaceTransform",
    "admissible_set",
    "assemble",
    "emit_plot_data",
    "emit_report",
    "exponential_smooth",
    "extract_human_pose",
    "load_robot",
    "load_trajectory",
    "map_to_robot",
    "neighbor_octants",
    "octant_contains",
    "octant_index",
    "occlusion_percentage",
    "pose_accuracy",
    "pose_angle",
    "project_into_octant",
    "project_into_set",
    "run_experiment",
    "solve",
    "solve_trajectory",
    "synth_demo",
    "to_robot_frame",
]
