"""
路径规划器包
"""

from .base import BasePlanner, FluxObjective, PlannedPath, clamp_step, flux_jacobian, per_uav_norms
from .ls import LsConfig, LsPlanner, ls_step, ls_system, plan_ls
from .sqp import SqpOptions, SqpState, restore_feasibility, side_constraints, side_constraints_jacobian, sqp_step
from .fg import FgConfig, FgPlanner, ScaleSchedule, cluster_standoff, constraints, facing_square, fg_step, plan_fg

__all__ = [
    "BasePlanner",
    "FluxObjective",
    "PlannedPath",
    "clamp_step",
    "flux_jacobian",
    "per_uav_norms",
    "LsConfig",
    "LsPlanner",
    "ls_step",
    "ls_system",
    "plan_ls",
    "SqpOptions",
    "SqpState",
    "restore_feasibility",
    "side_constraints",
    "side_constraints_jacobian",
    "sqp_step",
    "FgConfig",
    "FgPlanner",
    "ScaleSchedule",
    "cluster_standoff",
    "constraints",
    "facing_square",
    "fg_step",
    "plan_fg",
]
