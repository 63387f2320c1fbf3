"""
基于电通量的无人机编队路径规划
"""

from src.config import config
from src.flux import PointCharge, TriMesh, flux_quad_boundary, flux_surface, solid_angle_triangle
from src.formation import LeaderQuad, derive_followers, shape_metrics
from src.planners import FgConfig, LsConfig, PlannedPath, plan_fg, plan_ls
from src.targets import TargetModel, coc_reduce, single_target
from src.trajectory import KinematicLimits, Trajectory, filter_path, parameterize
from src.sim import PidGains, run_tracking

__all__ = [
    "config",
    "PointCharge",
    "TriMesh",
    "flux_quad_boundary",
    "flux_surface",
    "solid_angle_triangle",
    "LeaderQuad",
    "derive_followers",
    "shape_metrics",
    "FgConfig",
    "LsConfig",
    "PlannedPath",
    "plan_fg",
    "plan_ls",
    "TargetModel",
    "coc_reduce",
    "single_target",
    "KinematicLimits",
    "Trajectory",
    "filter_path",
    "parameterize",
    "PidGains",
    "run_tracking",
]
