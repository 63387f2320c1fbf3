"""
轨迹生成包
"""

from .filtering import filter_path, with_followers
from .topp import KinematicLimits, Trajectory, parameterize

__all__ = [
    "filter_path",
    "with_followers",
    "KinematicLimits",
    "Trajectory",
    "parameterize",
]
