"""
路径预处理
剔除间距过近的快照，并为领航者路径补全跟随者
"""

import logging

import numpy as np

from src.formation.hemisphere import derive_followers
from src.planners.base import PlannedPath

logger = logging.getLogger(__name__)


def filter_path(path: PlannedPath, min_spacing: float) -> PlannedPath:
    """
    贪心剔除相距过近的快照

    与上一个保留快照相比，单机最大位移小于 min_spacing 的快照被丢弃；
    首尾快照始终保留。

    Args:
        path: 规划路径
        min_spacing: 最小间距（m）

    Returns:
        过滤后的路径
    """
    if min_spacing <= 0:
        raise ValueError(f"min_spacing 必须为正，实际为 {min_spacing}")
    if len(path) <= 2:
        return path.subset(np.arange(len(path)))

    keep = [0]
    last = path.positions[0]
    for k in range(1, len(path) - 1):
        displacement = np.max(np.linalg.norm(path.positions[k] - last, axis=1))
        if displacement >= min_spacing:
            keep.append(k)
            last = path.positions[k]
    keep.append(len(path) - 1)

    logger.debug("路径过滤: %d → %d 个快照", len(path), len(keep))
    return path.subset(keep)


def with_followers(path: PlannedPath) -> PlannedPath:
    """
    为每个快照推导跟随者，得到 9 机路径（领航者在前）

    Raises:
        NonPlanarQuad: 某个快照不够平整
    """
    positions = np.stack([derive_followers(quad).positions() for quad in path.quads()])
    return PlannedPath(
        positions,
        path.iterations.copy(),
        converged=path.converged,
        method=path.method,
        side_length_targets=path.side_length_targets,
    )
