"""
测试公共夹具
"""

import numpy as np
import pytest

from src.formation.quad import LeaderQuad
from src.planners.base import PlannedPath

START_POINTS = [(0.0, 0.0, 0.0), (0.0, 5.0, 0.0), (0.0, 5.0, 5.0), (0.0, 0.0, 5.0)]


@pytest.fixture
def start_square() -> LeaderQuad:
    """边长 5 m、法向 +x 的初始正方形"""
    return LeaderQuad.from_points(*START_POINTS)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """QR 分解得到的随机正交矩阵（行列式为 +1）"""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q @ np.diag(np.sign(np.diag(r)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def translation_path(quad: LeaderQuad, offset, n_snapshots: int = 2) -> PlannedPath:
    """整体平移的直线路径"""
    fractions = np.linspace(0.0, 1.0, n_snapshots)
    positions = np.stack([quad.points + f * np.asarray(offset, dtype=float) for f in fractions])
    return PlannedPath(positions, np.arange(n_snapshots), converged=True, method="test")
