"""
领航者四边形
四个边界无人机的位置、局部坐标系与形状指标
"""

from dataclasses import dataclass
from typing import Iterable, Tuple

import numpy as np

from src.errors import DegenerateQuad
from src.flux.geometry import EPS_GEOM, Vec3

# 顶点重合判定距离（m）
_MIN_SEPARATION = 1e-9


@dataclass(frozen=True)
class LeaderQuad:
    """
    四个领航无人机 p1..p4，按边界循环顺序存储

    规划器的 12 维状态按 (p1, p2, p3, p4) 依次排列 xyz。
    """

    points: np.ndarray

    def __post_init__(self):
        points = np.array(self.points, dtype=float).reshape(4, 3)
        if not np.all(np.isfinite(points)):
            raise ValueError(f"领航者坐标包含非有限值: {points.tolist()}")
        diffs = points[:, None, :] - points[None, :, :]
        distances = np.linalg.norm(diffs, axis=-1)
        if np.any(distances[np.triu_indices(4, k=1)] <= _MIN_SEPARATION):
            raise DegenerateQuad(f"领航者位置存在重合: {points.tolist()}")
        points.setflags(write=False)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_points(cls, p1: Iterable[float], p2: Iterable[float],
                    p3: Iterable[float], p4: Iterable[float]) -> "LeaderQuad":
        """由四个点构建"""
        return cls(np.array([p1, p2, p3, p4], dtype=float))

    @classmethod
    def from_vector(cls, x: np.ndarray) -> "LeaderQuad":
        """由 12 维向量构建"""
        return cls(np.asarray(x, dtype=float).reshape(4, 3))

    def to_vector(self) -> np.ndarray:
        """展开为 12 维向量 (x1..x12)"""
        return self.points.reshape(12).copy()

    @property
    def p1(self) -> Vec3:
        return self.points[0]

    @property
    def p2(self) -> Vec3:
        return self.points[1]

    @property
    def p3(self) -> Vec3:
        return self.points[2]

    @property
    def p4(self) -> Vec3:
        return self.points[3]

    def centroid(self) -> Vec3:
        """四点质心"""
        return self.points.mean(axis=0)

    def edges(self) -> np.ndarray:
        """循环边向量 p(i+1) − p(i)，形状 (4, 3)"""
        return np.roll(self.points, -1, axis=0) - self.points

    def circumradius(self) -> float:
        """质心到顶点的最大距离"""
        return float(np.max(np.linalg.norm(self.points - self.centroid(), axis=1)))

    def transformed(self, rotation: np.ndarray, translation: Iterable[float] = (0.0, 0.0, 0.0)) -> "LeaderQuad":
        """刚体变换 x → R x + t"""
        return LeaderQuad(self.points @ np.asarray(rotation).T + np.asarray(translation, dtype=float))

    def translated(self, offset: Iterable[float]) -> "LeaderQuad":
        """平移"""
        return LeaderQuad(self.points + np.asarray(offset, dtype=float))


@dataclass(frozen=True)
class ShapeMetrics:
    """四边形形状指标"""

    side_lengths: np.ndarray
    diagonals: np.ndarray
    planarity_defect: float
    area: float

    def mean_side(self) -> float:
        return float(np.mean(self.side_lengths))


def _vector_area(points: np.ndarray) -> Vec3:
    """两三角形法向之和 = (p3−p1)×(p4−p2)，与对角线选择无关"""
    return np.cross(points[2] - points[0], points[3] - points[1])


def quad_frame(quad: LeaderQuad) -> Tuple[Vec3, Vec3, Tuple[Vec3, Vec3]]:
    """
    四边形局部坐标系

    Args:
        quad: 领航者四边形

    Returns:
        (质心, 单位法向, (面内轴 u, 面内轴 v))；从 +法向看 p1→p2→p3→p4 为逆时针

    Raises:
        DegenerateQuad: 面积向量为零
    """
    area_vec = _vector_area(quad.points)
    norm = np.linalg.norm(area_vec)
    if norm <= EPS_GEOM:
        raise DegenerateQuad(f"四边形面积为零，无法确定法向: {quad.points.tolist()}")
    normal = area_vec / norm

    edge = quad.p2 - quad.p1
    in_plane = edge - np.dot(edge, normal) * normal
    u_norm = np.linalg.norm(in_plane)
    if u_norm <= EPS_GEOM:
        raise DegenerateQuad("首条边垂直于四边形平面")
    u = in_plane / u_norm
    v = np.cross(normal, u)
    return quad.centroid(), normal, (u, v)


def shape_metrics(quad: LeaderQuad) -> ShapeMetrics:
    """
    计算边长、对角线、平面度与面积

    Args:
        quad: 领航者四边形

    Returns:
        ShapeMetrics；面积为四边形在最佳拟合平面上的投影面积
    """
    points = quad.points
    sides = np.linalg.norm(quad.edges(), axis=1)
    diagonals = np.array([
        np.linalg.norm(points[2] - points[0]),
        np.linalg.norm(points[3] - points[1]),
    ])
    area_vec = _vector_area(points)
    norm = np.linalg.norm(area_vec)
    if norm <= EPS_GEOM:
        planarity = 0.0
    else:
        normal = area_vec / norm
        planarity = float(np.max(np.abs((points - points.mean(axis=0)) @ normal)))
    return ShapeMetrics(
        side_lengths=sides,
        diagonals=diagonals,
        planarity_defect=planarity,
        area=0.5 * float(norm),
    )
