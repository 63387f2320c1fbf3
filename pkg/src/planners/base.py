"""
规划器基类
定义所有通量规划器的核心接口，以及共用的路径与通量目标函数
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.flux.geometry import PointCharge
from src.flux.solid_angle import flux_quad_boundary, quad_flux_batch
from src.formation.quad import LeaderQuad
from src.targets.model import TargetModel

# 通量雅可比的中心差分步长（m）
FD_STEP = 1e-5


@dataclass
class PlannedPath:
    """
    规划路径：按迭代顺序记录的编队快照

    positions 形状为 (K, N, 3)，N=4 时为领航者，N=9 时包含跟随者。
    """

    positions: np.ndarray
    iterations: np.ndarray
    converged: bool = False
    method: str = ""
    side_length_targets: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.iterations = np.asarray(self.iterations, dtype=int)
        if self.positions.ndim != 3 or self.positions.shape[2] != 3:
            raise ValueError(f"路径坐标形状应为 (K, N, 3)，实际为 {self.positions.shape}")
        if len(self.iterations) != len(self.positions):
            raise ValueError("迭代编号数量与快照数量不一致")

    @classmethod
    def from_quads(cls, quads: Sequence[LeaderQuad], iterations: Sequence[int] = None,
                   converged: bool = False, method: str = "") -> "PlannedPath":
        """由四边形快照列表构建"""
        positions = np.stack([q.points for q in quads])
        if iterations is None:
            iterations = np.arange(len(quads))
        return cls(positions, np.asarray(iterations), converged=converged, method=method)

    @property
    def n_uavs(self) -> int:
        return self.positions.shape[1]

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def snapshots(self) -> List[Tuple[int, LeaderQuad]]:
        """(迭代编号, 领航者四边形) 列表"""
        return [(int(k), LeaderQuad(p[:4])) for k, p in zip(self.iterations, self.positions)]

    def quads(self) -> List[LeaderQuad]:
        return [LeaderQuad(p[:4]) for p in self.positions]

    def segment_lengths(self) -> np.ndarray:
        """各无人机逐段位移，形状 (K−1, N)"""
        return np.linalg.norm(np.diff(self.positions, axis=0), axis=2)

    @property
    def combined_length(self) -> float:
        """所有无人机路径长度之和（m）"""
        if len(self.positions) < 2:
            return 0.0
        return float(np.sum(self.segment_lengths()))

    def subset(self, indices: Sequence[int]) -> "PlannedPath":
        """按快照下标取子路径"""
        indices = np.asarray(indices, dtype=int)
        targets = None if self.side_length_targets is None else self.side_length_targets[indices]
        return PlannedPath(self.positions[indices], self.iterations[indices],
                           converged=self.converged, method=self.method,
                           side_length_targets=targets)


class FluxObjective:
    """
    Φ1 作为 12 维领航者坐标的函数

    单点目标使用一个电荷；精确多目标模式下对每个成员求和。
    """

    def __init__(self, charges: Sequence[PointCharge]):
        """
        Args:
            charges: 点电荷列表
        """
        if not charges:
            raise ValueError("通量目标函数至少需要一个电荷")
        self.charges = list(charges)
        self._positions = np.stack([c.position for c in self.charges])
        self._values = np.array([c.charge for c in self.charges])

    @classmethod
    def from_target(cls, target: TargetModel, exact: bool = False) -> "FluxObjective":
        """由目标模型构建：默认使用 COC 单电荷"""
        if exact:
            return cls(target.member_charges())
        return cls([target.as_charge()])

    @property
    def center(self) -> np.ndarray:
        """电荷加权中心"""
        weights = np.abs(self._values)
        return (self._positions * weights[:, None]).sum(axis=0) / weights.sum()

    def value(self, x: np.ndarray) -> float:
        """Φ1(x)，带几何校验"""
        quad = LeaderQuad.from_vector(x)
        return float(sum(flux_quad_boundary(c, quad) for c in self.charges))

    def gradient(self, x: np.ndarray, h: float = FD_STEP) -> np.ndarray:
        """
        中心差分梯度

        Args:
            x: 12 维坐标
            h: 差分步长

        Returns:
            ∂Φ1/∂x，形状 (12,)
        """
        x = np.asarray(x, dtype=float)
        # 先在基点做一次带校验的求值，传播几何异常
        self.value(x)
        offsets = h * np.eye(12)
        shifted = np.concatenate([x + offsets, x - offsets]).reshape(24, 4, 3)
        values = quad_flux_batch(self._positions, self._values, shifted)
        return (values[:12] - values[12:]) / (2.0 * h)


def flux_jacobian(quad: LeaderQuad, target: PointCharge, h: float = FD_STEP) -> np.ndarray:
    """
    Φ1 关于 12 个领航者坐标的雅可比（中心差分）

    Args:
        quad: 领航者四边形
        target: 点电荷目标
        h: 差分步长（m）

    Returns:
        12 维向量，按 (p1, p2, p3, p4) 依次排列 xyz
    """
    return FluxObjective([target]).gradient(quad.to_vector(), h=h)


def per_uav_norms(dx: np.ndarray) -> np.ndarray:
    """12 维位移中每个无人机的位移长度"""
    return np.linalg.norm(np.asarray(dx).reshape(-1, 3), axis=1)


def clamp_step(dx: np.ndarray, step_cap: float) -> np.ndarray:
    """整体缩放位移，使单机位移不超过 step_cap（保持方向）"""
    largest = float(np.max(per_uav_norms(dx)))
    if largest <= step_cap or largest == 0.0:
        return dx
    return dx * (step_cap / largest)


class BasePlanner(ABC):
    """
    规划器基类，定义所有规划器的核心接口
    """

    method = "base"

    def __init__(self, target: TargetModel):
        """
        初始化规划器

        Args:
            target: 目标模型
        """
        self.target = target

    @abstractmethod
    def plan(self, start: LeaderQuad) -> PlannedPath:
        """
        从初始四边形规划路径

        Args:
            start: 初始领航者四边形

        Returns:
            规划路径

        Raises:
            NotConverged: 达到最大迭代次数，异常中携带部分路径
        """
        pass

    def distance_to_target(self, quad: LeaderQuad) -> float:
        """四边形质心到目标中心的距离"""
        return float(np.linalg.norm(quad.centroid() - self.target.center))

    @staticmethod
    def default_stop_radius(start: LeaderQuad) -> float:
        """未指定停止半径时取初始编队的外接圆半径，整个规划过程中保持不变"""
        return start.circumradius()

    def within_stop_radius(self, quad: LeaderQuad, stop_radius: float) -> bool:
        """质心是否进入停止半径"""
        return self.distance_to_target(quad) <= stop_radius
