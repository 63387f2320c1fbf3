"""
目标建模
单个点电荷目标，以及离散目标集合的电荷中心（COC）约化
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from src.errors import EmptyTargetSet
from src.flux.geometry import PointCharge, Vec3, as_vec3
from src.flux.solid_angle import flux_quad_boundary
from src.formation.quad import LeaderQuad

SINGLE = "single"
CLUSTER = "cluster"


@dataclass(frozen=True)
class TargetModel:
    """目标模型：单点或目标群（以 COC + 有效半径表示）"""

    kind: str
    center: Vec3
    charge: float = 1.0
    effective_radius: float = 0.0
    members: np.ndarray = field(default_factory=lambda: np.zeros((0, 3)))

    def __post_init__(self):
        if self.kind not in (SINGLE, CLUSTER):
            raise ValueError(f"未知目标类型: {self.kind}")
        object.__setattr__(self, "center", as_vec3(self.center))
        object.__setattr__(self, "members", np.asarray(self.members, dtype=float).reshape(-1, 3))

    def as_charge(self) -> PointCharge:
        """COC 处的等效点电荷"""
        return PointCharge(self.center, self.charge)

    def member_charges(self) -> List[PointCharge]:
        """每个成员平分总电荷；单点目标返回自身"""
        if len(self.members) == 0:
            return [self.as_charge()]
        share = self.charge / len(self.members)
        return [PointCharge(m, share) for m in self.members]


def single_target(position: Iterable[float], charge: float = 1.0) -> TargetModel:
    """单个点目标"""
    return TargetModel(kind=SINGLE, center=as_vec3(position), charge=charge)


def coc_reduce(members: Iterable[Iterable[float]]) -> TargetModel:
    """
    将离散目标约化为电荷中心与有效半径

    Args:
        members: 目标位置列表

    Returns:
        TargetModel，center 为算术平均，effective_radius 为成员到中心的最大距离，总电荷为 1

    Raises:
        EmptyTargetSet: 目标列表为空
    """
    points = np.asarray(list(members), dtype=float).reshape(-1, 3)
    if len(points) == 0:
        raise EmptyTargetSet("目标集合为空，无法计算电荷中心")
    if not np.all(np.isfinite(points)):
        raise ValueError("目标位置包含非有限值")
    center = points.mean(axis=0)
    radius = float(np.max(np.linalg.norm(points - center, axis=1)))
    return TargetModel(kind=CLUSTER, center=center, charge=1.0, effective_radius=radius, members=points)


def exact_multi_flux(members: Iterable[Iterable[float]], quad: LeaderQuad) -> float:
    """
    逐个成员求和的精确通量（总电荷归一化为 1）

    Args:
        members: 目标位置列表
        quad: 领航者四边形

    Returns:
        各成员单位电荷通量之和除以成员数
    """
    points = np.asarray(list(members), dtype=float).reshape(-1, 3)
    if len(points) == 0:
        raise EmptyTargetSet("目标集合为空")
    total = sum(flux_quad_boundary(PointCharge(p, 1.0), quad) for p in points)
    return total / len(points)


def sample_cluster(mean: Iterable[float], sigma: float, count: int, seed: Optional[int]) -> np.ndarray:
    """
    按各轴独立正态分布采样目标位置

    Args:
        mean: 均值向量
        sigma: 各轴标准差
        count: 目标数量
        seed: 随机种子

    Returns:
        目标位置，形状 (count, 3)
    """
    if count <= 0:
        raise EmptyTargetSet(f"目标数量必须为正，实际为 {count}")
    rng = np.random.default_rng(seed)
    return rng.normal(loc=as_vec3(mean), scale=float(sigma), size=(count, 3))
