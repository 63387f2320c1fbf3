"""
最小二乘通量规划器（LS）
带可选 β 形状保持项的 Tikhonov 正则化迭代更新
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.linalg

from src.config import config
from src.errors import NotConverged, SingularSystem
from src.flux.geometry import PointCharge
from src.flux.solid_angle import flux_quad_boundary
from src.formation.quad import LeaderQuad
from src.targets.model import TargetModel, single_target
from .base import BasePlanner, PlannedPath, clamp_step, flux_jacobian

logger = logging.getLogger(__name__)

# 循环差分矩阵 B：(Bx)_i = x_i − x_{i+1}
CIRCULANT_B = np.array([
    [1.0, -1.0, 0.0, 0.0],
    [0.0, 1.0, -1.0, 0.0],
    [0.0, 0.0, 1.0, -1.0],
    [-1.0, 0.0, 0.0, 1.0],
])

# 按 (p1, p2, p3, p4) 排列 xyz 时，blockdiag(B, B, B) 等价于 kron(B, I3)
RETENTION_A = np.kron(CIRCULANT_B, np.eye(3))
RETENTION_ATA = RETENTION_A.T @ RETENTION_A


@dataclass
class LsConfig:
    """LS 规划器配置"""

    alpha: float = 1000.0
    beta: float = 0.0
    phi_gain: float = 0.05
    phi_floor: float = 1e-4
    max_iters: int = 2000
    step_cap: float = 0.5
    stop_radius: Optional[float] = None
    normalize_flux: bool = True
    plateau_tol: float = 1e-6
    plateau_window: int = 10
    max_backtracks: int = 8

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError(f"alpha 必须为正，实际为 {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta 不能为负，实际为 {self.beta}")
        if self.max_iters <= 0:
            raise ValueError(f"max_iters 必须为正，实际为 {self.max_iters}")
        if self.step_cap <= 0:
            raise ValueError(f"step_cap 必须为正，实际为 {self.step_cap}")
        if self.stop_radius is not None and self.stop_radius <= 0:
            raise ValueError(f"stop_radius 必须为正，实际为 {self.stop_radius}")
        if self.phi_gain <= 0 or self.phi_floor <= 0:
            raise ValueError("phi_gain 与 phi_floor 必须为正")

    @classmethod
    def from_config(cls, **overrides) -> "LsConfig":
        """以全局配置为默认值构建"""
        values = dict(config.get_ls_config())
        values.update(overrides)
        return cls(**values)


def target_increment(phi1: float, cfg: LsConfig) -> float:
    """每步期望的覆盖通量增量 φr = gain·|Φ1| + floor"""
    return cfg.phi_gain * abs(phi1) + cfg.phi_floor


def flux_scale(phi1: float, cfg: LsConfig) -> float:
    """归一化尺度 s = |Φ1| + floor；关闭 normalize_flux 时为 1"""
    return abs(phi1) + cfg.phi_floor if cfg.normalize_flux else 1.0


def effective_alpha(phi1: float, cfg: LsConfig) -> float:
    """原始雅可比上的等效权重 α' = α/s²"""
    return cfg.alpha / flux_scale(phi1, cfg) ** 2


def ls_system(quad: LeaderQuad, target: PointCharge, cfg: LsConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    组装 (I + α' JJᵀ + β AᵀA) Δx = α' J φr

    J 为覆盖通量 −Φ1 的雅可比，φr 为 target_increment。α' = α/s²，
    s = |Φ1| + floor，即 α 作用于相对通量变化：远处通量很小时权重随之放大。

    Args:
        quad: 当前四边形
        target: 点电荷目标
        cfg: LS 配置

    Returns:
        (系统矩阵 12×12, 右端项 12)
    """
    phi1 = flux_quad_boundary(target, quad)
    jacobian = -flux_jacobian(quad, target)
    weight = effective_alpha(phi1, cfg)
    matrix = np.eye(12) + weight * np.outer(jacobian, jacobian) + cfg.beta * RETENTION_ATA
    rhs = weight * jacobian * target_increment(phi1, cfg)
    return matrix, rhs


def ls_step(quad: LeaderQuad, target: PointCharge, cfg: LsConfig) -> Tuple[np.ndarray, LeaderQuad]:
    """
    单步 LS 更新

    Args:
        quad: 当前四边形
        target: 点电荷目标
        cfg: LS 配置

    Returns:
        (限幅后的 Δx, 新四边形)

    Raises:
        SingularSystem: 线性系统无法求解
    """
    matrix, rhs = ls_system(quad, target, cfg)
    try:
        dx = scipy.linalg.solve(matrix, rhs, assume_a="pos")
    except (np.linalg.LinAlgError, ValueError) as e:
        raise SingularSystem(f"LS 线性系统奇异，条件数 {np.linalg.cond(matrix):.3e}: {e}") from e
    dx = clamp_step(dx, cfg.step_cap)
    return dx, LeaderQuad.from_vector(quad.to_vector() + dx)


class LsPlanner(BasePlanner):
    """
    LS 规划器，迭代求解正则化最小二乘直到包围目标
    """

    def __init__(self, target: TargetModel, cfg: LsConfig = None):
        """
        初始化LsPlanner

        Args:
            target: 目标模型（使用其 COC 电荷）
            cfg: LS 配置，默认取全局配置
        """
        super().__init__(target)
        self.cfg = cfg or LsConfig.from_config()
        self.charge = target.as_charge()
        self.method = f"ls_beta{self.cfg.beta:g}"

    def coverage(self, quad: LeaderQuad) -> float:
        """覆盖通量 −Φ1"""
        return -flux_quad_boundary(self.charge, quad)

    def step(self, quad: LeaderQuad) -> Tuple[LeaderQuad, float, bool]:
        """
        带回溯的单步更新，保证覆盖通量不减

        Returns:
            (新四边形, 新覆盖通量, 是否已无法继续增加)
        """
        current = self.coverage(quad)
        dx, _ = ls_step(quad, self.charge, self.cfg)
        x = quad.to_vector()
        for _ in range(self.cfg.max_backtracks + 1):
            candidate = LeaderQuad.from_vector(x + dx)
            value = self.coverage(candidate)
            if value >= current - 1e-9:
                return candidate, value, False
            dx = 0.5 * dx
        logger.debug("LS 回溯失败，覆盖通量已达局部最大: %.6g", current)
        return quad, current, True

    def plan(self, start: LeaderQuad) -> PlannedPath:
        """
        迭代 LS 更新

        Args:
            start: 初始四边形

        Returns:
            PlannedPath（每次迭代一个快照）

        Raises:
            NotConverged: 达到 max_iters，异常中携带部分路径
        """
        cfg = self.cfg
        stop_radius = self.default_stop_radius(start) if cfg.stop_radius is None else cfg.stop_radius
        quad = start
        quads = [quad]
        history = [self.coverage(quad)]
        converged = self.within_stop_radius(quad, stop_radius)

        iteration = 0
        while not converged and iteration < cfg.max_iters:
            iteration += 1
            quad, value, stalled = self.step(quad)
            if stalled:
                converged = True
                break
            quads.append(quad)
            history.append(value)
            logger.debug("LS 迭代 %d: 覆盖通量 %.6g, 距离 %.3f m",
                         iteration, value, self.distance_to_target(quad))

            if self.within_stop_radius(quad, stop_radius):
                converged = True
            elif len(history) > cfg.plateau_window:
                previous = history[-1 - cfg.plateau_window]
                if abs(value - previous) <= cfg.plateau_tol * max(abs(value), 1e-12):
                    logger.info("LS 覆盖通量进入平台期，停止迭代")
                    converged = True

        path = PlannedPath.from_quads(quads, converged=converged, method=self.method)
        if not converged:
            raise NotConverged(f"LS 在 {cfg.max_iters} 次迭代内未到达目标", path=path)
        logger.info("LS(β=%g) 完成: %d 次迭代, 总路径长度 %.1f m",
                    cfg.beta, len(path) - 1, path.combined_length)
        return path


def plan_ls(start: LeaderQuad, target: PointCharge, cfg: LsConfig = None) -> PlannedPath:
    """
    LS 规划入口

    Args:
        start: 初始四边形
        target: 点电荷目标
        cfg: LS 配置

    Returns:
        PlannedPath
    """
    model = single_target(target.position, target.charge)
    return LsPlanner(model, cfg).plan(start)
