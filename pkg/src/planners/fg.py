"""
通量引导规划器（FG）
在四条边长等式约束下直接最小化 Φ1，由 SQP 外迭代生成路径
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from src.config import config
from src.errors import ChargeOnSurface, NotConverged
from src.flux.geometry import EPS_GEOM, PointCharge, Vec3
from src.flux.solid_angle import flux_quad_boundary
from src.formation.quad import LeaderQuad, quad_frame
from src.targets.model import TargetModel, exact_multi_flux
from .base import BasePlanner, FluxObjective, PlannedPath
from .sqp import (
    HESSIAN_MODELS,
    SqpOptions,
    SqpState,
    restore_feasibility,
    side_constraints,
    sqp_step,
)

logger = logging.getLogger(__name__)

TARGET_MODES = ("coc", "exact")

# 目标群停止距离的候选值，以有效半径 ρ 为单位
STANDOFF_GRID = np.linspace(1.0, 10.0, 181)
# 质心落在停止球面上的相对容差
SPHERE_TOL = 1e-9


@dataclass(frozen=True)
class ScaleSchedule:
    """边长线性斜坡：第 k 次迭代的 l 从 l_start 过渡到 l_end，共 n_iters 次"""

    l_start: float
    l_end: float
    n_iters: int = 0

    def __post_init__(self):
        if self.l_start <= 0 or self.l_end <= 0:
            raise ValueError(f"边长必须为正: l_start={self.l_start}, l_end={self.l_end}")
        if self.n_iters < 0:
            raise ValueError(f"n_iters 不能为负，实际为 {self.n_iters}")

    def length_at(self, iteration: int) -> float:
        if self.n_iters == 0 or iteration >= self.n_iters:
            return self.l_end
        return self.l_start + (self.l_end - self.l_start) * max(iteration, 0) / self.n_iters

    def finished(self, iteration: int) -> bool:
        return iteration >= self.n_iters


@dataclass
class FgConfig:
    """FG 规划器配置"""

    side_length: float = 5.0
    max_outer_iters: int = 2000
    step_cap: float = 0.5
    constraint_tol: float = 1e-6
    optimality_tol: float = 1e-6
    stop_radius: Optional[float] = None
    scale_schedule: Optional[ScaleSchedule] = None
    hessian: str = "identity"
    target_mode: str = "coc"
    coc_tolerance: float = 0.02

    def __post_init__(self):
        if self.side_length <= 0:
            raise ValueError(f"side_length 必须为正，实际为 {self.side_length}")
        if self.max_outer_iters <= 0:
            raise ValueError(f"max_outer_iters 必须为正，实际为 {self.max_outer_iters}")
        if self.step_cap <= 0:
            raise ValueError(f"step_cap 必须为正，实际为 {self.step_cap}")
        if self.constraint_tol <= 0 or self.optimality_tol <= 0:
            raise ValueError("constraint_tol 与 optimality_tol 必须为正")
        if self.stop_radius is not None and self.stop_radius <= 0:
            raise ValueError(f"stop_radius 必须为正，实际为 {self.stop_radius}")
        if self.hessian not in HESSIAN_MODELS:
            raise ValueError(f"未知 Hessian 模型: {self.hessian}")
        if self.target_mode not in TARGET_MODES:
            raise ValueError(f"未知目标模式: {self.target_mode}，可选 {TARGET_MODES}")
        if not 0 < self.coc_tolerance < 1:
            raise ValueError(f"coc_tolerance 应在 (0, 1) 内，实际为 {self.coc_tolerance}")

    @classmethod
    def from_config(cls, **overrides) -> "FgConfig":
        """以全局配置为默认值构建"""
        values = dict(config.get_fg_config())
        values.update(overrides)
        return cls(**values)

    def sqp_options(self) -> SqpOptions:
        return SqpOptions(
            step_cap=self.step_cap,
            constraint_tol=self.constraint_tol,
            optimality_tol=self.optimality_tol,
            hessian=self.hessian,
        )


def constraints(quad: LeaderQuad, l: float) -> np.ndarray:
    """
    边长约束 c_i = ‖edge_i‖² − l²

    Args:
        quad: 领航者四边形
        l: 目标边长

    Returns:
        4 维约束向量
    """
    return side_constraints(quad.to_vector(), l)


def fg_step(state: SqpState, target: PointCharge, cfg: FgConfig,
            side_length: Optional[float] = None) -> SqpState:
    """
    单次 FG 外迭代：以 Φ1 为目标的 SQP 步

    Φ1 在四边形法向朝向电荷时为负，最小化 Φ1 即驱动编队朝向并逼近目标。

    Args:
        state: 当前 SQP 状态
        target: 点电荷目标
        cfg: FG 配置
        side_length: 本次迭代的边长，默认 cfg.side_length

    Returns:
        新 SQP 状态

    Raises:
        KktSingular: KKT 系统无法求解
        LineSearchFailed: 线搜索失败
    """
    objective = FluxObjective([target])
    l = cfg.side_length if side_length is None else side_length
    return sqp_step(state, objective.value, objective.gradient, l, cfg.sqp_options())


def facing_square(center: Vec3, direction: Vec3, distance: float, side_length: float,
                  reference_edge: Optional[Vec3] = None) -> LeaderQuad:
    """
    正对目标的理想正方形

    质心位于 center − distance·û，法向为 û（Φ1 为负）。reference_edge 在垂直于 û 的平面上的
    投影决定 p1→p2 的方向。

    Args:
        center: 目标中心
        direction: 编队指向目标的方向 û（无需单位化）
        distance: 质心到目标中心的距离
        side_length: 边长
        reference_edge: 参考边方向

    Returns:
        LeaderQuad
    """
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)
    edge = np.array([0.0, 1.0, 0.0]) if reference_edge is None else np.asarray(reference_edge, dtype=float)
    a = edge - np.dot(edge, u) * u
    if np.linalg.norm(a) <= EPS_GEOM:
        a = np.cross(u, [1.0, 0.0, 0.0] if abs(u[0]) < 0.9 else [0.0, 1.0, 0.0])
    a = a / np.linalg.norm(a)
    b = np.cross(u, a)
    centroid = np.asarray(center, dtype=float) - distance * u
    half = 0.5 * side_length
    return LeaderQuad(np.stack([centroid + half * (sa * a + sb * b)
                                for sa, sb in ((-1, -1), (1, -1), (1, 1), (-1, 1))]))


def cluster_standoff(target: TargetModel, start: LeaderQuad, side_length: float,
                     tolerance: float) -> float:
    """
    目标群的停止距离

    沿初始质心指向 COC 的方向放置边长 side_length 的理想正方形，取 COC 通量与逐成员
    精确通量相对偏差在该距离及更远处都不超过 tolerance 的最近距离，不小于 ρ。

    Args:
        target: 目标群模型
        start: 初始四边形
        side_length: 最终边长
        tolerance: 允许的相对偏差

    Returns:
        停止距离（m）
    """
    radius = target.effective_radius
    direction = target.center - start.centroid()
    if np.linalg.norm(direction) <= EPS_GEOM:
        direction = quad_frame(start)[1]
    charge = target.as_charge()

    errors = np.empty(len(STANDOFF_GRID))
    for i, factor in enumerate(STANDOFF_GRID):
        pose = facing_square(target.center, direction, factor * radius, side_length, start.p2 - start.p1)
        try:
            exact = exact_multi_flux(target.members, pose)
            errors[i] = abs(exact - flux_quad_boundary(charge, pose)) / max(abs(exact), 1e-300)
        except ChargeOnSurface:
            errors[i] = math.inf

    failing = np.flatnonzero(errors > tolerance)
    if len(failing) == 0:
        return float(STANDOFF_GRID[0] * radius)
    if failing[-1] == len(STANDOFF_GRID) - 1:
        logger.warning("目标群在 %.1fρ 内 COC 近似偏差均超过 %.1f%%，使用最远候选距离",
                       STANDOFF_GRID[-1], 100.0 * tolerance)
        return float(STANDOFF_GRID[-1] * radius)
    return float(STANDOFF_GRID[failing[-1] + 1] * radius)


class FgPlanner(BasePlanner):
    """
    FG 规划器，保持边长约束的同时最大化覆盖通量

    质心不会进入停止球面以内：越过球面的迭代沿径向退回到球面上，
    初始位置已在球面以内时每次迭代最多外退 step_cap。
    """

    method = "fg"

    def __init__(self, target: TargetModel, cfg: FgConfig = None):
        """
        初始化FgPlanner

        Args:
            target: 目标模型；目标群按 COC 处理，exact 模式下逐成员求和
            cfg: FG 配置，默认取全局配置
        """
        super().__init__(target)
        self.cfg = cfg or FgConfig.from_config()
        self.objective = FluxObjective.from_target(target, exact=self.cfg.target_mode == "exact")

    def schedule_for(self, start: LeaderQuad) -> ScaleSchedule:
        """
        边长计划

        显式 scale_schedule 优先；目标群（ρ > 0）时 l 斜坡到 √2·ρ，
        每次迭代的变化不超过 step_cap/2，且至少覆盖预计接近过程的前一半。
        """
        cfg = self.cfg
        if cfg.scale_schedule is not None:
            return cfg.scale_schedule
        radius = self.target.effective_radius
        if radius <= 0:
            return ScaleSchedule(cfg.side_length, cfg.side_length, 0)
        l_req = math.sqrt(2.0) * radius
        distance = self.distance_to_target(start)
        n_ramp = max(
            math.ceil(abs(l_req - cfg.side_length) / (0.5 * cfg.step_cap)),
            math.ceil(0.5 * distance / cfg.step_cap),
        )
        logger.info("目标群有效半径 %.3f m，边长在 %d 次迭代内由 %.3f 变为 %.3f m",
                    radius, n_ramp, cfg.side_length, l_req)
        return ScaleSchedule(cfg.side_length, l_req, n_ramp)

    def stop_radius_for(self, start: LeaderQuad, schedule: Optional[ScaleSchedule] = None) -> float:
        """
        停止半径

        显式 stop_radius 优先；目标群取 cluster_standoff；单目标取初始编队外接圆半径。
        """
        cfg = self.cfg
        if cfg.stop_radius is not None:
            return cfg.stop_radius
        if self.target.effective_radius > 0 and len(self.target.members) > 1:
            schedule = schedule or self.schedule_for(start)
            radius = cluster_standoff(self.target, start, schedule.l_end, cfg.coc_tolerance)
            logger.info("目标群停止距离 %.3f m（%.2fρ）", radius, radius / self.target.effective_radius)
            return radius
        return self.default_stop_radius(start)

    def hold_standoff(self, previous: LeaderQuad, quad: LeaderQuad, stop_radius: float) -> LeaderQuad:
        """
        把进入停止球面的迭代沿径向平移回去

        平移不改变边长约束。目标距离为 min(stop_radius, 上一快照距离 + step_cap)。

        Args:
            previous: 上一快照
            quad: 本次 SQP 迭代结果
            stop_radius: 停止半径

        Returns:
            平移后的四边形（无需调整时原样返回）
        """
        distance = self.distance_to_target(quad)
        floor = min(stop_radius, self.distance_to_target(previous) + self.cfg.step_cap)
        if distance >= floor:
            return quad
        if distance > EPS_GEOM:
            direction = (quad.centroid() - self.target.center) / distance
        else:
            direction = -quad_frame(quad)[1]
        return quad.translated((floor - distance) * direction)

    def plan(self, start: LeaderQuad) -> PlannedPath:
        """
        迭代 SQP 直到质心落在停止球面上且边长计划完成

        Args:
            start: 初始四边形（先投影到 l(0) 的约束流形，记为第 0 次快照）

        Returns:
            PlannedPath，每个快照都满足边长约束

        Raises:
            NotConverged: 达到 max_outer_iters，异常中携带部分路径
        """
        cfg = self.cfg
        options = cfg.sqp_options()
        schedule = self.schedule_for(start)
        stop_radius = self.stop_radius_for(start, schedule)

        l0 = schedule.length_at(0)
        x = restore_feasibility(start.to_vector(), l0, cfg.constraint_tol * l0 ** 2)
        state = SqpState(x=x, violation=float(np.max(np.abs(side_constraints(x, l0)))))
        quads = [LeaderQuad.from_vector(x)]
        lengths = [l0]
        iterations = [0]

        converged = self._done(quads[-1], schedule, 0, stop_radius)
        iteration = 0
        while not converged and iteration < cfg.max_outer_iters:
            iteration += 1
            l = schedule.length_at(iteration)
            previous = quads[-1]
            state = sqp_step(state, self.objective.value, self.objective.gradient, l, options)
            if state.step_norm == 0.0:
                if schedule.finished(iteration):
                    logger.info("FG 到达约束驻点，停止迭代")
                    converged = True
                    break
                continue
            iterate = LeaderQuad.from_vector(state.x)
            quad = self.hold_standoff(previous, iterate, stop_radius)
            if quad is not iterate:
                x = quad.to_vector()
                state = replace(state, x=x, gradient=self.objective.gradient(x),
                                last_step=x - previous.to_vector())
            quads.append(quad)
            lengths.append(l)
            iterations.append(iteration)
            logger.debug("FG 迭代 %d: Φ1 %.6g, l %.3f, 约束违反 %.2e, 距离 %.3f m",
                         iteration, self.objective.value(state.x), l, state.violation,
                         self.distance_to_target(quad))
            converged = self._done(quad, schedule, iteration, stop_radius)

        path = PlannedPath.from_quads(quads, iterations, converged=converged, method=self.method)
        path.side_length_targets = np.asarray(lengths)
        if not converged:
            raise NotConverged(f"FG 在 {cfg.max_outer_iters} 次迭代内未到达目标", path=path)
        logger.info("FG 完成: %d 次迭代, 总路径长度 %.1f m", len(path) - 1, path.combined_length)
        return path

    def _done(self, quad: LeaderQuad, schedule: ScaleSchedule, iteration: int, stop_radius: float) -> bool:
        distance = self.distance_to_target(quad)
        return (schedule.finished(iteration)
                and abs(distance - stop_radius) <= SPHERE_TOL * stop_radius + EPS_GEOM)


def plan_fg(start: LeaderQuad, target: TargetModel, cfg: FgConfig = None) -> PlannedPath:
    """
    FG 规划入口

    Args:
        start: 初始四边形
        target: 目标模型
        cfg: FG 配置

    Returns:
        PlannedPath
    """
    return FgPlanner(target, cfg).plan(start)
