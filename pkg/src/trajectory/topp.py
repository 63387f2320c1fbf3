"""
时间最优路径参数化
把同步的编队路径视为 ℝ^(3N) 中的一条曲线，以前向-后向积分求速度曲线
"""

import logging
import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from src.config import config
from src.errors import InfeasiblePath
from src.planners.base import PlannedPath

logger = logging.getLogger(__name__)

# 约束校验容差
LIMIT_SLACK = 1e-6
# 校验失败时依次收紧的限幅系数
TIGHTENING_FACTORS = (1.0, 0.995, 0.98, 0.95, 0.9, 0.8)
MIN_GRID = 500
MAX_GRID = 10000
_BISECTION_STEPS = 60
# 速度曲线修正：每轮压低上限的系数与最大轮数
REPAIR_FACTOR = 0.95
MAX_REPAIRS = 200
_EPS = 1e-12


@dataclass(frozen=True)
class KinematicLimits:
    """单机速度与加速度上限"""

    v_max: float = 10.0
    a_max: float = 5.0

    def __post_init__(self):
        if not (self.v_max > 0 and self.a_max > 0):
            raise ValueError(f"v_max 与 a_max 必须为正: v_max={self.v_max}, a_max={self.a_max}")

    @classmethod
    def from_config(cls) -> "KinematicLimits":
        trajectory_config = config.get_trajectory_config()
        return cls(v_max=trajectory_config["v_max"], a_max=trajectory_config["a_max"])

    def scaled(self, factor: float) -> "KinematicLimits":
        return KinematicLimits(self.v_max * factor, self.a_max * factor)


@dataclass
class Trajectory:
    """
    时间参数化轨迹

    所有无人机共享时间戳；positions/velocities/accelerations 形状均为 (M, N, 3)。
    """

    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    accelerations: np.ndarray
    dt: float
    path_parameter: np.ndarray = None

    def __post_init__(self):
        if len(self.t) < 2:
            raise ValueError("轨迹至少需要两个采样点")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("轨迹时间戳必须严格递增")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def n_uavs(self) -> int:
        return self.positions.shape[1]

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    def speeds(self) -> np.ndarray:
        """(M, N) 速度模长"""
        return np.linalg.norm(self.velocities, axis=2)

    def accel_norms(self) -> np.ndarray:
        """(M, N) 加速度模长"""
        return np.linalg.norm(self.accelerations, axis=2)

    def max_speed(self) -> float:
        return float(np.max(self.speeds()))

    def max_accel(self) -> float:
        return float(np.max(self.accel_norms()))

    def within(self, limits: KinematicLimits) -> bool:
        return (self.max_speed() <= limits.v_max + LIMIT_SLACK
                and self.max_accel() <= limits.a_max + LIMIT_SLACK)


def _path_spline(path: PlannedPath) -> Tuple[CubicHermiteSpline, float, int]:
    """
    弦长参数化的 Catmull-Rom 样条

    Returns:
        (样条, 总长度 L, 无人机数)

    Raises:
        InfeasiblePath: 路径长度为零
    """
    n_uavs = path.n_uavs
    q = path.positions.reshape(len(path), -1)
    chords = np.linalg.norm(np.diff(q, axis=0), axis=1)
    keep = np.concatenate([[True], chords > _EPS])
    q = q[keep]
    if len(q) < 2:
        raise InfeasiblePath("路径长度为零，无法参数化")
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(q, axis=0), axis=1))])

    tangents = np.empty_like(q)
    tangents[0] = (q[1] - q[0]) / (s[1] - s[0])
    tangents[-1] = (q[-1] - q[-2]) / (s[-1] - s[-2])
    if len(q) > 2:
        tangents[1:-1] = (q[2:] - q[:-2]) / (s[2:] - s[:-2])[:, None]
    return CubicHermiteSpline(s, q, tangents, axis=0), float(s[-1]), n_uavs


def _accel_bounds(z: np.ndarray, second: np.ndarray, first: np.ndarray,
                  a_max: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    给定 z = ṡ²，求 w = s̈ 的可行区间

    每架无人机 ‖x″z + x′w‖ ≤ a_max 给出 w 的一个区间，结果为所有区间的交集。

    Args:
        z: (n,)
        second: x″，形状 (n, N, 3)
        first: x′，形状 (n, N, 3)
        a_max: 加速度上限

    Returns:
        (下界, 上界, 是否可行)，均为 (n,)
    """
    bb = np.sum(first * first, axis=2)
    ab = np.sum(second * first, axis=2)
    aa = np.sum(second * second, axis=2)
    zc = z[:, None]

    regular = bb > _EPS
    safe_bb = np.where(regular, bb, 1.0)
    disc = (zc * ab) ** 2 - bb * (zc ** 2 * aa - a_max ** 2)
    root = np.sqrt(np.maximum(disc, 0.0))
    lo = np.where(regular, (-zc * ab - root) / safe_bb, -np.inf)
    hi = np.where(regular, (-zc * ab + root) / safe_bb, np.inf)
    ok = np.where(regular, disc >= 0.0, zc * np.sqrt(aa) <= a_max)

    lower = np.max(lo, axis=1)
    upper = np.min(hi, axis=1)
    feasible = np.all(ok, axis=1) & (lower <= upper)
    return lower, upper, feasible


def _max_velocity_curve(first: np.ndarray, second: np.ndarray, limits: KinematicLimits) -> np.ndarray:
    """速度与加速度共同决定的 z 上限"""
    speed_factor = np.max(np.linalg.norm(first, axis=2), axis=1)
    z_velocity = np.where(speed_factor > _EPS,
                          (limits.v_max / np.maximum(speed_factor, _EPS)) ** 2, np.inf)

    # 垂直于切向的曲率分量给出 z 的上界，再二分求精确值
    bb = np.sum(first * first, axis=2)
    ab = np.sum(second * first, axis=2)
    perp = second - (ab / np.where(bb > _EPS, bb, 1.0))[:, :, None] * first
    perp_norm = np.max(np.linalg.norm(perp, axis=2), axis=1)
    z_curvature = np.where(perp_norm > _EPS, limits.a_max / np.maximum(perp_norm, _EPS), np.inf)

    ceiling = np.minimum(z_velocity, z_curvature)
    ceiling = np.where(np.isfinite(ceiling), ceiling, 1e12)
    _, _, feasible_top = _accel_bounds(ceiling, second, first, limits.a_max)
    lower = np.zeros_like(ceiling)
    upper = ceiling.copy()
    for _ in range(_BISECTION_STEPS):
        mid = 0.5 * (lower + upper)
        _, _, feasible = _accel_bounds(mid, second, first, limits.a_max)
        lower = np.where(feasible, mid, lower)
        upper = np.where(feasible, upper, mid)
    return np.where(feasible_top, ceiling, lower)


@dataclass
class SegmentDerivatives:
    """
    每个网格段起点（右极限）、中点、终点（左极限）处的 x′ 与 x″

    各数组形状为 (段数, N, 3)。样条节点都在网格上，因此段内 x″ 连续。
    """

    first_start: np.ndarray
    second_start: np.ndarray
    first_mid: np.ndarray
    second_mid: np.ndarray
    first_end: np.ndarray
    second_end: np.ndarray


def _grid(knots: np.ndarray, length: float, grid_step: float) -> np.ndarray:
    """均匀网格并入样条节点，去掉与节点过近的均匀点"""
    n_intervals = min(max(MIN_GRID, math.ceil(length / grid_step)), MAX_GRID)
    uniform = np.linspace(0.0, length, n_intervals + 1)
    h = length / n_intervals
    right = np.clip(np.searchsorted(knots, uniform), 0, len(knots) - 1)
    left = np.clip(right - 1, 0, len(knots) - 1)
    nearest = np.minimum(np.abs(uniform - knots[left]), np.abs(uniform - knots[right]))
    return np.union1d(uniform[nearest > 1e-6 * h], knots)


def _segment_derivatives(spline: CubicHermiteSpline, grid: np.ndarray, n_uavs: int) -> SegmentDerivatives:
    starts = grid[:-1]
    ends = np.nextafter(grid[1:], -np.inf)
    mids = 0.5 * (grid[:-1] + grid[1:])
    shape = (len(starts), n_uavs, 3)

    def at(points, order):
        return spline(points, order).reshape(shape)

    return SegmentDerivatives(
        first_start=at(starts, 1), second_start=at(starts, 2),
        first_mid=at(mids, 1), second_mid=at(mids, 2),
        first_end=at(ends, 1), second_end=at(ends, 2),
    )


def _node_ceiling(derivs: SegmentDerivatives, limits: KinematicLimits) -> np.ndarray:
    """节点上的 z 上限，取两侧单边导数结果的较小者"""
    n_segments = len(derivs.first_start)
    ceiling = np.full(n_segments + 1, np.inf)
    ceiling[:-1] = _max_velocity_curve(derivs.first_start, derivs.second_start, limits)
    ceiling[1:] = np.minimum(ceiling[1:], _max_velocity_curve(derivs.first_end, derivs.second_end, limits))
    return ceiling


def _speed_profile(derivs: SegmentDerivatives, ceiling: np.ndarray, h: np.ndarray,
                   limits: KinematicLimits) -> np.ndarray:
    """前向加速、后向减速积分，返回节点上的 z = ṡ²"""
    n = len(ceiling)
    forward = np.zeros(n)
    for k in range(n - 1):
        _, w_hi, _ = _accel_bounds(forward[k:k + 1], derivs.second_start[k:k + 1],
                                   derivs.first_start[k:k + 1], limits.a_max)
        forward[k + 1] = min(ceiling[k + 1], max(forward[k] + 2.0 * h[k] * float(w_hi[0]), 0.0))

    profile = forward.copy()
    profile[-1] = 0.0
    for k in range(n - 1, 0, -1):
        w_lo, _, _ = _accel_bounds(profile[k:k + 1], derivs.second_end[k - 1:k],
                                   derivs.first_end[k - 1:k], limits.a_max)
        profile[k - 1] = min(forward[k - 1], max(profile[k] - 2.0 * h[k - 1] * float(w_lo[0]), 0.0))
    profile[0] = 0.0
    return profile


def _segment_violations(derivs: SegmentDerivatives, z: np.ndarray, h: np.ndarray,
                        limits: KinematicLimits) -> Tuple[np.ndarray, np.ndarray]:
    """
    段内常值 s̈ 下，在起点、中点、终点检查速度与加速度

    Returns:
        (违反约束的段掩码, 各段 s̈)
    """
    w = (z[1:] - z[:-1]) / (2.0 * h)
    checks = (
        (derivs.first_start, derivs.second_start, z[:-1]),
        (derivs.first_mid, derivs.second_mid, 0.5 * (z[:-1] + z[1:])),
        (derivs.first_end, derivs.second_end, z[1:]),
    )
    bad = np.zeros(len(w), dtype=bool)
    for first, second, zz in checks:
        accel = second * zz[:, None, None] + first * w[:, None, None]
        accel_norm = np.max(np.linalg.norm(accel, axis=2), axis=1)
        speed = np.sqrt(np.maximum(zz, 0.0)) * np.max(np.linalg.norm(first, axis=2), axis=1)
        bad |= (accel_norm > limits.a_max * (1.0 + 1e-9)) | (speed > limits.v_max * (1.0 + 1e-9))
    return bad, w


def _feasible_profile(derivs: SegmentDerivatives, ceiling: np.ndarray, h: np.ndarray,
                      limits: KinematicLimits) -> np.ndarray:
    """
    反复积分，每轮把违反约束的段中 z 较高一端的上限压低 REPAIR_FACTOR

    Raises:
        InfeasiblePath: MAX_REPAIRS 轮后仍有违反约束的段
    """
    ceiling = ceiling.copy()
    for _ in range(MAX_REPAIRS):
        z = _speed_profile(derivs, ceiling, h, limits)
        bad, w = _segment_violations(derivs, z, h, limits)
        if not np.any(bad):
            return z
        segments = np.flatnonzero(bad)
        nodes = np.concatenate([segments[w[segments] >= 0.0] + 1, segments[w[segments] <= 0.0]])
        ceiling[nodes] = np.minimum(ceiling[nodes], REPAIR_FACTOR * z[nodes])
    raise InfeasiblePath(f"速度曲线在 {MAX_REPAIRS} 轮修正后仍有 {int(np.sum(bad))} 段违反约束")


def _sample(spline: CubicHermiteSpline, grid: np.ndarray, z: np.ndarray, dt: float,
            n_uavs: int) -> Trajectory:
    """按段内常值 s̈ 精确采样"""
    h = np.diff(grid)
    speed = np.sqrt(z)
    segment_time = 2.0 * h / (speed[:-1] + speed[1:])
    knots = np.concatenate([[0.0], np.cumsum(segment_time)])
    total = float(knots[-1])
    path_accel = (z[1:] - z[:-1]) / (2.0 * h)

    t = np.arange(0.0, total, dt)
    if total - t[-1] > 1e-9 * max(total, 1.0):
        t = np.append(t, total)
    else:
        t[-1] = total

    idx = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, len(segment_time) - 1)
    tau = t - knots[idx]
    w = path_accel[idx]
    sd = np.maximum(speed[idx] + w * tau, 0.0)
    s = grid[idx] + speed[idx] * tau + 0.5 * w * tau ** 2
    # 导数取所在段的多项式：终点处用左极限
    s = np.clip(s, grid[idx], np.nextafter(grid[idx + 1], -np.inf))
    sd[-1] = 0.0

    shape = (len(t), n_uavs, 3)
    x = spline(s).reshape(shape)
    x1 = spline(s, 1).reshape(shape)
    x2 = spline(s, 2).reshape(shape)
    velocities = x1 * sd[:, None, None]
    accelerations = x2 * (sd ** 2)[:, None, None] + x1 * w[:, None, None]
    return Trajectory(t=t, positions=x, velocities=velocities, accelerations=accelerations,
                      dt=dt, path_parameter=s)


def parameterize(path: PlannedPath, limits: KinematicLimits, dt: float,
                 grid_step: float = 0.05) -> Trajectory:
    """
    时间最优参数化

    速度上限作用于最快的无人机，加速度上限含向心项；首尾静止。
    样条节点并入弧长网格，每段在两端与中点校验约束；
    采样校验失败时按 TIGHTENING_FACTORS 收紧限幅重算。

    Args:
        path: 规划路径（至少两个快照）
        limits: 运动学限制
        dt: 采样周期（s）
        grid_step: 弧长网格步长

    Returns:
        Trajectory

    Raises:
        InfeasiblePath: 路径长度为零，或存在尖点导致内部速度为零
    """
    if dt <= 0:
        raise ValueError(f"dt 必须为正，实际为 {dt}")
    if len(path) < 2:
        raise InfeasiblePath("路径至少需要两个快照")

    spline, length, n_uavs = _path_spline(path)
    grid = _grid(spline.x, length, grid_step)
    h = np.diff(grid)
    derivs = _segment_derivatives(spline, grid, n_uavs)

    for factor in TIGHTENING_FACTORS:
        effective = limits.scaled(factor)
        ceiling = _node_ceiling(derivs, effective)
        if np.any(ceiling[1:-1] <= 0.0):
            raise InfeasiblePath("路径存在尖点，零速下加速度需求仍超限")
        z = _feasible_profile(derivs, ceiling, h, effective)
        if np.any(z[1:-1] <= 0.0):
            raise InfeasiblePath("速度曲线在路径内部降为零，路径存在尖点")
        trajectory = _sample(spline, grid, z, dt, n_uavs)
        if trajectory.within(limits):
            if factor < 1.0:
                logger.warning("轨迹限幅收紧到 %.3f 倍后满足约束", factor)
            logger.info("轨迹参数化完成: 时长 %.2f s, %d 个采样, 最大速度 %.2f m/s, 最大加速度 %.2f m/s²",
                        trajectory.duration, len(trajectory), trajectory.max_speed(), trajectory.max_accel())
            return trajectory
        logger.debug("限幅系数 %.3f 下校验失败: 速度 %.4f, 加速度 %.4f",
                     factor, trajectory.max_speed(), trajectory.max_accel())
    raise InfeasiblePath(
        f"收紧限幅后仍无法满足约束: 速度 {trajectory.max_speed():.4f}, 加速度 {trajectory.max_accel():.4f}"
    )
