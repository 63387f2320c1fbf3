"""
PID 轨迹跟踪
每架无人机独立跟踪参考位置，控制量在控制器内部限幅
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from src.config import config
from src.errors import Divergence
from src.trajectory.topp import KinematicLimits, Trajectory
from .dynamics import propagate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PidGains:
    """PID 增益"""

    kp: float = 8.0
    ki: float = 0.5
    kd: float = 4.0
    integral_clamp: float = 2.0

    def __post_init__(self):
        if min(self.kp, self.ki, self.kd) < 0:
            raise ValueError(f"PID 增益不能为负: kp={self.kp}, ki={self.ki}, kd={self.kd}")
        if max(self.kp, self.ki, self.kd) <= 0:
            raise ValueError("PID 增益至少有一个为正")
        if self.integral_clamp < 0:
            raise ValueError(f"integral_clamp 不能为负，实际为 {self.integral_clamp}")

    @classmethod
    def from_config(cls) -> "PidGains":
        sim_config = config.get_sim_config()
        return cls(
            kp=sim_config["kp"],
            ki=sim_config["ki"],
            kd=sim_config["kd"],
            integral_clamp=sim_config["integral_clamp"],
        )


def pid_control(error: np.ndarray, error_integral: np.ndarray, error_derivative: np.ndarray,
                gains: PidGains, a_max: float, feedforward: Optional[np.ndarray] = None) -> np.ndarray:
    """
    u = kp·e + ki·∫e + kd·ė (+ 前馈)

    积分项逐轴限幅到 ±integral_clamp，结果按模长等比例缩放到 a_max 以内。
    输入可以是单个 3 维向量，也可以是 (N, 3) 批量。

    Args:
        error: 位置误差
        error_integral: 误差积分
        error_derivative: 误差导数（参考速度 − 实际速度）
        gains: PID 增益
        a_max: 加速度上限
        feedforward: 参考加速度前馈

    Returns:
        控制加速度，形状与 error 相同
    """
    integral = np.clip(error_integral, -gains.integral_clamp, gains.integral_clamp)
    u = gains.kp * np.asarray(error, dtype=float) + gains.ki * integral + gains.kd * np.asarray(error_derivative)
    if feedforward is not None:
        u = u + feedforward
    norms = np.linalg.norm(u, axis=-1, keepdims=True)
    scale = np.where(norms > a_max, a_max / np.maximum(norms, 1e-300), 1.0)
    return u * scale


@dataclass(frozen=True)
class SimResult:
    """仿真结果，各历史数组长度等于轨迹采样数"""

    t: np.ndarray
    positions: np.ndarray
    velocities: np.ndarray
    controls: np.ndarray
    errors: np.ndarray

    @property
    def error_norms(self) -> np.ndarray:
        return np.linalg.norm(self.errors, axis=2)

    @property
    def max_error(self) -> float:
        return float(np.max(self.error_norms))

    @property
    def mean_error(self) -> float:
        return float(np.mean(self.error_norms))

    @property
    def max_speed(self) -> float:
        return float(np.max(np.linalg.norm(self.velocities, axis=2)))

    @property
    def max_control(self) -> float:
        return float(np.max(np.linalg.norm(self.controls, axis=2)))

    def side_lengths(self) -> np.ndarray:
        """前 4 架（领航者）每步的循环边长，形状 (M, 4)"""
        leaders = self.positions[:, :4]
        return np.linalg.norm(np.roll(leaders, -1, axis=1) - leaders, axis=2)

    def metrics(self) -> Dict[str, float]:
        return {
            "max_tracking_error_m": self.max_error,
            "mean_tracking_error_m": self.mean_error,
            "sim_max_speed_mps": self.max_speed,
            "max_control_mps2": self.max_control,
        }


def run_tracking(traj: Trajectory, gains: PidGains, limits: KinematicLimits,
                 feedforward: bool = True, divergence_threshold: float = None) -> SimResult:
    """
    对轨迹做闭环跟踪仿真

    各无人机从参考初始位置静止出发，仿真步长等于轨迹采样间隔。

    Args:
        traj: 参考轨迹
        gains: PID 增益
        limits: 运动学限制（a_max 用于控制限幅）
        feedforward: 是否加入参考加速度前馈
        divergence_threshold: 发散判定阈值（m），默认取配置

    Returns:
        SimResult

    Raises:
        Divergence: 任一时刻位置误差超过阈值
    """
    if divergence_threshold is None:
        divergence_threshold = config.get_sim_config()["divergence_threshold"]

    n_samples = len(traj)
    steps = np.diff(traj.t)
    positions = np.empty_like(traj.positions)
    velocities = np.empty_like(traj.velocities)
    controls = np.empty_like(traj.positions)
    errors = np.empty_like(traj.positions)

    pos = traj.positions[0].copy()
    vel = np.zeros_like(pos)
    integral = np.zeros_like(pos)

    for n in range(n_samples):
        positions[n] = pos
        velocities[n] = vel
        error = traj.positions[n] - pos
        errors[n] = error
        worst = float(np.max(np.linalg.norm(error, axis=1)))
        if worst > divergence_threshold:
            raise Divergence(f"t={traj.t[n]:.2f} s 时跟踪误差 {worst:.3f} m 超过阈值 {divergence_threshold} m")

        dt = steps[n] if n < n_samples - 1 else steps[-1]
        integral = np.clip(integral + error * dt, -gains.integral_clamp, gains.integral_clamp)
        u = pid_control(error, integral, traj.velocities[n] - vel, gains, limits.a_max,
                        feedforward=traj.accelerations[n] if feedforward else None)
        controls[n] = u
        if n < n_samples - 1:
            pos, vel = propagate(pos, vel, u, dt)

    result = SimResult(t=traj.t.copy(), positions=positions, velocities=velocities,
                       controls=controls, errors=errors)
    logger.info("跟踪仿真完成: 最大误差 %.3f m, 平均误差 %.3f m, 最大速度 %.2f m/s",
                result.max_error, result.mean_error, result.max_speed)
    return result
