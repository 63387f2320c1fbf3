"""
双积分器质点模型
x(n+1) = x(n) + v(n)Δt + ½u(n)Δt²，v(n+1) = v(n) + u(n)Δt
"""

from dataclasses import dataclass

import numpy as np

from src.flux.geometry import Vec3, as_vec3


@dataclass(frozen=True)
class ParticleState:
    """质点状态"""

    pos: Vec3
    vel: Vec3

    def __post_init__(self):
        object.__setattr__(self, "pos", as_vec3(self.pos))
        object.__setattr__(self, "vel", as_vec3(self.vel))


def propagate(pos: np.ndarray, vel: np.ndarray, u: np.ndarray, dt: float):
    """对任意批量形状 (..., 3) 的精确离散更新"""
    return pos + vel * dt + 0.5 * u * dt ** 2, vel + u * dt


def step_dynamics(state: ParticleState, u: Vec3, dt: float) -> ParticleState:
    """
    单步推进，分段常值 u 下无离散误差

    Args:
        state: 当前状态
        u: 控制加速度
        dt: 时间步长（s）

    Returns:
        新状态
    """
    if dt <= 0:
        raise ValueError(f"dt 必须为正，实际为 {dt}")
    pos, vel = propagate(state.pos, state.vel, as_vec3(u), dt)
    return ParticleState(pos, vel)
