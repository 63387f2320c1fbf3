"""
等式约束 SQP
四条边长平方约束下的单步序列二次规划：KKT 求解、ℓ1 价值函数线搜索、可行性恢复
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg

from src.errors import ChargeOnSurface, DegenerateQuad, KktSingular, LineSearchFailed
from .base import clamp_step, per_uav_norms

logger = logging.getLogger(__name__)

N_VARS = 12
N_CONSTRAINTS = 4
HESSIAN_MODELS = ("identity", "bfgs")

Objective = Callable[[np.ndarray], float]
Gradient = Callable[[np.ndarray], np.ndarray]


@dataclass
class SqpOptions:
    """单步 SQP 参数"""

    step_cap: float = 0.5
    constraint_tol: float = 1e-6  # 相对 l² 的约束容差
    optimality_tol: float = 1e-6
    hessian: str = "identity"
    max_damping_retries: int = 5
    armijo: float = 1e-4
    min_alpha: float = 1e-10
    max_restoration_iters: int = 50

    def __post_init__(self):
        if self.hessian not in HESSIAN_MODELS:
            raise ValueError(f"未知 Hessian 模型: {self.hessian}，可选 {HESSIAN_MODELS}")
        if self.step_cap <= 0 or self.constraint_tol <= 0 or self.optimality_tol <= 0:
            raise ValueError("step_cap 与各容差必须为正")


@dataclass
class SqpState:
    """SQP 迭代状态"""

    x: np.ndarray
    lagrange_multipliers: np.ndarray = field(default_factory=lambda: np.zeros(N_CONSTRAINTS))
    merit: float = float("nan")
    penalty: float = 0.0
    hessian: Optional[np.ndarray] = field(default=None, repr=False)
    step_norm: float = float("inf")
    violation: float = float("nan")
    gradient: Optional[np.ndarray] = field(default=None, repr=False)
    last_step: Optional[np.ndarray] = field(default=None, repr=False)
    last_projected: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(N_VARS)
        if not np.all(np.isfinite(self.x)):
            raise ValueError("SQP 状态包含非有限坐标")
        self.lagrange_multipliers = np.asarray(self.lagrange_multipliers, dtype=float).reshape(N_CONSTRAINTS)


def side_constraints(x: np.ndarray, side_length: float) -> np.ndarray:
    """c_i = ‖p_{i+1} − p_i‖² − l²，按循环边顺序"""
    points = np.asarray(x, dtype=float).reshape(4, 3)
    edges = np.roll(points, -1, axis=0) - points
    return np.sum(edges * edges, axis=1) - side_length ** 2


def side_constraints_jacobian(x: np.ndarray) -> np.ndarray:
    """
    约束雅可比（解析）

    ∂c_i/∂p_i = 2(p_i − p_{i+1})，∂c_i/∂p_{i+1} = −2(p_i − p_{i+1})，与 l 无关。

    Returns:
        形状 (4, 12)
    """
    points = np.asarray(x, dtype=float).reshape(4, 3)
    jacobian = np.zeros((N_CONSTRAINTS, N_VARS))
    for i in range(4):
        j = (i + 1) % 4
        diff = points[i] - points[j]
        jacobian[i, 3 * i:3 * i + 3] = 2.0 * diff
        jacobian[i, 3 * j:3 * j + 3] = -2.0 * diff
    return jacobian


def _min_norm_correction(x: np.ndarray, side_length: float) -> np.ndarray:
    """Gauss-Newton 最小范数修正 −A⁺c"""
    c = side_constraints(x, side_length)
    jacobian = side_constraints_jacobian(x)
    correction, *_ = scipy.linalg.lstsq(jacobian, -c)
    return correction


def restore_feasibility(x: np.ndarray, side_length: float, tol: float, max_iters: int = 50) -> np.ndarray:
    """
    投影回约束流形，直到 max|c| ≤ tol

    Args:
        x: 12 维坐标
        side_length: 目标边长
        tol: 绝对约束容差（m²）
        max_iters: 最大 Gauss-Newton 次数

    Returns:
        可行坐标

    Raises:
        LineSearchFailed: 迭代后仍不可行
    """
    x = np.asarray(x, dtype=float).copy()
    for _ in range(max_iters):
        if np.max(np.abs(side_constraints(x, side_length))) <= tol:
            return x
        x = x + _min_norm_correction(x, side_length)
    violation = float(np.max(np.abs(side_constraints(x, side_length))))
    if violation <= tol:
        return x
    raise LineSearchFailed(f"可行性恢复失败: 约束违反 {violation:.3e} > {tol:.3e}")


def projected_gradient(gradient: np.ndarray, jacobian: np.ndarray) -> np.ndarray:
    """梯度在约束切空间上的投影 g − Aᵀ(AAᵀ)⁻¹Ag"""
    multipliers, *_ = scipy.linalg.lstsq(jacobian.T, gradient)
    return gradient - jacobian.T @ multipliers


def _kkt_inertia_ok(kkt: np.ndarray) -> bool:
    """KKT 矩阵惯性须为 (12 正, 4 负, 0 零)"""
    _, block_diagonal, _ = scipy.linalg.ldl(kkt)
    eigenvalues = np.linalg.eigvalsh(block_diagonal)
    scale = max(float(np.max(np.abs(eigenvalues))), 1e-300)
    positive = int(np.sum(eigenvalues > 1e-12 * scale))
    negative = int(np.sum(eigenvalues < -1e-12 * scale))
    return positive == N_VARS and negative == N_CONSTRAINTS


def solve_kkt(hessian: np.ndarray, gradient: np.ndarray, jacobian: np.ndarray,
              c: np.ndarray, max_retries: int = 5) -> Tuple[np.ndarray, np.ndarray]:
    """
    求解 [[H+δI, Aᵀ], [A, 0]] [d; λ] = [−g; −c]

    首次 δ=0；失败或惯性错误时 Levenberg 阻尼逐次放大 10 倍。

    Args:
        hessian: Hessian 近似 (12, 12)
        gradient: 目标梯度
        jacobian: 约束雅可比 (4, 12)
        c: 约束值
        max_retries: 阻尼重试次数

    Returns:
        (步长 d, 拉格朗日乘子 λ)

    Raises:
        KktSingular: 重试后仍无法求解
    """
    rhs = np.concatenate([-gradient, -c])
    base = max(float(np.mean(np.abs(np.diag(hessian)))), 1e-12)
    damping = 0.0
    for attempt in range(max_retries + 1):
        kkt = np.zeros((N_VARS + N_CONSTRAINTS, N_VARS + N_CONSTRAINTS))
        kkt[:N_VARS, :N_VARS] = hessian + damping * np.eye(N_VARS)
        kkt[:N_VARS, N_VARS:] = jacobian.T
        kkt[N_VARS:, :N_VARS] = jacobian
        try:
            if _kkt_inertia_ok(kkt):
                solution = scipy.linalg.solve(kkt, rhs, assume_a="sym")
                if np.all(np.isfinite(solution)):
                    return solution[:N_VARS], solution[N_VARS:]
        except (np.linalg.LinAlgError, scipy.linalg.LinAlgError, ValueError) as e:
            logger.debug("KKT 分解失败: %s", e)
        damping = 1e-4 * base if damping == 0.0 else damping * 10.0
        if attempt < max_retries:
            logger.warning("KKT 系统奇异或惯性错误，第 %d 次阻尼重试 δ=%.3e", attempt + 1, damping)
    raise KktSingular(f"KKT 系统在 {max_retries} 次阻尼重试后仍然奇异")


def _damped_bfgs_update(hessian: np.ndarray, s: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Powell 阻尼 BFGS 更新，保持正定"""
    hs = hessian @ s
    shs = float(s @ hs)
    if shs <= 1e-300:
        return hessian
    sy = float(s @ y)
    if sy < 0.2 * shs:
        theta = 0.8 * shs / (shs - sy)
        y = theta * y + (1.0 - theta) * hs
        sy = float(s @ y)
    return hessian - np.outer(hs, hs) / shs + np.outer(y, y) / sy


def secant_curvature(state: SqpState, projected: np.ndarray) -> float:
    """
    沿上一步的切向曲率 sᵀ(P_k − P_{k−1}) / sᵀs

    P 为投影梯度。没有上一步或曲率非正时返回 0。
    """
    if state.last_step is None or state.last_projected is None:
        return 0.0
    s = state.last_step
    ss = float(s @ s)
    if ss <= 0.0:
        return 0.0
    return max(float(s @ (projected - state.last_projected)) / ss, 0.0)


def _scaled_identity(projected: np.ndarray, gradient: np.ndarray, normal_step: float,
                     step_cap: float, curvature: float = 0.0) -> np.ndarray:
    """
    σI 形式的 Hessian

    H = σI 时 KKT 解为 d = −A⁺c − Pg/σ；σ 取使切向分量加法向分量不超过 step_cap，
    且不低于上一步观测到的切向曲率。
    """
    budget = max(step_cap - normal_step, 0.1 * step_cap)
    sigma = float(np.max(per_uav_norms(projected))) / budget
    sigma = max(sigma, curvature, 1e-6 * float(np.linalg.norm(gradient)) / step_cap, 1e-12)
    return sigma * np.eye(N_VARS)


def sqp_step(state: SqpState, objective: Objective, gradient: Gradient,
             side_length: float, options: SqpOptions) -> SqpState:
    """
    单次 SQP 外迭代

    Args:
        state: 当前状态（x 允许不可行）
        objective: 目标函数 f(x)
        gradient: 梯度 ∇f(x)
        side_length: 当前边长 l
        options: SQP 参数

    Returns:
        新状态；驻点时 step_norm 为 0 且 x 不变

    Raises:
        KktSingular: KKT 系统无法求解
        LineSearchFailed: 步长缩小到 min_alpha 仍不满足 Armijo 条件
    """
    tol = options.constraint_tol * side_length ** 2
    x = state.x
    g = state.gradient if state.gradient is not None else gradient(x)
    c = side_constraints(x, side_length)
    jacobian = side_constraints_jacobian(x)
    projected = projected_gradient(g, jacobian)
    violation = float(np.max(np.abs(c)))

    if (np.max(per_uav_norms(projected)) <= options.optimality_tol * np.linalg.norm(g)
            and violation <= tol):
        return replace(state, gradient=g, step_norm=0.0, violation=violation)

    if options.hessian == "bfgs" and state.hessian is not None:
        hessian = state.hessian
    else:
        normal_step = float(np.max(per_uav_norms(_min_norm_correction(x, side_length))))
        hessian = _scaled_identity(projected, g, normal_step, options.step_cap,
                                   secant_curvature(state, projected))

    d, multipliers = solve_kkt(hessian, g, jacobian, c, options.max_damping_retries)
    full_norm = float(np.max(per_uav_norms(d)))
    d = clamp_step(d, options.step_cap)
    fraction = float(np.max(per_uav_norms(d))) / full_norm if full_norm > 0 else 1.0

    penalty = max(state.penalty, 2.0 * float(np.max(np.abs(multipliers))))

    def merit(point: np.ndarray) -> float:
        return objective(point) + penalty * float(np.sum(np.abs(side_constraints(point, side_length))))

    current_merit = merit(x)
    slope = float(g @ d) - fraction * penalty * float(np.sum(np.abs(c)))

    if slope >= 0.0:
        accepted = x + d
    else:
        alpha = 1.0
        while True:
            trial = x + alpha * d
            trial = trial + _min_norm_correction(trial, side_length)
            try:
                if merit(trial) <= current_merit + options.armijo * alpha * slope:
                    accepted = trial
                    break
            except (ChargeOnSurface, DegenerateQuad):
                pass
            alpha *= 0.5
            if alpha < options.min_alpha:
                raise LineSearchFailed(f"线搜索失败: 步长缩小到 {alpha:.1e} 仍不满足 Armijo 条件")

    accepted = restore_feasibility(accepted, side_length, tol, options.max_restoration_iters)
    new_gradient = gradient(accepted)

    new_hessian = None
    if options.hessian == "bfgs":
        s = accepted - x
        y = (new_gradient + side_constraints_jacobian(accepted).T @ multipliers) - (g + jacobian.T @ multipliers)
        new_hessian = _damped_bfgs_update(hessian, s, y)

    return SqpState(
        x=accepted,
        lagrange_multipliers=multipliers,
        merit=merit(accepted),
        penalty=penalty,
        hessian=new_hessian,
        step_norm=float(np.max(per_uav_norms(accepted - x))),
        violation=float(np.max(np.abs(side_constraints(accepted, side_length)))),
        gradient=new_gradient,
        last_step=accepted - x,
        last_projected=projected,
    )
