"""
场景文件
YAML 场景的解析与校验，字段错误带字段路径，语法错误带行号
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import yaml

from src.config import config
from src.errors import ScenarioError
from src.formation.quad import LeaderQuad
from src.planners.fg import FgConfig, ScaleSchedule
from src.planners.ls import LsConfig
from src.sim.tracking import PidGains
from src.targets.model import TargetModel, coc_reduce, sample_cluster, single_target
from src.trajectory.topp import KinematicLimits

logger = logging.getLogger(__name__)

PLANNERS = ("ls", "fg", "both")
TOP_LEVEL_KEYS = {
    "name", "start_quad", "target", "planner", "ls", "fg", "limits", "pid",
    "trajectory", "simulate", "output_dir", "emit_followers", "record_wall_time",
}
LS_KEYS = {"alpha", "beta", "betas", "phi_gain", "phi_floor", "max_iters", "step_cap", "stop_radius",
           "normalize_flux"}
FG_KEYS = {"side_length", "max_outer_iters", "step_cap", "constraint_tol", "optimality_tol",
           "stop_radius", "scale_schedule", "hessian", "target_mode", "coc_tolerance"}


@dataclass(frozen=True)
class TargetSpec:
    """三选一的目标描述"""

    position: Optional[np.ndarray] = None
    members: Optional[np.ndarray] = None
    mean: Optional[np.ndarray] = None
    sigma: float = 0.0
    count: int = 0
    seed: Optional[int] = None

    @property
    def kind(self) -> str:
        if self.position is not None:
            return "position"
        if self.members is not None:
            return "members"
        return "distribution"

    def build(self) -> TargetModel:
        """生成目标模型；分布目标按种子采样后做 COC 约化"""
        if self.position is not None:
            return single_target(self.position)
        if self.members is not None:
            return coc_reduce(self.members)
        return coc_reduce(sample_cluster(self.mean, self.sigma, self.count, self.seed))


@dataclass
class Scenario:
    """一次实验的全部输入"""

    name: str
    start_quad: LeaderQuad
    target: TargetSpec
    planner: str = "fg"
    ls: Dict[str, Any] = field(default_factory=dict)
    betas: List[float] = field(default_factory=lambda: [0.0])
    fg: FgConfig = field(default_factory=FgConfig.from_config)
    limits: KinematicLimits = field(default_factory=KinematicLimits.from_config)
    pid: PidGains = field(default_factory=PidGains.from_config)
    dt: float = 0.02
    min_spacing: float = 0.25
    grid_step: float = 0.05
    simulate: bool = True
    output_dir: str = "./output"
    emit_followers: bool = False
    record_wall_time: bool = False

    @property
    def seed(self) -> Optional[int]:
        return self.target.seed

    def ls_configs(self) -> List[LsConfig]:
        """每个 β 一份 LS 配置"""
        return [LsConfig.from_config(**self.ls, beta=beta) for beta in self.betas]

    def uses_ls(self) -> bool:
        return self.planner in ("ls", "both")

    def uses_fg(self) -> bool:
        return self.planner in ("fg", "both")


def _require(mapping: Dict[str, Any], key: str, path: str) -> Any:
    if key not in mapping or mapping[key] is None:
        raise ScenarioError("缺少必填字段", field=f"{path}{key}")
    return mapping[key]


def _check_keys(mapping: Any, allowed: set, path: str) -> Dict[str, Any]:
    if mapping is None:
        return {}
    if not isinstance(mapping, dict):
        raise ScenarioError("应为键值映射", field=path.rstrip(".") or "<root>")
    unknown = sorted(set(mapping) - allowed)
    if unknown:
        raise ScenarioError(f"未知字段 {unknown}", field=path.rstrip(".") or "<root>")
    return mapping


def _vector(value: Any, field_name: str) -> np.ndarray:
    try:
        array = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as e:
        raise ScenarioError(f"应为三维坐标: {e}", field=field_name) from e
    if array.shape != (3,) or not np.all(np.isfinite(array)):
        raise ScenarioError(f"应为三维有限坐标，实际为 {value!r}", field=field_name)
    return array


def _points(value: Any, field_name: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ScenarioError("应为非空坐标列表", field=field_name)
    return np.stack([_vector(v, f"{field_name}[{i}]") for i, v in enumerate(value)])


def _number(mapping: Dict[str, Any], key: str, path: str, default: float = None) -> float:
    value = mapping.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"应为数值，实际为 {value!r}", field=f"{path}{key}")
    return float(value)


def _flag(mapping: Dict[str, Any], key: str, default: bool) -> bool:
    value = mapping.get(key, default)
    if not isinstance(value, bool):
        raise ScenarioError(f"应为 true/false，实际为 {value!r}", field=key)
    return value


def _build(section: str, factory, **kwargs):
    """构造配置对象，把校验失败转为带字段的 ScenarioError"""
    try:
        return factory(**kwargs)
    except (TypeError, ValueError) as e:
        raise ScenarioError(str(e), field=section) from e


def _parse_target(raw: Any) -> TargetSpec:
    raw = _check_keys(raw, {"position", "members", "distribution"}, "target.")
    present = [k for k in ("position", "members", "distribution") if raw.get(k) is not None]
    if len(present) != 1:
        raise ScenarioError(f"position / members / distribution 必须且只能给出一个，实际为 {present}",
                            field="target")
    kind = present[0]
    if kind == "position":
        return TargetSpec(position=_vector(raw["position"], "target.position"))
    if kind == "members":
        return TargetSpec(members=_points(raw["members"], "target.members"))

    dist = _check_keys(raw["distribution"], {"mean", "sigma", "count", "seed"}, "target.distribution.")
    seed = _require(dist, "seed", "target.distribution.")
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"应为整数，实际为 {seed!r}", field="target.distribution.seed")
    count = _require(dist, "count", "target.distribution.")
    if isinstance(count, bool) or not isinstance(count, int) or count <= 0:
        raise ScenarioError(f"应为正整数，实际为 {count!r}", field="target.distribution.count")
    mean = _require(dist, "mean", "target.distribution.")
    if isinstance(mean, (int, float)) and not isinstance(mean, bool):
        mean = [mean] * 3
    sigma = _number(dist, "sigma", "target.distribution.")
    if sigma < 0:
        raise ScenarioError("标准差不能为负", field="target.distribution.sigma")
    return TargetSpec(mean=_vector(mean, "target.distribution.mean"), sigma=sigma, count=count, seed=seed)


def _parse_ls(raw: Any) -> Tuple[Dict[str, Any], List[float]]:
    raw = dict(_check_keys(raw, LS_KEYS, "ls."))
    if "beta" in raw and "betas" in raw:
        raise ScenarioError("beta 与 betas 不能同时给出", field="ls")
    betas = raw.pop("betas", None)
    if betas is None:
        betas = [raw.pop("beta", config.get_ls_config()["beta"])]
    if not isinstance(betas, list) or not betas:
        raise ScenarioError("应为非空数值列表", field="ls.betas")
    betas = [_number({"beta": b}, "beta", "ls.betas.") for b in betas]
    overrides = {}
    for key, value in raw.items():
        if key == "stop_radius" and value is None:
            continue
        if key == "normalize_flux":
            if not isinstance(value, bool):
                raise ScenarioError(f"应为布尔值，实际为 {value!r}", field="ls.normalize_flux")
            overrides[key] = value
            continue
        overrides[key] = int(_number(raw, key, "ls.")) if key == "max_iters" else _number(raw, key, "ls.")
    for beta in betas:
        _build("ls", LsConfig.from_config, **overrides, beta=beta)
    return overrides, betas


def _parse_fg(raw: Any) -> FgConfig:
    raw = _check_keys(raw, FG_KEYS, "fg.")
    kwargs: Dict[str, Any] = {}
    for key, value in raw.items():
        if key in ("hessian", "target_mode"):
            if not isinstance(value, str):
                raise ScenarioError(f"应为字符串，实际为 {value!r}", field=f"fg.{key}")
            kwargs[key] = value
        elif key == "scale_schedule":
            schedule = _check_keys(value, {"l_start", "l_end", "n_iters"}, "fg.scale_schedule.")
            kwargs[key] = _build("fg.scale_schedule", ScaleSchedule,
                                 l_start=_number(schedule, "l_start", "fg.scale_schedule."),
                                 l_end=_number(schedule, "l_end", "fg.scale_schedule."),
                                 n_iters=int(_number(schedule, "n_iters", "fg.scale_schedule.")))
        elif key == "stop_radius" and value is None:
            continue
        elif key == "max_outer_iters":
            kwargs[key] = int(_number(raw, key, "fg."))
        else:
            kwargs[key] = _number(raw, key, "fg.")
    return _build("fg", FgConfig.from_config, **kwargs)


def parse_scenario(data: Any, default_name: str = "scenario") -> Scenario:
    """
    由已解析的 YAML 数据构建场景

    Args:
        data: yaml.safe_load 的结果
        default_name: 未给出 name 时使用的名称

    Returns:
        Scenario

    Raises:
        ScenarioError: 字段缺失、类型错误或取值非法
    """
    data = _check_keys(data, TOP_LEVEL_KEYS, "")
    if not data:
        raise ScenarioError("场景文件为空")

    start = _points(_require(data, "start_quad", ""), "start_quad")
    if len(start) != 4:
        raise ScenarioError(f"需要 4 个领航者坐标，实际为 {len(start)} 个", field="start_quad")
    start_quad = _build("start_quad", LeaderQuad, points=start)

    planner = data.get("planner", "fg")
    if planner not in PLANNERS:
        raise ScenarioError(f"应为 {PLANNERS} 之一，实际为 {planner!r}", field="planner")

    ls_overrides, betas = _parse_ls(data.get("ls"))

    limits_raw = _check_keys(data.get("limits"), {"v_max", "a_max"}, "limits.")
    defaults = config.get_trajectory_config()
    limits = _build("limits", KinematicLimits,
                    v_max=_number(limits_raw, "v_max", "limits.", defaults["v_max"]),
                    a_max=_number(limits_raw, "a_max", "limits.", defaults["a_max"]))

    pid_raw = _check_keys(data.get("pid"), {"kp", "ki", "kd", "integral_clamp"}, "pid.")
    sim_defaults = config.get_sim_config()
    pid = _build("pid", PidGains, **{k: _number(pid_raw, k, "pid.", sim_defaults[k])
                                     for k in ("kp", "ki", "kd", "integral_clamp")})

    traj_raw = _check_keys(data.get("trajectory"), {"dt", "min_spacing", "grid_step"}, "trajectory.")
    dt = _number(traj_raw, "dt", "trajectory.", defaults["dt"])
    min_spacing = _number(traj_raw, "min_spacing", "trajectory.", defaults["min_spacing"])
    grid_step = _number(traj_raw, "grid_step", "trajectory.", defaults["grid_step"])
    for key, value in (("dt", dt), ("min_spacing", min_spacing), ("grid_step", grid_step)):
        if value <= 0:
            raise ScenarioError(f"必须为正，实际为 {value}", field=f"trajectory.{key}")

    name = data.get("name", default_name)
    output_dir = data.get("output_dir") or f"{config.get_output_config()['output_dir']}/{name}"

    return Scenario(
        name=str(name),
        start_quad=start_quad,
        target=_parse_target(_require(data, "target", "")),
        planner=planner,
        ls=ls_overrides,
        betas=betas,
        fg=_parse_fg(data.get("fg")),
        limits=limits,
        pid=pid,
        dt=dt,
        min_spacing=min_spacing,
        grid_step=grid_step,
        simulate=_flag(data, "simulate", True),
        output_dir=str(output_dir),
        emit_followers=_flag(data, "emit_followers", False),
        record_wall_time=_flag(data, "record_wall_time", False),
    )


def load_scenario(path: str) -> Scenario:
    """
    读取 YAML 场景文件

    Args:
        path: 文件路径

    Returns:
        Scenario

    Raises:
        ScenarioError: 文件无法读取、YAML 语法错误（带行号）或字段非法
    """
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ScenarioError(f"无法读取场景文件 {path}: {e}") from e
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"YAML 语法错误: {getattr(e, 'problem', e)}", line=line) from e

    stem = Path(path).stem
    scenario = parse_scenario(data, default_name=stem)
    logger.info("已加载场景 %s: 规划器 %s, 目标类型 %s", scenario.name, scenario.planner, scenario.target.kind)
    return scenario
