"""
场景执行
规划、轨迹参数化、跟踪仿真，并写出 CSV 与 metrics.json
"""

import logging
import os
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from src.errors import NotConverged
from src.planners.base import BasePlanner, PlannedPath
from src.planners.fg import FgPlanner
from src.planners.ls import LsPlanner
from src.records.csv_records import CsvRecordStore
from src.records.metrics import MetricsStore
from src.sim.tracking import run_tracking
from src.targets.model import TargetModel
from src.trajectory.filtering import filter_path, with_followers
from src.trajectory.topp import parameterize
from .scenario import Scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_NOT_CONVERGED = 2


@dataclass
class MethodOutcome:
    """单个规划方法的结果"""

    method: str
    path: Optional[PlannedPath] = None
    converged: bool = False
    metrics: Dict[str, Any] = field(default_factory=dict)


class ScenarioRunner:
    """
    执行一个场景中的全部规划方法
    """

    def __init__(self, scenario: Scenario, output_dir: str = None):
        """
        初始化ScenarioRunner

        Args:
            scenario: 场景
            output_dir: 输出目录，默认使用场景中的 output_dir
        """
        self.scenario = scenario
        self.output_dir = output_dir or scenario.output_dir
        self.target: TargetModel = scenario.target.build()
        self.metrics = MetricsStore(os.path.join(self.output_dir, "metrics.json"))
        self.planners = self._build_planners()
        self.methods = [planner.method for planner in self.planners]

    def _build_planners(self) -> List[BasePlanner]:
        """按固定顺序构建规划器：各 β 的 LS 在前，FG 在后"""
        planners: List[BasePlanner] = []
        if self.scenario.uses_ls():
            planners.extend(LsPlanner(self.target, cfg) for cfg in self.scenario.ls_configs())
        if self.scenario.uses_fg():
            planners.append(FgPlanner(self.target, self.scenario.fg))
        return planners

    def store_for(self, method: str) -> CsvRecordStore:
        """多方法时每个方法一个子目录"""
        if len(self.methods) > 1:
            return CsvRecordStore(os.path.join(self.output_dir, method))
        return CsvRecordStore(self.output_dir)

    def plan(self) -> List[MethodOutcome]:
        """
        运行全部规划器并写出 path.csv（及 followers.csv）

        未收敛的方法写出部分路径，converged 标记为 False。
        """
        outcomes = []
        for planner in self.planners:
            outcome = MethodOutcome(method=planner.method)
            started = time.perf_counter()
            try:
                path = planner.plan(self.scenario.start_quad)
                outcome.converged = True
            except NotConverged as e:
                logger.warning("%s 未收敛: %s", planner.method, e)
                path = e.path
            outcome.path = path
            outcome.metrics = self._path_metrics(path, outcome.converged)
            if self.scenario.record_wall_time:
                outcome.metrics["wall_time_s"] = time.perf_counter() - started

            store = self.store_for(planner.method)
            store.write_path(path)
            if self.scenario.emit_followers:
                store.write_followers(with_followers(path))
            outcomes.append(outcome)
        return outcomes

    def load_paths(self) -> List[MethodOutcome]:
        """从已有的 path.csv 读取路径（simulate 子命令）"""
        previous = self.metrics.read_validated()["per_method"] if os.path.exists(self.metrics.path) else {}
        outcomes = []
        for method in self.methods:
            path = self.store_for(method).read_path(method=method)
            entry = dict(previous.get(method, {}))
            converged = bool(entry.get("converged", True))
            entry.update(self._path_metrics(path, converged))
            outcomes.append(MethodOutcome(method=method, path=path, converged=converged, metrics=entry))
        return outcomes

    def simulate(self, outcomes: List[MethodOutcome]) -> None:
        """对已收敛的路径做过滤、参数化与跟踪仿真"""
        scenario = self.scenario
        for outcome in outcomes:
            if not outcome.converged:
                logger.warning("%s 未收敛，跳过轨迹与仿真", outcome.method)
                continue
            path = filter_path(outcome.path, scenario.min_spacing)
            if scenario.emit_followers:
                path = with_followers(path)
            trajectory = parameterize(path, scenario.limits, scenario.dt, scenario.grid_step)
            sim = run_tracking(trajectory, scenario.pid, scenario.limits)

            store = self.store_for(outcome.method)
            store.write_trajectory(trajectory)
            store.write_sim(sim)

            side_lengths = sim.side_lengths()
            outcome.metrics.update({
                "duration_s": trajectory.duration,
                "max_speed_mps": trajectory.max_speed(),
                "max_accel_mps2": trajectory.max_accel(),
                "sim_side_length_range_m": [float(side_lengths.min()), float(side_lengths.max())],
                **sim.metrics(),
            })

    def write_metrics(self, outcomes: List[MethodOutcome]) -> Dict[str, Any]:
        """
        汇总并写出 metrics.json

        顶层数值取主方法（有 FG 时为 FG，否则为第一个方法）。
        """
        per_method = {outcome.method: outcome.metrics for outcome in outcomes}
        primary = "fg" if "fg" in per_method else outcomes[0].method
        summary = per_method[primary]
        metrics = {
            "scenario": self.scenario.name,
            "target": [float(v) for v in self.target.center],
            "seed": self.scenario.seed,
            "primary_method": primary,
            "combined_length_m": summary["combined_length_m"],
            "max_speed_mps": summary.get("max_speed_mps"),
            "max_accel_mps2": summary.get("max_accel_mps2"),
            "max_tracking_error_m": summary.get("max_tracking_error_m"),
            "iterations": summary["iterations"],
            "converged": all(outcome.converged for outcome in outcomes),
            "per_method": per_method,
        }
        if self.scenario.record_wall_time:
            metrics["wall_time_s"] = sum(m.get("wall_time_s", 0.0) for m in per_method.values())
        self.metrics.write(metrics)
        return metrics

    @staticmethod
    def _path_metrics(path: PlannedPath, converged: bool) -> Dict[str, Any]:
        final = path.positions[-1, :4]
        sides = np.linalg.norm(np.roll(final, -1, axis=0) - final, axis=1)
        return {
            "combined_length_m": path.combined_length,
            "iterations": int(path.iterations[-1]),
            "snapshots": len(path),
            "converged": converged,
            "final_side_lengths_m": [float(s) for s in sides],
        }


def _status(outcomes: List[MethodOutcome]) -> int:
    return EXIT_OK if all(outcome.converged for outcome in outcomes) else EXIT_NOT_CONVERGED


def plan_scenario(scenario: Scenario, output_dir: str = None) -> int:
    """只规划：写出 path.csv 与 metrics.json"""
    runner = ScenarioRunner(scenario, output_dir)
    outcomes = runner.plan()
    runner.write_metrics(outcomes)
    return _status(outcomes)


def simulate_scenario(scenario: Scenario, output_dir: str = None) -> int:
    """读取已有 path.csv，参数化并仿真"""
    runner = ScenarioRunner(scenario, output_dir)
    outcomes = runner.load_paths()
    runner.simulate(outcomes)
    runner.write_metrics(outcomes)
    return _status(outcomes)


def run_scenario(scenario: Scenario, output_dir: str = None) -> int:
    """
    端到端执行场景

    Args:
        scenario: 场景
        output_dir: 输出目录（覆盖场景中的设置）

    Returns:
        退出码：0 成功，2 有规划器未收敛（部分结果已写出）

    Raises:
        FluxFormationError: 其它模块错误，由命令行转换为退出码 1
    """
    runner = ScenarioRunner(scenario, output_dir)
    outcomes = runner.plan()
    try:
        if scenario.simulate:
            runner.simulate(outcomes)
    finally:
        runner.write_metrics(outcomes)
    return _status(outcomes)
