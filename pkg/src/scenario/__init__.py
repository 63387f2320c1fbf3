"""
场景包
"""

from .scenario import Scenario, TargetSpec, load_scenario, parse_scenario
from .runner import (
    EXIT_ERROR,
    EXIT_NOT_CONVERGED,
    EXIT_OK,
    ScenarioRunner,
    plan_scenario,
    run_scenario,
    simulate_scenario,
)
from .report import ComparisonTable, compare_report

__all__ = [
    "Scenario",
    "TargetSpec",
    "load_scenario",
    "parse_scenario",
    "EXIT_ERROR",
    "EXIT_NOT_CONVERGED",
    "EXIT_OK",
    "ScenarioRunner",
    "plan_scenario",
    "run_scenario",
    "simulate_scenario",
    "ComparisonTable",
    "compare_report",
]
