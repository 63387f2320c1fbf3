"""
仿真包
"""

from .dynamics import ParticleState, propagate, step_dynamics
from .tracking import PidGains, SimResult, pid_control, run_tracking

__all__ = [
    "ParticleState",
    "propagate",
    "step_dynamics",
    "PidGains",
    "SimResult",
    "pid_control",
    "run_tracking",
]
