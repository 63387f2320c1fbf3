"""
目标建模包
"""

from .model import CLUSTER, SINGLE, TargetModel, coc_reduce, exact_multi_flux, sample_cluster, single_target

__all__ = [
    "CLUSTER",
    "SINGLE",
    "TargetModel",
    "coc_reduce",
    "exact_multi_flux",
    "sample_cluster",
    "single_target",
]
