"""
配置管理包
"""

from .config import Config, config

__all__ = ["Config", "config"]