"""
配置管理模块
统一加载和管理所有配置
"""

import os
from typing import Dict, Any
from dotenv import load_dotenv

class Config:
    """配置管理类"""

    def __init__(self):
        """初始化配置"""
        # 加载.env文件
        load_dotenv()

        # 最小二乘（LS）规划器配置
        self.ls_config = {
            "alpha": float(self._get_env("FLUXFORM_LS_ALPHA", default="1000")),
            "beta": float(self._get_env("FLUXFORM_LS_BETA", default="0")),
            "phi_gain": float(self._get_env("FLUXFORM_LS_PHI_GAIN", default="0.05")),
            "phi_floor": float(self._get_env("FLUXFORM_LS_PHI_FLOOR", default="1e-4")),
            "max_iters": int(self._get_env("FLUXFORM_LS_MAX_ITERS", default="2000")),
            "step_cap": float(self._get_env("FLUXFORM_STEP_CAP", default="0.5")),
        }

        # 通量引导（FG）规划器配置
        self.fg_config = {
            "side_length": float(self._get_env("FLUXFORM_FG_SIDE_LENGTH", default="5")),
            "max_outer_iters": int(self._get_env("FLUXFORM_FG_MAX_ITERS", default="2000")),
            "step_cap": float(self._get_env("FLUXFORM_STEP_CAP", default="0.5")),
            "constraint_tol": float(self._get_env("FLUXFORM_FG_CONSTRAINT_TOL", default="1e-6")),
            "optimality_tol": float(self._get_env("FLUXFORM_FG_OPTIMALITY_TOL", default="1e-6")),
            "hessian": self._get_env("FLUXFORM_FG_HESSIAN", default="identity"),
        }

        # 轨迹参数化配置
        self.trajectory_config = {
            "v_max": float(self._get_env("FLUXFORM_V_MAX", default="10")),
            "a_max": float(self._get_env("FLUXFORM_A_MAX", default="5")),
            "dt": float(self._get_env("FLUXFORM_DT", default="0.02")),
            "min_spacing": float(self._get_env("FLUXFORM_MIN_SPACING", default="0.25")),
            "grid_step": float(self._get_env("FLUXFORM_TOPP_GRID_STEP", default="0.05")),
        }

        # 仿真配置
        self.sim_config = {
            "kp": float(self._get_env("FLUXFORM_PID_KP", default="8")),
            "ki": float(self._get_env("FLUXFORM_PID_KI", default="0.5")),
            "kd": float(self._get_env("FLUXFORM_PID_KD", default="4")),
            "integral_clamp": float(self._get_env("FLUXFORM_PID_INTEGRAL_CLAMP", default="2")),
            "divergence_threshold": float(self._get_env("FLUXFORM_DIVERGENCE_THRESHOLD", default="10")),
        }

        # 输出配置
        self.output_config = {
            "output_dir": self._get_env("FLUXFORM_OUTPUT_DIR", default="./output"),
        }

        # 日志配置
        self.log_config = {
            "level": self._get_env("FLUXFORM_LOG_LEVEL", default="INFO"),
            "format": "%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        }

    def _get_env(self, key: str, default: str = None, required: bool = False) -> str:
        """
        从环境变量获取值

        Args:
            key: 环境变量名
            default: 默认值
            required: 是否必填

        Returns:
            环境变量值

        Raises:
            ValueError: 当必填项未设置时
        """
        value = os.environ.get(key, default)
        if required and value is None:
            raise ValueError(f"配置项 {key} 未设置！请检查.env文件或环境变量")
        return value

    def get_ls_config(self) -> Dict[str, Any]:
        """获取LS规划器配置"""
        return self.ls_config

    def get_fg_config(self) -> Dict[str, Any]:
        """获取FG规划器配置"""
        return self.fg_config

    def get_trajectory_config(self) -> Dict[str, Any]:
        """获取轨迹参数化配置"""
        return self.trajectory_config

    def get_sim_config(self) -> Dict[str, Any]:
        """获取仿真配置"""
        return self.sim_config

    def get_output_config(self) -> Dict[str, Any]:
        """获取输出配置"""
        return self.output_config

    def get_log_config(self) -> Dict[str, Any]:
        """获取日志配置"""
        return self.log_config

# 创建全局配置实例
config = Config()
