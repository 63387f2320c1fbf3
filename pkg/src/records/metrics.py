"""
指标文件 metrics.json
"""

import json
import logging
import numbers
import os
from typing import Any, Dict

from src.errors import ReportError
from .base import RecordStore, atomic_write

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.json"
REQUIRED_METHOD_KEYS = ("combined_length_m", "iterations", "converged")


def _is_number(value: Any) -> bool:
    return isinstance(value, numbers.Real) and not isinstance(value, bool)


def validate_metrics(data: Any, source: str) -> Dict[str, Any]:
    """
    校验指标文件结构

    Args:
        data: 解析后的 JSON
        source: 文件名，用于错误信息

    Returns:
        原样返回 data

    Raises:
        ReportError: 结构不符合要求
    """
    if not isinstance(data, dict):
        raise ReportError(f"{source}: 顶层应为对象")
    if not _is_number(data.get("combined_length_m")):
        raise ReportError(f"{source}: combined_length_m 缺失或不是数值")
    per_method = data.get("per_method")
    if not isinstance(per_method, dict) or not per_method:
        raise ReportError(f"{source}: per_method 缺失或为空")
    for method, entry in per_method.items():
        if not isinstance(entry, dict):
            raise ReportError(f"{source}: per_method.{method} 应为对象")
        for key in REQUIRED_METHOD_KEYS:
            if key not in entry:
                raise ReportError(f"{source}: per_method.{method}.{key} 缺失")
        if not _is_number(entry["combined_length_m"]):
            raise ReportError(f"{source}: per_method.{method}.combined_length_m 不是数值")
    return data


class MetricsStore(RecordStore):
    """
    单个 metrics.json，键为顶层字段
    """

    def __init__(self, path: str):
        """
        Args:
            path: metrics.json 路径（传入目录时自动补全文件名）
        """
        if os.path.isdir(path):
            path = os.path.join(path, METRICS_FILE)
        self.path = path
        self.metrics: Dict[str, Any] = {}

    def save(self, key: str, value: Any) -> None:
        self.metrics[key] = value
        self.flush()

    def load(self, key: str) -> Any:
        if not self.metrics:
            self.metrics = self.read()
        return self.metrics.get(key)

    def clear(self) -> None:
        self.metrics = {}
        if os.path.exists(self.path):
            os.remove(self.path)

    def get_size(self) -> int:
        return len(self.metrics)

    def write(self, metrics: Dict[str, Any]) -> None:
        """整体替换并写盘"""
        self.metrics = dict(metrics)
        self.flush()

    def flush(self) -> None:
        atomic_write(self.path, lambda f: json.dump(self.metrics, f, ensure_ascii=False, indent=2))
        logger.debug("已写入 %s", self.path)

    def read(self) -> Dict[str, Any]:
        """
        读取 JSON

        Raises:
            ReportError: 文件不存在或不是合法 JSON
        """
        if not os.path.exists(self.path):
            raise ReportError(f"{self.path}: 文件不存在")
        try:
            with open(self.path, "r", encoding="utf-8") as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise ReportError(f"{self.path}: JSON 格式错误 ({e})") from e

    def read_validated(self) -> Dict[str, Any]:
        return validate_metrics(self.read(), self.path)
