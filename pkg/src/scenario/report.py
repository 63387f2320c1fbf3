"""
路径长度对比报告
行为目标，列为方法，单元格为总路径长度（m）
"""

import csv
import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from src.errors import ReportError
from src.records.base import atomic_write, format_float
from src.records.metrics import MetricsStore

logger = logging.getLogger(__name__)


@dataclass
class ComparisonTable:
    """对比表"""

    methods: List[str]
    rows: List[str]
    cells: Dict[str, Dict[str, float]]

    def value(self, row: str, method: str) -> Optional[float]:
        return self.cells.get(row, {}).get(method)

    def to_text(self) -> str:
        """等宽文本表格"""
        header = ["target"] + self.methods
        body = [
            [row] + [f"{v:.1f}" if v is not None else "-" for v in (self.value(row, m) for m in self.methods)]
            for row in self.rows
        ]
        widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]

        def render(line: List[str]) -> str:
            return "  ".join(cell.rjust(width) for cell, width in zip(line, widths))

        separator = "  ".join("-" * width for width in widths)
        return "\n".join([render(header), separator] + [render(line) for line in body])

    def write_csv(self, path: str) -> None:
        def write(f):
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["target"] + self.methods)
            for row in self.rows:
                writer.writerow([row] + [
                    format_float(v) if v is not None else "" for v in (self.value(row, m) for m in self.methods)
                ])

        atomic_write(path, write)


def _row_label(metrics: Dict) -> str:
    target = metrics.get("target")
    if isinstance(target, list) and len(target) == 3:
        return "(" + ", ".join(f"{v:g}" for v in target) + ")"
    return str(metrics.get("scenario", "?"))


def compare_report(metrics_files: Sequence[str]) -> ComparisonTable:
    """
    汇总多个 metrics.json

    Args:
        metrics_files: 指标文件路径，至少一个

    Returns:
        ComparisonTable；同一目标出现多次时后者覆盖前者

    Raises:
        ReportError: 没有输入文件，或某个文件结构不符（错误信息包含文件名）
    """
    if not metrics_files:
        raise ReportError("至少需要一个 metrics.json")
    methods: List[str] = []
    rows: List[str] = []
    cells: Dict[str, Dict[str, float]] = {}
    for path in metrics_files:
        metrics = MetricsStore(path).read_validated()
        row = _row_label(metrics)
        if row not in rows:
            rows.append(row)
        for method, entry in metrics["per_method"].items():
            if method not in methods:
                methods.append(method)
            cells.setdefault(row, {})[method] = float(entry["combined_length_m"])
    logger.info("对比报告: %d 个目标, %d 个方法", len(rows), len(methods))
    return ComparisonTable(methods=methods, rows=rows, cells=cells)
