"""
运行产物存储包
"""

from .base import RecordStore, atomic_write, format_float
from .csv_records import CsvRecordStore
from .metrics import METRICS_FILE, MetricsStore, validate_metrics

__all__ = [
    "RecordStore",
    "atomic_write",
    "format_float",
    "CsvRecordStore",
    "METRICS_FILE",
    "MetricsStore",
    "validate_metrics",
]
