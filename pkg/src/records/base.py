"""
记录存储基类
"""

import os
import tempfile
from abc import ABC, abstractmethod
from typing import Any, Callable, TextIO

FLOAT_FORMAT = "%.9g"


class RecordStore(ABC):
    """运行产物存储基类"""

    @abstractmethod
    def save(self, key: str, value: Any) -> None:
        """保存记录"""
        pass

    @abstractmethod
    def load(self, key: str) -> Any:
        """加载记录"""
        pass

    @abstractmethod
    def clear(self) -> None:
        """清除所有记录"""
        pass

    @abstractmethod
    def get_size(self) -> int:
        """获取记录数量"""
        pass


def format_float(value: float) -> str:
    """9 位有效数字"""
    return FLOAT_FORMAT % value


def atomic_write(path: str, write: Callable[[TextIO], None]) -> None:
    """
    先写同目录临时文件再 os.replace，避免留下半写文件

    Args:
        path: 目标文件
        write: 接收已打开文本文件的写入函数
    """
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            write(f)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
