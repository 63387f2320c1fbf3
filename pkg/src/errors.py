"""
异常定义
所有模块共用的异常层次
"""

from typing import Any, Optional


class FluxFormationError(Exception):
    """所有编队规划异常的基类"""


class DegenerateTriangle(FluxFormationError, ValueError):
    """三角形顶点共线"""


class ChargeOnSurface(FluxFormationError, ValueError):
    """电荷位于曲面上（或距离小于保护半径）"""

    def __init__(self, message: str, triangle_index: Optional[int] = None):
        """
        Args:
            message: 错误信息
            triangle_index: 出错三角形在网格中的下标（单个三角形时为 None）
        """
        super().__init__(message)
        self.triangle_index = triangle_index


class DegenerateQuad(FluxFormationError, ValueError):
    """四边形退化（顶点重合或面积为零）"""


class NonPlanarQuad(FluxFormationError, ValueError):
    """四边形偏离平面过大，无法推导跟随者"""


class SingularSystem(FluxFormationError):
    """最小二乘线性系统奇异"""


class KktSingular(FluxFormationError):
    """KKT 系统在多次阻尼重试后仍然奇异"""


class LineSearchFailed(FluxFormationError):
    """线搜索无法满足 Armijo 条件"""


class NotConverged(FluxFormationError):
    """规划器达到最大迭代次数仍未收敛，携带部分路径"""

    def __init__(self, message: str, path: Any = None):
        """
        Args:
            message: 错误信息
            path: 已生成的部分路径（PlannedPath）
        """
        super().__init__(message)
        self.path = path


class EmptyTargetSet(FluxFormationError, ValueError):
    """目标集合为空"""


class InfeasiblePath(FluxFormationError):
    """路径无法在给定运动学约束下参数化"""


class Divergence(FluxFormationError):
    """仿真跟踪误差超出阈值"""


class ScenarioError(FluxFormationError, ValueError):
    """场景文件解析或校验失败"""

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        """
        Args:
            message: 错误信息
            field: 出错字段路径，例如 "target.position"
            line: YAML 语法错误所在行号（从 1 开始）
        """
        location = []
        if field:
            location.append(f"字段 {field}")
        if line is not None:
            location.append(f"第 {line} 行")
        prefix = f"[{', '.join(location)}] " if location else ""
        super().__init__(f"{prefix}{message}")
        self.field = field
        self.line = line


class ReportError(FluxFormationError, ValueError):
    """对比报告输入的指标文件不符合格式"""
