"""
几何基础类型
三维向量、三角形、点电荷与三角网格
"""

from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Sequence

import numpy as np

from src.errors import DegenerateTriangle

# 面积退化阈值（m²）
EPS_GEOM = 1e-12
# 电荷贴面保护半径（m）
SURFACE_GUARD = 1e-9

# 三维向量直接使用形状为 (3,) 的 numpy 数组
Vec3 = np.ndarray


def as_vec3(value: Iterable[float]) -> Vec3:
    """
    转换为三维向量并校验

    Args:
        value: 任意可迭代的三个实数

    Returns:
        float64 数组，形状 (3,)

    Raises:
        ValueError: 形状不对或包含 NaN/Inf
    """
    vec = np.asarray(value, dtype=float).reshape(-1)
    if vec.shape != (3,):
        raise ValueError(f"三维向量需要 3 个分量，实际为 {vec.shape[0]} 个")
    if not np.all(np.isfinite(vec)):
        raise ValueError(f"三维向量包含非有限值: {vec}")
    return vec


@dataclass(frozen=True)
class Triangle:
    """三角形，逆时针绕序定义外法向"""

    a: Vec3
    b: Vec3
    c: Vec3

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, as_vec3(getattr(self, name)))
        if np.linalg.norm(self.doubled_area_vector()) <= EPS_GEOM:
            raise DegenerateTriangle(f"三角形顶点共线: {self.a}, {self.b}, {self.c}")

    def doubled_area_vector(self) -> Vec3:
        """(b−a)×(c−a)，方向为法向，模长为两倍面积"""
        return np.cross(self.b - self.a, self.c - self.a)

    def normal(self) -> Vec3:
        """单位法向量"""
        n = self.doubled_area_vector()
        return n / np.linalg.norm(n)

    def vertices(self) -> np.ndarray:
        """顶点数组，形状 (3, 3)"""
        return np.stack([self.a, self.b, self.c])


@dataclass(frozen=True)
class PointCharge:
    """点电荷"""

    position: Vec3
    charge: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_vec3(self.position))
        object.__setattr__(self, "charge", float(self.charge))
        if self.charge == 0.0 or not np.isfinite(self.charge):
            raise ValueError(f"电荷量必须为非零有限值，实际为 {self.charge}")


@dataclass(frozen=True)
class TriMesh:
    """
    三角网格

    顶点数组 + 面索引数组。closed=True 时要求每条有向边都恰好
    有一条反向边与之配对（绕序一致的闭合曲面）。
    """

    vertices: np.ndarray
    faces: np.ndarray
    closed: bool = False

    def __post_init__(self):
        vertices = np.asarray(self.vertices, dtype=float)
        faces = np.asarray(self.faces, dtype=int)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise ValueError(f"顶点数组形状应为 (N, 3)，实际为 {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3 or len(faces) == 0:
            raise ValueError(f"面数组形状应为 (M, 3) 且非空，实际为 {faces.shape}")
        if not np.all(np.isfinite(vertices)):
            raise ValueError("网格顶点包含非有限值")
        if faces.min() < 0 or faces.max() >= len(vertices):
            raise ValueError("面索引超出顶点范围")
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

        tri = self.triangle_vertices()
        areas = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
        bad = np.flatnonzero(areas <= EPS_GEOM)
        if bad.size:
            raise DegenerateTriangle(f"网格第 {int(bad[0])} 个三角形退化")
        if self.closed and not self.has_closed_boundary():
            raise ValueError("网格标记为闭合，但存在未配对或重复的边")

    @classmethod
    def from_triangles(cls, triangles: Sequence[Triangle], closed: bool = False) -> "TriMesh":
        """
        由三角形列表构建网格（共享顶点按坐标精确合并）

        Args:
            triangles: 三角形列表
            closed: 是否为闭合曲面

        Returns:
            TriMesh
        """
        index = {}
        vertices: List[Vec3] = []
        faces = []
        for tri in triangles:
            face = []
            for v in (tri.a, tri.b, tri.c):
                key = tuple(v.tolist())
                if key not in index:
                    index[key] = len(vertices)
                    vertices.append(v)
                face.append(index[key])
            faces.append(face)
        return cls(np.array(vertices), np.array(faces), closed=closed)

    def triangle_vertices(self) -> np.ndarray:
        """各三角形的顶点坐标，形状 (M, 3, 3)"""
        return self.vertices[self.faces]

    def triangles(self) -> List[Triangle]:
        """按顺序返回 Triangle 列表"""
        return [Triangle(*tri) for tri in self.triangle_vertices()]

    def has_closed_boundary(self) -> bool:
        """每条有向边恰好出现一次且其反向边也恰好出现一次"""
        edges = Counter()
        for i, j, k in self.faces:
            for edge in ((i, j), (j, k), (k, i)):
                edges[edge] += 1
        return all(count == 1 and edges.get((e[1], e[0]), 0) == 1 for e, count in edges.items())

    def __len__(self) -> int:
        return len(self.faces)
