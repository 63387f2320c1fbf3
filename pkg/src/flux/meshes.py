"""
常用闭合网格
用于高斯定律校验
"""

import numpy as np

from .geometry import TriMesh

_PHI = (1.0 + np.sqrt(5.0)) / 2.0

_ICOSAHEDRON_VERTICES = np.array([
    [-1, _PHI, 0], [1, _PHI, 0], [-1, -_PHI, 0], [1, -_PHI, 0],
    [0, -1, _PHI], [0, 1, _PHI], [0, -1, -_PHI], [0, 1, -_PHI],
    [_PHI, 0, -1], [_PHI, 0, 1], [-_PHI, 0, -1], [-_PHI, 0, 1],
])

_ICOSAHEDRON_FACES = np.array([
    [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
    [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
    [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
    [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
])

_CUBE_VERTICES = np.array([
    [0, 0, 0], [1, 0, 0], [1, 1, 0], [0, 1, 0],
    [0, 0, 1], [1, 0, 1], [1, 1, 1], [0, 1, 1],
], dtype=float) - 0.5

_CUBE_FACES = np.array([
    [0, 2, 1], [0, 3, 2],  # z = 0
    [4, 5, 6], [4, 6, 7],  # z = 1
    [0, 1, 5], [0, 5, 4],  # y = 0
    [3, 7, 6], [3, 6, 2],  # y = 1
    [0, 4, 7], [0, 7, 3],  # x = 0
    [1, 2, 6], [1, 6, 5],  # x = 1
])


def _orient_outward(vertices: np.ndarray, faces: np.ndarray) -> np.ndarray:
    """凸网格（以原点为中心）：法向与面心同向，否则翻转绕序"""
    tri = vertices[faces]
    normals = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
    inward = np.einsum("ij,ij->i", normals, tri.mean(axis=1)) < 0
    oriented = faces.copy()
    oriented[inward] = oriented[inward][:, [0, 2, 1]]
    return oriented


def icosahedron(radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """
    外接球半径为 radius 的正二十面体（外法向）

    Args:
        radius: 外接球半径
        center: 中心位置

    Returns:
        闭合 TriMesh
    """
    unit = _ICOSAHEDRON_VERTICES / np.linalg.norm(_ICOSAHEDRON_VERTICES[0])
    faces = _orient_outward(unit, _ICOSAHEDRON_FACES)
    return TriMesh(unit * radius + np.asarray(center, dtype=float), faces, closed=True)


def cube(size: float = 1.0, center=(0.0, 0.0, 0.0)) -> TriMesh:
    """边长为 size 的立方体，每个面拆成两个三角形（外法向）"""
    faces = _orient_outward(_CUBE_VERTICES, _CUBE_FACES)
    return TriMesh(_CUBE_VERTICES * size + np.asarray(center, dtype=float), faces, closed=True)
