"""
通量计算模块
点电荷穿过三角化曲面的通量（立体角）精确计算
"""

import math
from typing import TYPE_CHECKING

import numpy as np

from src.errors import ChargeOnSurface, DegenerateQuad
from .geometry import EPS_GEOM, SURFACE_GUARD, PointCharge, Triangle, TriMesh, Vec3, as_vec3

if TYPE_CHECKING:
    from src.formation.quad import LeaderQuad

FOUR_PI = 4.0 * math.pi

# p1–p3 对角线三角化：(p1, p2, p3) 与 (p1, p3, p4)
QUAD_TRIANGLES = np.array([[0, 1, 2], [0, 2, 3]])


def signed_solid_angles(charge_pos: np.ndarray, a: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """
    批量计算有向立体角（不做任何校验）

    向量取自电荷指向各顶点，法向背离电荷时为正。
    所有参数形状为 (..., 3)，按 numpy 规则广播。

    Returns:
        有向立体角，形状 (...)，取值范围 (−2π, 2π]
    """
    r1 = a - charge_pos
    r2 = b - charge_pos
    r3 = c - charge_pos
    n1 = np.linalg.norm(r1, axis=-1)
    n2 = np.linalg.norm(r2, axis=-1)
    n3 = np.linalg.norm(r3, axis=-1)
    numerator = np.einsum("...i,...i->...", r1, np.cross(r2, r3))
    denominator = (
        n1 * n2 * n3
        + np.einsum("...i,...i->...", r1, r2) * n3
        + np.einsum("...i,...i->...", r1, r3) * n2
        + np.einsum("...i,...i->...", r2, r3) * n1
    )
    return 2.0 * np.arctan2(numerator, denominator)


def _surface_hits(charge_pos: Vec3, tri: np.ndarray) -> np.ndarray:
    """
    判断电荷是否落在三角形上（保护半径内）

    Args:
        charge_pos: 电荷位置
        tri: 三角形顶点，形状 (M, 3, 3)

    Returns:
        布尔数组，形状 (M,)
    """
    a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
    near_vertex = np.min(np.linalg.norm(tri - charge_pos, axis=-1), axis=1) < SURFACE_GUARD

    v0 = b - a
    v1 = c - a
    v2 = charge_pos - a
    normal = np.cross(v0, v1)
    normal /= np.linalg.norm(normal, axis=1, keepdims=True)
    in_plane = np.abs(np.einsum("ij,ij->i", v2, normal)) < SURFACE_GUARD

    d00 = np.einsum("ij,ij->i", v0, v0)
    d01 = np.einsum("ij,ij->i", v0, v1)
    d11 = np.einsum("ij,ij->i", v1, v1)
    d20 = np.einsum("ij,ij->i", v2, v0)
    d21 = np.einsum("ij,ij->i", v2, v1)
    denom = d00 * d11 - d01 * d01
    v = (d11 * d20 - d01 * d21) / denom
    w = (d00 * d21 - d01 * d20) / denom
    u = 1.0 - v - w
    tol = 1e-12
    inside = (u >= -tol) & (v >= -tol) & (w >= -tol)
    return near_vertex | (in_plane & inside)


def solid_angle_triangle(charge_pos: Vec3, tri: Triangle) -> float:
    """
    单个三角形对电荷位置所张的有向立体角

    Args:
        charge_pos: 电荷位置
        tri: 三角形（构造时已校验不共线）

    Returns:
        立体角（球面度），法向指向电荷时为负

    Raises:
        ChargeOnSurface: 电荷位于三角形上
    """
    charge_pos = as_vec3(charge_pos)
    vertices = tri.vertices()[None]
    if _surface_hits(charge_pos, vertices)[0]:
        raise ChargeOnSurface(f"电荷 {charge_pos} 位于三角形上")
    return float(signed_solid_angles(charge_pos, tri.a, tri.b, tri.c))


def flux_surface(charge: PointCharge, mesh: TriMesh) -> float:
    """
    点电荷穿过三角网格的通量

    归一化 1/(4πε0)=1 且 ε0 不出现在结果中：包围单位电荷的闭合曲面通量为 1。

    Args:
        charge: 点电荷
        mesh: 三角网格

    Returns:
        通量 = Q · Σ立体角 / 4π

    Raises:
        ChargeOnSurface: 电荷落在某个三角形上，异常中带有三角形下标
    """
    tri = mesh.triangle_vertices()
    hits = np.flatnonzero(_surface_hits(charge.position, tri))
    if hits.size:
        index = int(hits[0])
        raise ChargeOnSurface(f"电荷 {charge.position} 位于网格第 {index} 个三角形上", triangle_index=index)
    angles = signed_solid_angles(charge.position, tri[:, 0], tri[:, 1], tri[:, 2])
    return charge.charge * float(np.sum(angles)) / FOUR_PI


def quad_triangle_vertices(points: np.ndarray) -> np.ndarray:
    """
    四边形按 p1–p3 对角线拆成两个三角形

    Args:
        points: 四个顶点，形状 (..., 4, 3)

    Returns:
        三角形顶点，形状 (..., 2, 3, 3)
    """
    return points[..., QUAD_TRIANGLES, :]


def quad_flux_batch(charge_positions: np.ndarray, charges: np.ndarray, quads: np.ndarray) -> np.ndarray:
    """
    批量计算多个四边形在多个点电荷下的通量（不做校验，供雅可比使用）

    Args:
        charge_positions: 电荷位置，形状 (M, 3)
        charges: 电荷量，形状 (M,)
        quads: 四边形顶点，形状 (K, 4, 3)

    Returns:
        各四边形的总通量，形状 (K,)
    """
    tri = quad_triangle_vertices(quads)[:, None]  # (K, 1, 2, 3, 3)
    pos = charge_positions[None, :, None, :]  # (1, M, 1, 3)
    angles = signed_solid_angles(pos, tri[..., 0, :], tri[..., 1, :], tri[..., 2, :])  # (K, M, 2)
    return np.einsum("kmt,m->k", angles, charges) / FOUR_PI


def flux_quad_boundary(charge: PointCharge, quad: "LeaderQuad") -> float:
    """
    穿过领航四边形 S1 的有向通量 Φ1（其相反数即半球面 S2 的通量）

    Args:
        charge: 点电荷
        quad: 领航者四边形

    Returns:
        Φ1，法向朝向电荷时为负

    Raises:
        DegenerateQuad: 任一三角形退化
        ChargeOnSurface: 电荷位于 S1 上
    """
    tri = quad_triangle_vertices(quad.points)
    areas = np.linalg.norm(np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0]), axis=1)
    if np.any(areas <= EPS_GEOM):
        raise DegenerateQuad(f"四边形三角化后存在退化三角形: {quad.points.tolist()}")
    hits = np.flatnonzero(_surface_hits(charge.position, tri))
    if hits.size:
        raise ChargeOnSurface(f"电荷 {charge.position} 位于四边形上", triangle_index=int(hits[0]))
    angles = signed_solid_angles(charge.position, tri[:, 0], tri[:, 1], tri[:, 2])
    return charge.charge * float(np.sum(angles)) / FOUR_PI
