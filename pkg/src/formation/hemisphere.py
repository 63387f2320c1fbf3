"""
半球编队
由领航者推导跟随者位置，并构建 S2 曲面网格
"""

from dataclasses import dataclass

import numpy as np

from src.errors import NonPlanarQuad
from src.flux.geometry import TriMesh, Vec3
from src.flux.solid_angle import QUAD_TRIANGLES
from .quad import LeaderQuad, quad_frame, shape_metrics

# 平面度容差：最大离面距离 / 平均边长
PLANARITY_RATIO = 0.1
# 跟随者环所在圆与球心连线的仰角（30°）
_RING_COS = np.sqrt(3.0) / 2.0


@dataclass(frozen=True)
class HemisphereFormation:
    """9 机半球编队：4 个领航者 + 5 个跟随者"""

    leaders: LeaderQuad
    followers: np.ndarray  # (5, 3): f1..f4 环 + f5 极点
    radius: float
    normal: Vec3
    center: Vec3

    def positions(self) -> np.ndarray:
        """全部 9 个位置，领航者在前，形状 (9, 3)"""
        return np.vstack([self.leaders.points, self.followers])


def derive_followers(quad: LeaderQuad) -> HemisphereFormation:
    """
    由领航者推导跟随者

    r 取平均对角线长度的一半。f1..f4 位于球心后方 r/2 的平面上，
    方向指向对应边中点，半径 r·√3/2，因此都在半径 r 的球面上；
    f5 = 质心 − r·n。

    Args:
        quad: 领航者四边形

    Returns:
        HemisphereFormation

    Raises:
        DegenerateQuad: 四边形退化
        NonPlanarQuad: 离面距离超过平均边长的 10%
    """
    metrics = shape_metrics(quad)
    if metrics.planarity_defect >= PLANARITY_RATIO * metrics.mean_side():
        raise NonPlanarQuad(
            f"四边形不够平整: 离面 {metrics.planarity_defect:.4g} m, 平均边长 {metrics.mean_side():.4g} m"
        )
    center, normal, _ = quad_frame(quad)
    radius = 0.5 * float(np.mean(metrics.diagonals))

    midpoints = 0.5 * (quad.points + np.roll(quad.points, -1, axis=0))
    directions = midpoints - center
    directions -= np.outer(directions @ normal, normal)
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    ring = center - 0.5 * radius * normal + radius * _RING_COS * directions
    pole = center - radius * normal
    return HemisphereFormation(
        leaders=quad,
        followers=np.vstack([ring, pole]),
        radius=radius,
        normal=normal,
        center=center,
    )


def hemisphere_mesh(formation: HemisphereFormation) -> TriMesh:
    """
    S2 曲面网格，边界为领航者四边形

    绕序与 S1 相反地共享边界，S1 ∪ S2 构成外法向一致的闭合曲面。
    顶点下标：0..3 领航者，4..7 跟随者环，8 极点。
    """
    faces = []
    for i in range(4):
        j = (i + 1) % 4
        p_i, p_j = i, j
        f_i, f_j = 4 + i, 4 + j
        faces.append([p_j, p_i, f_i])
        faces.append([p_j, f_i, f_j])
        faces.append([f_j, f_i, 8])
    return TriMesh(formation.positions(), np.array(faces))


def closed_formation_mesh(formation: HemisphereFormation) -> TriMesh:
    """S1（p1–p3 对角线三角化）与 S2 拼成的闭合网格"""
    s2 = hemisphere_mesh(formation)
    faces = np.vstack([QUAD_TRIANGLES, s2.faces])
    return TriMesh(s2.vertices, faces, closed=True)
