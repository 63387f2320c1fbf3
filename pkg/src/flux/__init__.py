"""
通量计算包
"""

from .geometry import EPS_GEOM, SURFACE_GUARD, PointCharge, Triangle, TriMesh, Vec3, as_vec3
from .solid_angle import (
    flux_quad_boundary,
    flux_surface,
    quad_flux_batch,
    signed_solid_angles,
    solid_angle_triangle,
)
from .meshes import cube, icosahedron

__all__ = [
    "EPS_GEOM",
    "SURFACE_GUARD",
    "PointCharge",
    "Triangle",
    "TriMesh",
    "Vec3",
    "as_vec3",
    "flux_quad_boundary",
    "flux_surface",
    "quad_flux_batch",
    "signed_solid_angles",
    "solid_angle_triangle",
    "cube",
    "icosahedron",
]
