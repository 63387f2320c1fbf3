"""
编队几何包
"""

from .quad import LeaderQuad, ShapeMetrics, quad_frame, shape_metrics
from .hemisphere import HemisphereFormation, closed_formation_mesh, derive_followers, hemisphere_mesh

__all__ = [
    "LeaderQuad",
    "ShapeMetrics",
    "quad_frame",
    "shape_metrics",
    "HemisphereFormation",
    "closed_formation_mesh",
    "derive_followers",
    "hemisphere_mesh",
]
