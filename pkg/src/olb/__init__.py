"""Outer length billiards around convex polygons."""

from .billiard import (
    Orbit,
    StepRecord,
    Terminal,
    image,
    orbit,
    orbit_points,
    outer_area_step,
    segment_step,
    step,
    step_inverse,
    variational_residual,
)
from .errors import BilliardError
from .geom import Circle, ConvexPolygon, DirectedLine, EllipseFoci, Point2, polygon_metrics

__all__ = [
    "BilliardError", "Circle", "ConvexPolygon", "DirectedLine", "EllipseFoci", "Orbit",
    "Point2", "StepRecord", "Terminal", "image", "orbit", "orbit_points", "outer_area_step",
    "polygon_metrics", "segment_step", "step", "step_inverse", "variational_residual",
]
