"""Anterior and posterior condylar offset ratios from lateral knee radiographs.

The pipeline crops the condylar region, smooths and thresholds it, isolates
the femoral component with color k-means, takes its leftmost and rightmost
points, finds the shaft cortices with Canny on a patch above them, and turns
the six landmarks into offsets normalized by the femoral diameter.
"""
from .errors import AutocorError
from .geometry import Line2, Point2, point_line_distance
from .landmarks import LandmarkSet, RoiConfig
from .measurement import Limb, Measurement, PosteriorSide, SideConvention, measure
from .pipeline import PipelineConfig, PipelineResult, StageError, run

__all__ = [
    "AutocorError", "Line2", "Point2", "point_line_distance", "LandmarkSet", "RoiConfig",
    "Limb", "Measurement", "PosteriorSide", "SideConvention", "measure",
    "PipelineConfig", "PipelineResult", "StageError", "run",
]
__version__ = "0.1.0"
