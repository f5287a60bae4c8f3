"""End-to-end measurement of one radiograph."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import imaging, landmarks, segmentation
from .errors import AutocorError
from .imaging import CropRect
from .landmarks import LandmarkSet, RoiConfig
from .measurement import Measurement, SideConvention, measure

log = logging.getLogger(__name__)

STAGES = ("preprocess", "segment", "landmarks", "measure")


@dataclass(frozen=True)
class PipelineConfig:
    roi: RoiConfig = field(default_factory=RoiConfig)
    bilateral_d: int = 30
    sigma_color: float = 100.0
    sigma_space: float = 100.0
    k: int = 4
    eps: float = 1.0
    max_iter: int = 10
    seed: int = 0
    canny_low: float = 50.0
    canny_high: float = 150.0
    side_convention: SideConvention = field(default_factory=SideConvention)


class StageError(AutocorError):
    """A pipeline failure tagged with the stage that raised it."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"{stage}: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineResult:
    measurement: Measurement
    landmarks: LandmarkSet
    contour: segmentation.Contour     # in condyle-ROI coordinates
    threshold: int
    shaft_rect: CropRect


def smooth_gray(img: np.ndarray, cfg: PipelineConfig) -> np.ndarray:
    out = imaging.bilateral_filter(img, cfg.bilateral_d, cfg.sigma_color, cfg.sigma_space)
    return imaging.to_grayscale(out) if out.ndim == 3 else out


def preprocess(image: np.ndarray, cfg: PipelineConfig) -> tuple[np.ndarray, int]:
    """Crop the condyles, blur, gray, then zero out everything at or below Otsu."""
    roi = imaging.crop(image, cfg.roi.condyle_rect)
    gray = smooth_gray(roi, cfg)
    t = imaging.otsu_threshold(gray)
    return imaging.threshold_to_zero(gray, t), t


def segment(thresholded: np.ndarray, cfg: PipelineConfig) -> segmentation.Contour:
    rgb = imaging.gray_to_rgb(thresholded)
    model = segmentation.kmeans_rgb(rgb.reshape(-1, 3), cfg.k, cfg.eps, cfg.max_iter, cfg.seed)
    idx = segmentation.brightest_cluster(model)
    mask = segmentation.cluster_mask(model, idx, thresholded.shape)
    return segmentation.largest_contour(segmentation.external_contours(mask))


def locate(image: np.ndarray, contour: segmentation.Contour,
           cfg: PipelineConfig) -> tuple[LandmarkSet, CropRect]:
    rect = cfg.roi.condyle_rect
    left, right = landmarks.condylar_edge_points(contour)
    patch, patch_rect = landmarks.shaft_patch(
        image, landmarks.remap_to_original(left, rect),
        landmarks.remap_to_original(right, rect), cfg.roi.shaft_extension)
    edges = imaging.canny(smooth_gray(patch, cfg), cfg.canny_low, cfg.canny_high)
    pts = landmarks.cortex_points(edges, cfg.roi.cortex_rows, cfg.roi.min_sep)
    return landmarks.build_landmarks((left, right), pts, patch_rect, rect), patch_rect


def run(image: np.ndarray, cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Run every stage; failures are re-raised as :class:`StageError`."""
    image = imaging.check_image(image)
    stage = "preprocess"
    try:
        thresholded, t = preprocess(image, cfg)
        stage = "segment"
        contour = segment(thresholded, cfg)
        stage = "landmarks"
        lm, patch_rect = locate(image, contour, cfg)
        stage = "measure"
        m = measure(lm, cfg.side_convention)
    except AutocorError as exc:
        if isinstance(exc, StageError):
            raise
        log.debug("stage %s failed: %s", stage, exc)
        raise StageError(stage, exc) from exc
    return PipelineResult(m, lm, contour, t, patch_rect)
