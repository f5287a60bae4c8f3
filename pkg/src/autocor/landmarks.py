"""The six anatomical landmarks: two condylar extremes and four cortex points."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CortexTooNarrow, EmptyPatch, InvariantViolation, NoEdgePixels, OutOfBounds
from .geometry import Line2, Point2
from .imaging import CropRect, check_image
from .segmentation import Contour


@dataclass(frozen=True)
class RoiConfig:
    condyle_rect: CropRect = CropRect(500, 900, 224, 448)
    shaft_extension: int = 50
    cortex_rows: tuple[int, int] = (100, 140)
    min_sep: int = 10

    def __post_init__(self):
        if len(self.cortex_rows) != 2 or self.cortex_rows[0] == self.cortex_rows[1]:
            raise ValueError(f"need two distinct cortex rows, got {self.cortex_rows}")
        if min(self.cortex_rows) < 0:
            raise ValueError("cortex rows must be non-negative")
        if self.shaft_extension < 0 or self.min_sep < 0:
            raise ValueError("shaft_extension and min_sep must be >= 0")

    def scaled(self, s: float) -> "RoiConfig":
        """Same ROI for an image magnified by ``s``."""
        return RoiConfig(
            condyle_rect=self.condyle_rect.scaled(s),
            shaft_extension=int(round(self.shaft_extension * s)),
            cortex_rows=tuple(int(round(r * s)) for r in self.cortex_rows),
            min_sep=max(1, int(round(self.min_sep * s))),
        )


@dataclass(frozen=True)
class LandmarkSet:
    """Landmarks in original-image coordinates.

    ``cortex_left``/``cortex_right`` run from the upper cortex row (p1) to the
    lower one (p2).
    """

    edge_left: Point2
    edge_right: Point2
    cortex_left: Line2
    cortex_right: Line2
    patch_rows: tuple[float, float] | None = field(default=None, compare=False)

    @property
    def points(self) -> list[Point2]:
        return [self.edge_left, self.edge_right,
                self.cortex_left.p1, self.cortex_left.p2,
                self.cortex_right.p1, self.cortex_right.p2]

    def validate(self) -> "LandmarkSet":
        if not self.edge_left.x < self.edge_right.x:
            raise InvariantViolation(
                f"condylar edges out of order: left {self.edge_left} right {self.edge_right}")
        for a, b in ((self.cortex_left.p1, self.cortex_right.p1),
                     (self.cortex_left.p2, self.cortex_right.p2)):
            if a.y != b.y:
                raise InvariantViolation(f"cortex points {a} and {b} are not on one row")
            if not a.x < b.x:
                raise InvariantViolation(f"left cortex {a} not left of right cortex {b} at row {a.y}")
        if self.patch_rows is not None:
            lo, hi = self.patch_rows
            for y in (lo, hi):
                gap = self.cortex_right.x_at(y) - self.cortex_left.x_at(y)
                if gap <= 0:
                    raise InvariantViolation(
                        f"cortex lines cross inside the shaft patch (gap {gap:.2f} px at row {y})")
        return self


def condylar_edge_points(c: Contour) -> tuple[Point2, Point2]:
    """Leftmost and rightmost contour points; equal-x ties go to the larger y."""
    pts = np.asarray(c.points)
    if len(pts) == 0:
        raise ValueError("empty contour")
    x, y = pts[:, 0], pts[:, 1]
    left = np.flatnonzero(x == x.min())
    right = np.flatnonzero(x == x.max())
    li = left[np.argmax(y[left])]
    ri = right[np.argmax(y[right])]
    return Point2(float(x[li]), float(y[li])), Point2(float(x[ri]), float(y[ri]))


def remap_to_original(p: Point2, r: CropRect) -> Point2:
    return Point2(p.x + r.x0, p.y + r.y0)


def shaft_patch(original: np.ndarray, left: Point2, right: Point2,
                ext: int) -> tuple[np.ndarray, CropRect]:
    """Region above the condylar edges, widened by ``ext`` on both sides."""
    original = check_image(original)
    h, w = original.shape[:2]
    if not left.x < right.x:
        raise ValueError(f"left edge {left} is not left of right edge {right}")
    for p in (left, right):
        if not (0 <= p.x < w and 0 <= p.y < h):
            raise OutOfBounds(f"edge point {p} outside {w}x{h} image")
    x0 = max(0, int(left.x) - ext)
    x1 = min(w, int(right.x) + ext)
    y1 = int(min(left.y, right.y))
    if y1 <= 0:
        raise EmptyPatch("condylar edge at row 0 leaves no shaft above it")
    rect = CropRect(x0, x1, 0, y1)
    return original[rect.y0:rect.y1, rect.x0:rect.x1].copy(), rect


def cortex_points(edges: np.ndarray, rows=(100, 140), min_sep: int = 10) -> list[Point2]:
    """Outermost edge pixel on each side of every scan row.

    Returns ``[left_r0, right_r0, left_r1, right_r1]`` in patch coordinates.
    """
    edges = np.asarray(edges)
    out = []
    for row in rows:
        if not 0 <= row < edges.shape[0]:
            raise NoEdgePixels(f"scan row {row} outside shaft patch of height {edges.shape[0]}",
                               row=row)
        xs = np.flatnonzero(edges[row])
        if xs.size == 0:
            raise NoEdgePixels(f"no edge pixels on row {row}", row=row)
        lo, hi = int(xs[0]), int(xs[-1])
        if hi - lo < min_sep:
            raise CortexTooNarrow(f"cortex edges on row {row} only {hi - lo} px apart "
                                  f"(need {min_sep})", row=row)
        out += [Point2(float(lo), float(row)), Point2(float(hi), float(row))]
    return out


def build_landmarks(edge_pts, cortex_pts, patch_rect: CropRect,
                    condyle_rect: CropRect) -> LandmarkSet:
    el, er = (remap_to_original(p, condyle_rect) for p in edge_pts)
    l0, r0, l1, r1 = (remap_to_original(p, patch_rect) for p in cortex_pts)
    if l0.y > l1.y:
        l0, r0, l1, r1 = l1, r1, l0, r0
    lm = LandmarkSet(
        edge_left=el,
        edge_right=er,
        cortex_left=Line2(l0, l1),
        cortex_right=Line2(r0, r1),
        patch_rows=(float(patch_rect.y0), float(patch_rect.y1 - 1)),
    )
    return lm.validate()
