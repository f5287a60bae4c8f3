"""Planar geometry in image coordinates.

x is the column and y the row, origin at the top-left pixel center, y growing
downward. Coordinates are real-valued so fitted lines can sit between pixels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import CoincidentPoints


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite point ({self.x}, {self.y})")

    def __iter__(self):
        yield self.x
        yield self.y

    def translated(self, dx: float, dy: float) -> "Point2":
        return Point2(self.x + dx, self.y + dy)


@dataclass(frozen=True)
class Line2:
    """Infinite line through two distinct points, directed p1 -> p2."""

    p1: Point2
    p2: Point2

    def __post_init__(self):
        if self.p1 == self.p2:
            raise CoincidentPoints(f"cannot build a line from {self.p1} twice")

    def x_at(self, y: float) -> float:
        """Column where the line crosses row ``y`` (lines must not be horizontal)."""
        dy = self.p2.y - self.p1.y
        if dy == 0:
            raise ValueError("horizontal line has no unique x at a row")
        return self.p1.x + (y - self.p1.y) * (self.p2.x - self.p1.x) / dy


def line_from_points(a: Point2, b: Point2) -> Line2:
    return Line2(a, b)


def point_line_distance(p: Point2, line: Line2) -> float:
    """Perpendicular distance from ``p`` to the infinite line through ``line``.

    |(x2-x1)(y1-y0) - (x1-x0)(y2-y1)| / sqrt((x2-x1)^2 + (y2-y1)^2)
    """
    x0, y0 = p.x, p.y
    x1, y1 = line.p1.x, line.p1.y
    x2, y2 = line.p2.x, line.p2.y
    num = abs((x2 - x1) * (y1 - y0) - (x1 - x0) * (y2 - y1))
    return num / math.sqrt((x2 - x1) ** 2 + (y2 - y1) ** 2)


def euclidean_distance(a: Point2, b: Point2) -> float:
    return math.sqrt((a.x - b.x) ** 2 + (a.y - b.y) ** 2)
