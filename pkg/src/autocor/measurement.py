"""Offsets, femoral diameter and the offset ratios."""
from __future__ import annotations

import enum
from dataclasses import asdict, dataclass, field

from .errors import DegenerateDiameter
from .geometry import Line2, point_line_distance
from .landmarks import LandmarkSet

PARALLEL_TOLERANCE = 0.10
MIN_POSTERIOR_TO_ANTERIOR = 2.0


class PosteriorSide(str, enum.Enum):
    IMAGE_LEFT = "ImageLeft"
    IMAGE_RIGHT = "ImageRight"


class Limb(str, enum.Enum):
    LEFT = "Left"
    RIGHT = "Right"
    UNKNOWN = "Unknown"


@dataclass(frozen=True)
class SideConvention:
    """Which knee a posterior side stands for.

    A lateral film alone does not prove laterality; this is a labeling
    convention for the acquisition setup, not an anatomical inference.
    """

    image_left: Limb = Limb.RIGHT
    image_right: Limb = Limb.LEFT

    def limb(self, side: PosteriorSide) -> Limb:
        return self.image_left if side is PosteriorSide.IMAGE_LEFT else self.image_right


@dataclass
class Measurement:
    aco_px: float
    pco_px: float
    fd_px: float
    acor: float
    pcor: float
    posterior_side: PosteriorSide
    limb: Limb
    warnings: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["posterior_side"] = self.posterior_side.value
        d["limb"] = self.limb.value
        return d


def femoral_diameter(cortex_a: Line2, cortex_b: Line2) -> float:
    """Mean distance from the two points defining ``cortex_a`` to ``cortex_b``."""
    d1, d2 = _diameter_samples(cortex_a, cortex_b)
    fd = 0.5 * (d1 + d2)
    if fd <= 0:
        raise DegenerateDiameter("cortex lines coincide; femoral diameter is zero")
    return fd


def _diameter_samples(a: Line2, b: Line2) -> tuple[float, float]:
    return point_line_distance(a.p1, b), point_line_distance(a.p2, b)


def condylar_offsets(lm: LandmarkSet) -> tuple[float, float]:
    """Each condylar extreme against the cortex line on its own side."""
    return (point_line_distance(lm.edge_left, lm.cortex_left),
            point_line_distance(lm.edge_right, lm.cortex_right))


def classify_posterior(offset_left: float, offset_right: float) -> PosteriorSide:
    """The larger offset is posterior; an exact tie resolves to the image right."""
    if offset_left > offset_right:
        return PosteriorSide.IMAGE_LEFT
    return PosteriorSide.IMAGE_RIGHT


def measure(lm: LandmarkSet, conv: SideConvention = SideConvention()) -> Measurement:
    warnings = []
    d1, d2 = _diameter_samples(lm.cortex_left, lm.cortex_right)
    fd = femoral_diameter(lm.cortex_left, lm.cortex_right)
    if abs(d1 - d2) > PARALLEL_TOLERANCE * max(d1, d2):
        warnings.append(f"cortex lines not parallel: diameter samples {d1:.2f} and {d2:.2f} px")

    left, right = condylar_offsets(lm)
    side = classify_posterior(left, right)
    if left == right:
        warnings.append("equal offsets on both sides; posterior side defaulted to image right")
    pco, aco = max(left, right), min(left, right)
    if aco > 0 and pco / aco < MIN_POSTERIOR_TO_ANTERIOR:
        warnings.append(f"posterior/anterior offset ratio {pco / aco:.2f} < "
                        f"{MIN_POSTERIOR_TO_ANTERIOR}; side assignment uncertain")
    return Measurement(
        aco_px=aco,
        pco_px=pco,
        fd_px=fd,
        acor=aco / fd,
        pcor=pco / fd,
        posterior_side=side,
        limb=conv.limb(side),
        warnings=warnings,
    )
