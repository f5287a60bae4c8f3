"""Synthetic lateral knee radiographs with analytically known landmarks.

The femoral shaft is a band of width ``fd`` whose two outer boundaries are
the cortex lines. The femoral component is a convex octagon whose leftmost
and rightmost flanks end exactly at the prescribed perpendicular offsets from
those lines (the bottom of each flank is the landmark, matching the
max-row tie rule of the edge detector). Its interior, further than ``shell *
fd`` from the outline, shows bone through the component, so the metal appears
as a thick bright shell rather than a flat disc. A smaller tibial ellipse sits
below.
Truth is computed from the continuous geometry before rasterization.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InfeasibleGeometry
from .geometry import Line2, Point2, point_line_distance
from .imaging import CropRect
from .measurement import PosteriorSide

MARGIN = 6.0


@dataclass(frozen=True)
class PhantomSpec:
    width: int = 1378
    height: int = 672
    fd_px: float = 100.0
    pcor: float = 1.0
    acor: float = 0.1
    shaft_tilt_deg: float = 0.0
    posterior_side: PosteriorSide = PosteriorSide.IMAGE_LEFT
    noise_sigma: float = 0.0
    background: int = 15
    bone: int = 120
    cortex: int = 180
    implant: int = 250
    condyle_bone: int = 180        # bone seen through the component's window
    shell: float = 0.3             # component wall thickness, fraction of fd
    cortex_width: float = 2.0      # device pixels at every scale
    seed: int = 0
    scale: float = 1.0
    # layout, in unscaled pixels
    center_x: float = 700.0
    edge_y: float = 330.0
    edge_dy: float = 0.0           # right edge row minus left edge row
    implant_top: float = 250.0
    top_chamfer: float = 30.0
    bottom_chamfer: float = 60.0
    tibia_gap: float = 16.0
    tibia_half_height: float = 35.0
    cortex_rows: tuple[float, float] = (100.0, 140.0)
    roi: CropRect = CropRect(500, 900, 224, 448)

    def __post_init__(self):
        if self.fd_px <= 0:
            raise InfeasibleGeometry(f"fd_px must be positive, got {self.fd_px}")
        if not 0.4 <= self.pcor <= 1.8:
            raise InfeasibleGeometry(f"pcor {self.pcor} outside [0.4, 1.8]")
        if not 0.0 <= self.acor <= 0.6:
            raise InfeasibleGeometry(f"acor {self.acor} outside [0, 0.6]")
        if not self.implant > max(self.background, self.bone, self.cortex, self.condyle_bone):
            raise InfeasibleGeometry("implant must be the brightest structure")
        if self.scale <= 0 or self.noise_sigma < 0:
            raise InfeasibleGeometry("scale must be positive and noise_sigma non-negative")


@dataclass
class PhantomTruth:
    edge_left: Point2
    edge_right: Point2
    cortex_left: Line2
    cortex_right: Line2
    aco_px: float
    pco_px: float
    fd_px: float
    acor: float
    pcor: float
    posterior_side: PosteriorSide
    implant_area: float = 0.0
    tibia_area: float = 0.0

    @property
    def points(self) -> list[Point2]:
        return [self.edge_left, self.edge_right,
                self.cortex_left.p1, self.cortex_left.p2,
                self.cortex_right.p1, self.cortex_right.p2]

    def to_dict(self) -> dict:
        def pt(p):
            return [p.x, p.y]
        return {
            "landmarks": {
                "edge_left": pt(self.edge_left),
                "edge_right": pt(self.edge_right),
                "cortex_left": [pt(self.cortex_left.p1), pt(self.cortex_left.p2)],
                "cortex_right": [pt(self.cortex_right.p1), pt(self.cortex_right.p2)],
            },
            "aco_px": self.aco_px,
            "pco_px": self.pco_px,
            "fd_px": self.fd_px,
            "acor": self.acor,
            "pcor": self.pcor,
            "posterior_side": self.posterior_side.value,
        }


def _inside_convex(xx, yy, poly, inset=0.0):
    """Pixel centers at least ``inset`` inside a clockwise (screen) convex polygon."""
    inside = np.ones(xx.shape, dtype=bool)
    for (ax, ay), (bx, by) in zip(poly, poly[1:] + poly[:1]):
        cross = (bx - ax) * (yy - ay) - (by - ay) * (xx - ax)
        inside &= cross >= inset * math.hypot(bx - ax, by - ay) - 1e-9
    return inside


def _polygon_area(poly) -> float:
    p = np.asarray(poly)
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def generate(spec: PhantomSpec = PhantomSpec()) -> tuple[np.ndarray, PhantomTruth]:
    s = spec.scale
    W, H = int(round(spec.width * s)), int(round(spec.height * s))
    fd = spec.fd_px * s
    pco, aco = spec.pcor * fd, spec.acor * fd
    if spec.posterior_side is PosteriorSide.IMAGE_LEFT:
        off_left, off_right = pco, aco
    else:
        off_left, off_right = aco, pco

    t = math.radians(spec.shaft_tilt_deg)
    ct, st = math.cos(t), math.sin(t)
    y_e = spec.edge_y * s
    y_l = y_e - 0.5 * spec.edge_dy * s
    y_r = y_e + 0.5 * spec.edge_dy * s
    s_l, s_r = -(0.5 * fd + off_left), 0.5 * fd + off_right
    # signed distance from the shaft axis: (x - ax) cos t - (y - y_e) sin t
    ax = spec.center_x * s - 0.5 * (s_l + s_r + (y_l + y_r - 2 * y_e) * st) / ct

    def x_at(sd, y):
        return ax + (sd + (y - y_e) * st) / ct

    x_l, x_r = x_at(s_l, y_l), x_at(s_r, y_r)
    top = spec.implant_top * s
    ctop, cbot = spec.top_chamfer * s, spec.bottom_chamfer * s
    roi = spec.roi.scaled(s)
    margin = MARGIN * s
    if x_l < roi.x0 + margin or x_r > roi.x1 - 1 - margin:
        raise InfeasibleGeometry(
            f"implant spans x {x_l:.1f}..{x_r:.1f}, outside ROI {roi.x0}..{roi.x1}")
    if top < roi.y0 + margin or max(y_l, y_r) + cbot > roi.y1 - 1 - margin:
        raise InfeasibleGeometry("implant does not fit the ROI rows")
    if top + ctop >= min(y_l, y_r) or x_l + max(ctop, cbot) >= x_r - max(ctop, cbot):
        raise InfeasibleGeometry("implant too small for its chamfers")

    implant_poly = [
        (x_l + ctop, top), (x_r - ctop, top), (x_r, top + ctop), (x_r, y_r),
        (x_r - cbot, y_r + cbot), (x_l + cbot, y_l + cbot), (x_l, y_l), (x_l, top + ctop),
    ]
    tib_cx = 0.5 * (x_l + x_r)
    tib_a = 0.3 * (x_r - x_l)
    tib_b = spec.tibia_half_height * s
    tib_cy = max(y_l, y_r) + cbot + spec.tibia_gap * s + tib_b
    implant_area = _polygon_area(implant_poly)
    tibia_area = math.pi * tib_a * tib_b
    if tibia_area >= implant_area:
        raise InfeasibleGeometry("tibial blob would outgrow the femoral component")
    if tib_cy + tib_b > H - 1:
        raise InfeasibleGeometry("tibial blob leaves the image")

    yy, xx = np.mgrid[0:H, 0:W].astype(np.float64)
    img = np.full((H, W), float(spec.background))
    # shaft band with pixel-coverage edges, so the intensity step is centred
    # on the continuous cortex line rather than snapped to one side of it
    dist = np.abs((xx - ax) * ct - (yy - y_e) * st)
    outer = np.clip(0.5 * fd - dist + 0.5, 0.0, 1.0)
    inner = np.clip(0.5 * fd - spec.cortex_width - dist + 0.5, 0.0, 1.0)
    band = (spec.background + outer * (spec.cortex - spec.background)
            + inner * (spec.bone - spec.cortex))
    shaft = yy < top + ctop
    img[shaft] = band[shaft]
    img[((xx - tib_cx) / tib_a) ** 2 + ((yy - tib_cy) / tib_b) ** 2 <= 1.0] = spec.implant
    # centres within half a pixel of the outline: extremes land on the nearest pixel
    img[_inside_convex(xx, yy, implant_poly, inset=-0.5)] = spec.implant
    img[_inside_convex(xx, yy, implant_poly, inset=spec.shell * fd)] = spec.condyle_bone

    if spec.noise_sigma > 0:
        rng = np.random.default_rng(spec.seed)
        img = img + rng.normal(0.0, spec.noise_sigma, size=img.shape)
    img = np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)

    r0, r1 = (r * s for r in spec.cortex_rows)
    cortex_left = Line2(Point2(x_at(-0.5 * fd, r0), r0), Point2(x_at(-0.5 * fd, r1), r1))
    cortex_right = Line2(Point2(x_at(0.5 * fd, r0), r0), Point2(x_at(0.5 * fd, r1), r1))
    edge_left, edge_right = Point2(x_l, y_l), Point2(x_r, y_r)
    truth = PhantomTruth(
        edge_left=edge_left,
        edge_right=edge_right,
        cortex_left=cortex_left,
        cortex_right=cortex_right,
        aco_px=aco,
        pco_px=pco,
        fd_px=fd,
        acor=aco / fd,
        pcor=pco / fd,
        posterior_side=spec.posterior_side,
        implant_area=implant_area,
        tibia_area=tibia_area,
    )
    # the stored offsets must be what the measurement layer would compute
    assert abs(point_line_distance(edge_left, cortex_left) - off_left) < 1e-6 * max(1.0, fd)
    return img, truth


@dataclass(frozen=True)
class SweepRanges:
    """Grid over (pcor, acor) with jitter inside each cell, plus random nuisances."""

    pcor: tuple[float, float] = (0.508, 1.576)
    acor: tuple[float, float] = (0.0, 0.522)
    n_pcor: int = 20
    n_acor: int = 10
    fd_px: tuple[float, float] = (90.0, 115.0)
    tilt_deg: tuple[float, float] = (-3.0, 3.0)
    edge_dy: tuple[float, float] = (-8.0, 8.0)
    noise_sigma: float = 8.0
    base: PhantomSpec = field(default_factory=PhantomSpec)


def sweep_specs(ranges: SweepRanges = SweepRanges(), seed: int = 0) -> list[PhantomSpec]:
    rng = np.random.default_rng(seed)
    specs = []
    for i, j in itertools.product(range(ranges.n_pcor), range(ranges.n_acor)):
        u = rng.random(6)
        pcor = ranges.pcor[0] + (i + u[0]) * (ranges.pcor[1] - ranges.pcor[0]) / ranges.n_pcor
        acor = ranges.acor[0] + (j + u[1]) * (ranges.acor[1] - ranges.acor[0]) / ranges.n_acor
        specs.append(replace(
            ranges.base,
            pcor=float(pcor),
            acor=float(acor),
            fd_px=float(ranges.fd_px[0] + u[2] * (ranges.fd_px[1] - ranges.fd_px[0])),
            shaft_tilt_deg=float(ranges.tilt_deg[0] + u[3] * (ranges.tilt_deg[1] - ranges.tilt_deg[0])),
            edge_dy=float(ranges.edge_dy[0] + u[4] * (ranges.edge_dy[1] - ranges.edge_dy[0])),
            posterior_side=PosteriorSide.IMAGE_LEFT if u[5] < 0.5 else PosteriorSide.IMAGE_RIGHT,
            noise_sigma=ranges.noise_sigma,
            seed=int(rng.integers(0, 2**31 - 1)),
        ))
    return specs


def sweep(ranges: SweepRanges = SweepRanges(), seed: int = 0):
    """Render every spec of :func:`sweep_specs`; returns ``[(image, truth), ...]``."""
    return [generate(spec) for spec in sweep_specs(ranges, seed)]


def spec_to_dict(spec: PhantomSpec) -> dict:
    d = asdict(spec)
    d["posterior_side"] = spec.posterior_side.value
    d["roi"] = [spec.roi.x0, spec.roi.x1, spec.roi.y0, spec.roi.y1]
    return d
