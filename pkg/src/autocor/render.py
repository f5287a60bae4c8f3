"""Annotated overlays (PNG) and validation plots (SVG)."""
from __future__ import annotations

import numpy as np
from PIL import Image, ImageDraw

from .geometry import Line2, Point2
from .landmarks import LandmarkSet
from .measurement import Measurement, PosteriorSide

CORTEX_COLOR = (170, 60, 220)      # tangent lines
SEGMENT_COLOR = (40, 120, 255)     # A, B, C
POINT_COLOR = (255, 200, 0)
TEXT_COLOR = (255, 255, 255)


def foot(p: Point2, line: Line2) -> Point2:
    """Orthogonal projection of ``p`` onto ``line``."""
    a, b = np.array(tuple(line.p1)), np.array(tuple(line.p2))
    u = b - a
    t = float(np.dot(np.array(tuple(p)) - a, u) / np.dot(u, u))
    q = a + t * u
    return Point2(float(q[0]), float(q[1]))


def _full_span(line: Line2, h: int) -> tuple[tuple[float, float], tuple[float, float]]:
    """Endpoints of ``line`` clipped to rows 0 and h - 1."""
    if line.p1.y == line.p2.y:
        return (line.p1.x, line.p1.y), (line.p2.x, line.p2.y)
    return (line.x_at(0.0), 0.0), (line.x_at(h - 1.0), h - 1.0)


def offset_segments(lm: LandmarkSet, m: Measurement) -> dict[str, tuple[Point2, Point2]]:
    """A (anterior offset), B (diameter) and C (posterior offset) as point pairs."""
    if m.posterior_side is PosteriorSide.IMAGE_LEFT:
        post, post_line, ant, ant_line = lm.edge_left, lm.cortex_left, lm.edge_right, lm.cortex_right
    else:
        post, post_line, ant, ant_line = lm.edge_right, lm.cortex_right, lm.edge_left, lm.cortex_left
    mid = Point2(0.5 * (lm.cortex_left.p1.x + lm.cortex_left.p2.x),
                 0.5 * (lm.cortex_left.p1.y + lm.cortex_left.p2.y))
    return {
        "A": (ant, foot(ant, ant_line)),
        "B": (mid, foot(mid, lm.cortex_right)),
        "C": (post, foot(post, post_line)),
    }


def draw_overlay(image: np.ndarray, lm: LandmarkSet, m: Measurement) -> np.ndarray:
    """RGB copy of ``image`` with landmarks, tangent lines, segments and ratios."""
    rgb = image if image.ndim == 3 else np.repeat(image[:, :, None], 3, axis=2)
    canvas = Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), "RGB")
    h = rgb.shape[0]
    g = ImageDraw.Draw(canvas)
    for line in (lm.cortex_left, lm.cortex_right):
        g.line(_full_span(line, h), fill=CORTEX_COLOR, width=2)
    for name, (a, b) in offset_segments(lm, m).items():
        g.line([tuple(a), tuple(b)], fill=SEGMENT_COLOR, width=2)
        g.text((0.5 * (a.x + b.x) + 4, 0.5 * (a.y + b.y) + 4), name, fill=SEGMENT_COLOR)
    for p in lm.points:
        g.ellipse([p.x - 3, p.y - 3, p.x + 3, p.y + 3], outline=POINT_COLOR, width=2)
    g.text((10, 10), f"ACOR {m.acor:.3f}  PCOR {m.pcor:.3f}  ({m.limb.value})", fill=TEXT_COLOR)
    return np.asarray(canvas)


# ---------------------------------------------------------------------------
# SVG plots

def _figure():
    import matplotlib
    matplotlib.use("Agg")
    from matplotlib import pyplot as plt
    matplotlib.rcParams["svg.hashsalt"] = "autocor"
    return plt


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None})
    fig.clf()


def plot_scatter(path, model, truth, label: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 5))
    ax.scatter(truth, model, s=12)
    lo = float(min(np.min(model), np.min(truth)))
    hi = float(max(np.max(model), np.max(truth)))
    ax.plot([lo, hi], [lo, hi], color="gray", lw=1)
    ax.set_xlabel(f"{label} truth")
    ax.set_ylabel(f"{label} model")
    _save(fig, path)
    plt.close(fig)


def plot_histogram(path, counts, edges, label: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.stairs(counts, edges, fill=True)
    ax.set_xlabel(f"{label} difference (model - truth)")
    ax.set_ylabel("count")
    _save(fig, path)
    plt.close(fig)


def plot_bland_altman(path, ba, label: str) -> None:
    plt = _figure()
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.scatter(ba.means, ba.diffs, s=12)
    for y, style in ((ba.mean_diff, "-"), (ba.loa_low, "--"), (ba.loa_high, "--")):
        ax.axhline(y, color="gray", ls=style, lw=1)
    ax.set_xlabel(f"{label} mean of model and truth")
    ax.set_ylabel(f"{label} model - truth")
    _save(fig, path)
    plt.close(fig)
