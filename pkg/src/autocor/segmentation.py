"""Isolating the femoral component: color k-means, cluster masks, contours."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import BadIndex, EmptyContourList, InvalidParams, TooFewColors

WHITE = np.array([255.0, 255.0, 255.0])


@dataclass
class ClusterModel:
    k: int
    centers: np.ndarray            # (k, 3) float
    labels: np.ndarray             # (n,) int, one per input pixel
    inertia: float
    inertia_history: list = field(default_factory=list)
    iterations: int = 0
    converged: bool = False


def distinct_colors(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique rows of ``pixels`` with the inverse map and multiplicities."""
    if np.all((pixels >= 0) & (pixels <= 255) & (pixels == np.floor(pixels))):
        q = pixels.astype(np.int64)
        keys = (q[:, 0] << 16) | (q[:, 1] << 8) | q[:, 2]
        ukeys, inverse, counts = np.unique(keys, return_inverse=True, return_counts=True)
        colors = np.stack([(ukeys >> 16) & 255, (ukeys >> 8) & 255, ukeys & 255], axis=1)
        return colors.astype(np.float64), inverse.ravel(), counts
    colors, inverse, counts = np.unique(pixels, axis=0, return_inverse=True, return_counts=True)
    return colors, inverse.ravel(), counts


def _initial_centers(colors: np.ndarray, inverse: np.ndarray, k: int,
                     rng: np.random.Generator) -> np.ndarray:
    """First k distinct colors met while visiting the pixels in a seeded random order.

    Frequent colors are therefore more likely to seed a cluster.
    """
    order = rng.permutation(len(inverse))
    _, first = np.unique(inverse[order], return_index=True)
    distinct = colors[np.argsort(first, kind="stable")]
    if len(distinct) >= k:
        return distinct[:k].copy()
    warnings.warn(f"only {len(distinct)} distinct colors for k={k}; duplicating centers",
                  TooFewColors, stacklevel=3)
    extra = distinct[rng.integers(0, len(distinct), size=k - len(distinct))]
    return np.concatenate([distinct, extra])


def assign(pixels: np.ndarray, centers: np.ndarray,
           weights: np.ndarray | None = None) -> tuple[np.ndarray, float]:
    """Nearest center by squared distance (lowest index wins ties), plus inertia."""
    d2 = ((pixels[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = d2.argmin(axis=1)
    best = d2[np.arange(len(labels)), labels]
    return labels, float(best.sum() if weights is None else np.dot(best, weights))


def recenter(pixels: np.ndarray, labels: np.ndarray, centers: np.ndarray,
             weights: np.ndarray | None = None) -> np.ndarray:
    k = len(centers)
    counts = np.bincount(labels, weights=weights, minlength=k)
    new = centers.copy()
    filled = counts > 0
    for ch in range(pixels.shape[1]):
        col = pixels[:, ch] if weights is None else pixels[:, ch] * weights
        sums = np.bincount(labels, weights=col, minlength=k)
        new[filled, ch] = sums[filled] / counts[filled]
    return new


def kmeans_rgb(pixels, k: int = 4, eps: float = 1.0, max_iter: int = 10,
               seed: int = 0) -> ClusterModel:
    """Lloyd's k-means on color triples.

    Iterates assignment and recentering until no center moves by ``eps`` or
    more, or ``max_iter`` recenterings have run. Empty clusters keep their
    previous center. Labels returned always match the returned centers.
    Work is done on the distinct colors weighted by their pixel counts, which
    gives the same partition as clustering every pixel.
    """
    pixels = np.asarray(pixels, dtype=np.float64).reshape(-1, 3)
    if k < 1 or len(pixels) == 0 or max_iter < 0 or eps < 0:
        raise InvalidParams(f"bad k-means params k={k} n={len(pixels)} max_iter={max_iter}")
    colors, inverse, counts = distinct_colors(pixels)
    weights = counts.astype(np.float64)
    rng = np.random.default_rng(seed)
    centers = _initial_centers(colors, inverse, k, rng)
    labels, inertia = assign(colors, centers, weights)
    history = [inertia]
    converged = False
    it = 0
    while it < max_iter:
        new = recenter(colors, labels, centers, weights)
        shift = float(np.sqrt(((new - centers) ** 2).sum(axis=1)).max())
        centers = new
        labels, inertia = assign(colors, centers, weights)
        history.append(inertia)
        it += 1
        if shift < eps:
            converged = True
            break
    return ClusterModel(k=k, centers=centers, labels=labels[inverse], inertia=inertia,
                        inertia_history=history, iterations=it, converged=converged)


def brightest_cluster(model: ClusterModel) -> int:
    d = np.sqrt(((np.asarray(model.centers, dtype=np.float64) - WHITE) ** 2).sum(axis=1))
    return int(np.argmin(d))


def cluster_mask(model: ClusterModel, idx: int, dims: tuple[int, int]) -> np.ndarray:
    """255 where a pixel belongs to cluster ``idx``; ``dims`` is (height, width)."""
    if not 0 <= idx < model.k:
        raise BadIndex(f"cluster {idx} not in [0, {model.k})")
    labels = np.asarray(model.labels).reshape(dims)
    return np.where(labels == idx, 255, 0).astype(np.uint8)


# ---------------------------------------------------------------------------
# contours

@dataclass(frozen=True, eq=False)
class Contour:
    """Closed 8-connected boundary trace; ``points`` is an (N, 2) array of (x, y)."""

    points: np.ndarray

    def __len__(self):
        return len(self.points)

    def __eq__(self, other):
        return isinstance(other, Contour) and np.array_equal(self.points, other.points)

    __hash__ = None


# (drow, dcol), counterclockwise as displayed, starting east
_DIRS = ((0, 1), (-1, 1), (-1, 0), (-1, -1), (0, -1), (1, -1), (1, 0), (1, 1))
_DIR_INDEX = {d: i for i, d in enumerate(_DIRS)}
_FOUR = ndimage.generate_binary_structure(2, 1)
_EIGHT = ndimage.generate_binary_structure(2, 2)


def _trace_outer(fg: np.ndarray, i: int, j: int) -> list[tuple[int, int]]:
    """Follow the outer border from (i, j), whose west neighbor is background.

    ``fg`` is zero-padded so neighbor lookups never leave the array.
    """
    start = (i, j)
    first = None
    for step in range(8):                      # clockwise from west
        di, dj = _DIRS[(4 - step) % 8]
        if fg[i + di, j + dj]:
            first = (i + di, j + dj)
            break
    if first is None:
        return [start]
    trail = []
    prev, cur = first, start
    while True:
        d = _DIR_INDEX[(prev[0] - cur[0], prev[1] - cur[1])]
        for step in range(1, 9):               # counterclockwise after prev
            di, dj = _DIRS[(d + step) % 8]
            nxt = (cur[0] + di, cur[1] + dj)
            if fg[nxt]:
                break
        trail.append(cur)
        if nxt == start and cur == first:
            return trail
        prev, cur = cur, nxt


def external_contours(mask: np.ndarray) -> list[Contour]:
    """Outer borders of the top-level 8-connected foreground components.

    Holes are not traced, and components sitting inside another component's
    hole are not reported. Contours come in raster order of their first pixel.
    """
    fg = np.pad(np.asarray(mask) > 0, 1)
    labels, n = ndimage.label(fg, structure=_EIGHT)
    if n == 0:
        return []
    bg_labels, _ = ndimage.label(~fg, structure=_FOUR)
    outside = bg_labels == bg_labels[0, 0]
    touching = ndimage.binary_dilation(outside, structure=_FOUR) & fg
    top_level = np.unique(labels[touching])

    flat = labels.ravel()
    ids, first = np.unique(flat, return_index=True)
    starts = dict(zip(ids.tolist(), first.tolist()))
    width = labels.shape[1]
    out = []
    for lab in sorted(top_level.tolist(), key=starts.get):
        i, j = divmod(starts[lab], width)
        trail = _trace_outer(fg, i, j)
        pts = np.array([(c - 1, r - 1) for r, c in trail], dtype=np.int64)
        out.append(Contour(pts))
    return out


def contour_area(c: Contour) -> float:
    """Shoelace area of the polygon through the boundary pixel centers."""
    p = np.asarray(c.points, dtype=np.float64)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y)))


def largest_contour(cs: list[Contour]) -> Contour:
    if not cs:
        raise EmptyContourList("no contours found in the cluster mask")
    areas = [contour_area(c) for c in cs]
    return cs[int(np.argmax(areas))]
