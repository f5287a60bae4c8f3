import itertools
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import ndimage

from autocor import segmentation as seg
from autocor.errors import BadIndex, EmptyContourList, InvalidParams, TooFewColors


def four_color_image(rng, n=400):
    colors = rng.choice(256, size=(4, 3), replace=False).astype(np.uint8)
    while len({tuple(c) for c in colors}) < 4:
        colors = rng.integers(0, 256, (4, 3), dtype=np.uint8)
    idx = np.concatenate([np.arange(4), rng.integers(0, 4, n - 4)])
    return colors, colors[idx]


def pixelwise_inertia(pixels, centers):
    d2 = ((pixels[:, None, :].astype(float) - centers[None]) ** 2).sum(axis=2)
    return d2.min(axis=1).sum(), d2.argmin(axis=1)


# ---------------------------------------------------------------------------
# k-means

@pytest.mark.parametrize("seed", [0, 1, 7, 123])
def test_four_colors_recovered_exactly(seed):
    rng = np.random.default_rng(seed + 100)
    colors, pixels = four_color_image(rng)
    m = seg.kmeans_rgb(pixels, k=4, seed=seed)
    found = sorted(map(tuple, m.centers))
    for got, want in zip(found, sorted(map(tuple, colors.astype(float)))):
        assert np.max(np.abs(np.array(got) - want)) <= 0.5
    assert m.inertia == 0.0


def test_k1_center_is_global_mean():
    pixels = np.random.default_rng(2).integers(0, 256, (500, 3))
    m = seg.kmeans_rgb(pixels, k=1)
    assert np.allclose(m.centers[0], pixels.mean(axis=0))


def test_deterministic_for_seed():
    pixels = np.random.default_rng(3).integers(0, 256, (300, 3))
    a, b = seg.kmeans_rgb(pixels, seed=5), seg.kmeans_rgb(pixels, seed=5)
    assert np.array_equal(a.centers, b.centers) and np.array_equal(a.labels, b.labels)
    assert a.inertia_history == b.inertia_history


def test_inertia_monotone_and_labels_nearest_on_random_images():
    rng = np.random.default_rng(42)
    for _ in range(100):
        n = int(rng.integers(20, 300))
        pixels = rng.integers(0, 256, (n, 3))
        if rng.random() < 0.5:
            pixels = pixels // 32 * 32        # fewer distinct colors, many ties
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", TooFewColors)
            m = seg.kmeans_rgb(pixels, k=int(rng.integers(1, 6)), seed=int(rng.integers(1000)),
                               eps=0.0, max_iter=15)
        h = m.inertia_history
        assert all(b <= a + 1e-9 * max(1.0, a) for a, b in zip(h, h[1:]))
        inertia, nearest = pixelwise_inertia(pixels, m.centers)
        assert m.inertia == pytest.approx(inertia, rel=1e-9, abs=1e-9)
        assert np.array_equal(m.labels, nearest)
        assert m.labels.min() >= 0 and m.labels.max() < m.k


def test_stops_at_max_iter_or_eps():
    pixels = np.random.default_rng(4).integers(0, 256, (1000, 3))
    m = seg.kmeans_rgb(pixels, k=4, eps=0.0, max_iter=3)
    assert m.iterations == 3 and len(m.inertia_history) == 4
    m = seg.kmeans_rgb(pixels, k=4, eps=1e9, max_iter=10)
    assert m.iterations == 1 and m.converged


def test_too_few_colors_warns_and_duplicates():
    pixels = np.array([[0, 0, 0]] * 5 + [[255, 255, 255]] * 5)
    with pytest.warns(TooFewColors):
        m = seg.kmeans_rgb(pixels, k=4)
    assert m.inertia == 0.0
    assert {tuple(c) for c in m.centers} == {(0.0, 0.0, 0.0), (255.0, 255.0, 255.0)}


def test_invalid_params():
    with pytest.raises(InvalidParams):
        seg.kmeans_rgb(np.zeros((0, 3)), k=2)
    with pytest.raises(InvalidParams):
        seg.kmeans_rgb(np.zeros((4, 3)), k=0)


def test_float_pixels_supported():
    pixels = np.array([[0.5, 0.5, 0.5], [0.5, 0.5, 0.5], [200.25, 1.0, 3.0]])
    m = seg.kmeans_rgb(pixels, k=2)
    assert m.inertia == 0.0


# ---------------------------------------------------------------------------
# brightest cluster and masks

def model_with(centers, labels=None):
    c = np.asarray(centers, dtype=float)
    lab = np.zeros(1, int) if labels is None else np.asarray(labels)
    return seg.ClusterModel(k=len(c), centers=c, labels=lab, inertia=0.0)


def test_brightest_examples():
    assert seg.brightest_cluster(model_with([(10, 10, 10), (250, 250, 250)])) == 1
    assert seg.brightest_cluster(model_with([(3, 4, 5)])) == 0
    assert seg.brightest_cluster(model_with([(200, 200, 200), (200, 200, 200)])) == 0


def test_brightest_center_permutation_invariant():
    rng = np.random.default_rng(6)
    for _ in range(50):
        centers = rng.integers(0, 256, (4, 3)).astype(float)
        chosen = centers[seg.brightest_cluster(model_with(centers))]
        for perm in itertools.permutations(range(4)):
            p = centers[list(perm)]
            assert np.array_equal(p[seg.brightest_cluster(model_with(p))], chosen)


def test_cluster_mask_cases():
    labels = (np.indices((4, 4)).sum(axis=0) % 2).ravel()
    m = model_with([(0, 0, 0), (9, 9, 9), (5, 5, 5)], labels)
    mask = seg.cluster_mask(m, 1, (4, 4))
    assert np.array_equal(mask, np.where(labels.reshape(4, 4) == 1, 255, 0))
    assert not seg.cluster_mask(m, 2, (4, 4)).any()
    full = model_with([(0, 0, 0)], np.zeros(16, int))
    assert np.all(seg.cluster_mask(full, 0, (4, 4)) == 255)
    with pytest.raises(BadIndex):
        seg.cluster_mask(m, 3, (4, 4))


# ---------------------------------------------------------------------------
# contours

def square(n=10, pad=3):
    m = np.zeros((n + 2 * pad, n + 2 * pad), np.uint8)
    m[pad:pad + n, pad:pad + n] = 255
    return m


def assert_closed_8_chain(c):
    p = np.asarray(c.points)
    if len(p) == 1:
        return
    steps = np.abs(np.diff(np.vstack([p, p[:1]]), axis=0))
    assert np.all(steps.max(axis=1) == 1)


def fan_area(points):
    """Polygon area by triangle fan from the first vertex."""
    p = np.asarray(points, dtype=float)
    total = 0.0
    for a, b in zip(p[1:-1], p[2:]):
        u, v = a - p[0], b - p[0]
        total += 0.5 * (u[0] * v[1] - u[1] * v[0])
    return abs(total)


def test_square_contour_36_points_area_81():
    cs = seg.external_contours(square())
    assert len(cs) == 1
    assert len(cs[0]) == 36
    assert seg.contour_area(cs[0]) == 81.0
    assert_closed_8_chain(cs[0])


def test_hole_ignored():
    m = square(12)
    m[7:11, 7:11] = 0
    cs = seg.external_contours(m)
    assert len(cs) == 1 and len(cs[0]) == 44


def test_blob_inside_hole_not_reported():
    m = square(15)
    m[6:15, 6:15] = 0
    m[9:12, 9:12] = 255
    assert len(seg.external_contours(m)) == 1


def test_two_blobs_two_contours_in_raster_order():
    m = np.zeros((20, 30), np.uint8)
    m[10:14, 2:6] = 255
    m[2:5, 20:28] = 255
    cs = seg.external_contours(m)
    assert len(cs) == 2
    assert tuple(cs[0].points[0]) == (20, 2)


def test_single_pixel_and_empty():
    m = np.zeros((5, 5), np.uint8)
    assert seg.external_contours(m) == []
    m[2, 3] = 255
    (c,) = seg.external_contours(m)
    assert c.points.tolist() == [[3, 2]]
    assert seg.contour_area(c) == 0.0


def test_diagonal_pixels_are_one_component():
    m = np.zeros((6, 6), np.uint8)
    m[1, 1] = m[2, 2] = m[3, 3] = 255
    (c,) = seg.external_contours(m)
    assert_closed_8_chain(c)
    assert {tuple(p) for p in c.points} == {(1, 1), (2, 2), (3, 3)}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**31 - 1))
def test_random_blob_contours(seed):
    rng = np.random.default_rng(seed)
    m = ndimage.binary_opening(rng.random((24, 24)) < 0.55).astype(np.uint8) * 255
    cs = seg.external_contours(m)
    lab, n = ndimage.label(np.pad(m > 0, 1), structure=np.ones((3, 3)))
    assert len(cs) <= n
    for c in cs:
        assert_closed_8_chain(c)
        assert np.all(m[c.points[:, 1], c.points[:, 0]] == 255)
        assert seg.contour_area(c) == pytest.approx(fan_area(c.points), abs=1e-9)


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 12), st.integers(3, 12), st.floats(0, np.pi))
def test_convex_blob_round_trip(a, b, theta):
    yy, xx = np.mgrid[0:40, 0:40] - 20.0
    u = xx * np.cos(theta) + yy * np.sin(theta)
    v = -xx * np.sin(theta) + yy * np.cos(theta)
    m = ((u / a) ** 2 + (v / b) ** 2 <= 1).astype(np.uint8) * 255
    (c,) = seg.external_contours(m)
    # fill the traced outline back in and compare pixel sets
    from PIL import Image, ImageDraw
    canvas = Image.new("L", (40, 40), 0)
    pts = [tuple(map(int, p)) for p in c.points]
    if len(pts) > 2:
        ImageDraw.Draw(canvas).polygon(pts, fill=255, outline=255)
    else:
        for p in pts:
            canvas.putpixel(p, 255)
    assert np.array_equal(np.asarray(canvas), m)


def test_largest_contour():
    big, small = seg.Contour(np.array([[0, 0], [9, 0], [9, 9], [0, 9]])), \
        seg.Contour(np.array([[0, 0], [3, 0], [3, 3], [0, 3]]))
    assert seg.largest_contour([small, big]) is big
    assert seg.largest_contour([small]) is small
    tie = seg.Contour(np.array([[5, 5], [8, 5], [8, 8], [5, 8]]))
    assert seg.largest_contour([small, tie]) is small
    with pytest.raises(EmptyContourList):
        seg.largest_contour([])
