import numpy as np
import pytest

from mtem.baselines import combine_and, otsu, sauvola, sauvola_threshold, window_sums
from mtem.errors import DegenerateDataError, ValidationError


def otsu_oracle(raster, bins):
    """Exhaustive between-class-variance sweep, lowest maximizer wins."""
    values = raster.ravel().astype(np.float64)
    best_t, best_var = None, -1.0
    for t in range(bins):
        low = values[values <= t]
        high = values[values > t]
        if low.size == 0 or high.size == 0:
            continue
        w0 = low.size / values.size
        w1 = high.size / values.size
        var = w0 * w1 * (low.mean() - high.mean()) ** 2
        if var > best_var + 1e-12:
            best_var = var
            best_t = t
    return best_t


def sauvola_oracle(raster, window, k, dynamic_range):
    """Naive clipped-window mean/std thresholding, exact integer sums."""
    h, w = raster.shape
    r = window // 2
    out = np.zeros((h, w), bool)
    data = raster.astype(np.int64)
    for y in range(h):
        for x in range(w):
            y0, y1 = max(0, y - r), min(h, y + r + 1)
            x0, x1 = max(0, x - r), min(w, x + r + 1)
            block = data[y0:y1, x0:x1]
            count = block.size
            s1 = int(block.sum())
            s2 = int((block * block).sum())
            mean = s1 / count
            variance = s2 / count - mean * mean
            std = np.sqrt(max(variance, 0.0))
            threshold = mean * (1.0 + k * (std / dynamic_range - 1.0))
            out[y, x] = raster[y, x] > threshold
    return out


def test_otsu_two_group_example():
    raster = np.array([[10] * 10 + [200] * 10], dtype=np.uint8)
    t, mask = otsu(raster)
    assert 10 <= t <= 199
    assert t == 10  # lowest of the tied maximizers
    assert np.array_equal(mask, raster > 10)
    assert mask.sum() == 10


def test_otsu_constant_image_errors():
    with pytest.raises(DegenerateDataError, match="degenerate histogram"):
        otsu(np.full((4, 4), 7, dtype=np.uint8))


def test_otsu_matches_exhaustive_sweep():
    rng = np.random.default_rng(19)
    for trial in range(12):
        img8 = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
        t8, m8 = otsu(img8)
        assert t8 == otsu_oracle(img8, 256)
        assert np.array_equal(m8, img8 > t8)
        img16 = rng.integers(0, 65536, size=(12, 12)).astype(np.uint16)
        t16, m16 = otsu(img16)
        assert t16 == otsu_oracle(img16, 65536)
        assert np.array_equal(m16, img16 > t16)


def test_sauvola_constant_image_all_foreground():
    raster = np.full((10, 10), 500, dtype=np.uint16)
    assert sauvola(raster, window=5, k=0.2).all()


def test_sauvola_k_zero_is_local_mean():
    rng = np.random.default_rng(23)
    raster = rng.integers(0, 256, size=(12, 12)).astype(np.uint8)
    mask = sauvola(raster, window=5, k=0.0)
    s1, _, count = window_sums(raster, 5)
    assert np.array_equal(mask, raster > s1 / count)


def test_sauvola_window_validation():
    raster = np.zeros((10, 10), np.uint8)
    for bad in (2, 4, 1, 11):
        with pytest.raises(ValidationError):
            sauvola(raster, window=bad)


def test_sauvola_matches_naive_bit_for_bit():
    rng = np.random.default_rng(29)
    for trial in range(4):
        raster = rng.integers(0, 65536, size=(24, 24)).astype(np.uint16)
        for window in (3, 7, 15):
            fast = sauvola(raster, window=window, k=0.2, dynamic_range=32768.0)
            slow = sauvola_oracle(raster, window, 0.2, 32768.0)
            assert np.array_equal(fast, slow)


def test_sauvola_threshold_surface_matches_naive_values():
    rng = np.random.default_rng(31)
    raster = rng.integers(0, 256, size=(16, 16)).astype(np.uint8)
    window, k, R = 7, 0.34, 128.0
    surface = sauvola_threshold(raster, window=window, k=k, dynamic_range=R)
    r = window // 2
    data = raster.astype(np.int64)
    for y, x in ((0, 0), (3, 11), (15, 15), (8, 0)):
        y0, y1 = max(0, y - r), min(16, y + r + 1)
        x0, x1 = max(0, x - r), min(16, x + r + 1)
        block = data[y0:y1, x0:x1]
        mean = int(block.sum()) / block.size
        var = int((block * block).sum()) / block.size - mean * mean
        expect = mean * (1.0 + k * (np.sqrt(max(var, 0.0)) / R - 1.0))
        assert surface[y, x] == expect


def test_combine_and_properties():
    rng = np.random.default_rng(37)
    a = rng.random((9, 9)) < 0.5
    b = rng.random((9, 9)) < 0.5
    assert np.array_equal(combine_and(a, a), a)
    assert not combine_and(a, np.zeros_like(a)).any()
    assert np.array_equal(combine_and(a, np.ones_like(a)), a)
    both = combine_and(a, b)
    assert not (both & ~a).any()
    assert not (both & ~b).any()
