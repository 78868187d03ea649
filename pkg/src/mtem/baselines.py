"""Global and local binarization baselines: Otsu, Sauvola, and their AND.

Both operate on a single band (band 12 by convention, where parchment
contrast peaks). Otsu picks the global threshold maximizing between-class
variance over every histogram split point; Sauvola thresholds each pixel at
T = m * (1 + k * (s / R - 1)) with mean m and standard deviation s over a
centered window clipped at the image borders.
"""

import numpy as np

from .errors import DegenerateDataError, ValidationError


def _bit_depth(raster):
    raster = np.asarray(raster)
    if raster.dtype == np.uint8:
        return 8
    if raster.dtype == np.uint16:
        return 16
    raise ValidationError(f"expected uint8 or uint16 raster, got {raster.dtype}")


def otsu(raster):
    """Global threshold maximizing between-class variance.

    Returns (threshold, mask) with foreground = pixels strictly above the
    threshold (the bright, parchment side). Among equal-variance thresholds
    the lowest wins.
    """
    raster = np.asarray(raster)
    bins = 1 << _bit_depth(raster)
    hist = np.bincount(raster.ravel(), minlength=bins).astype(np.float64)
    total = hist.sum()
    values = np.arange(bins, dtype=np.float64)

    w0 = np.cumsum(hist)  # pixels with value <= t
    w1 = total - w0
    sum0 = np.cumsum(hist * values)
    sum_total = sum0[-1]
    valid = (w0 > 0) & (w1 > 0)
    if not valid.any():
        raise DegenerateDataError("degenerate histogram: image has a single distinct value")
    mu0 = np.where(valid, sum0 / np.where(w0 > 0, w0, 1), 0.0)
    mu1 = np.where(valid, (sum_total - sum0) / np.where(w1 > 0, w1, 1), 0.0)
    between = np.where(valid, w0 * w1 * (mu0 - mu1) ** 2, -np.inf)
    t = int(np.argmax(between))  # argmax takes the first (lowest) maximum
    return t, raster > t


def window_sums(raster, window):
    """Exact windowed sum, sum of squares, and pixel count via integral images.

    The window is the (window x window) square centered on each pixel,
    clipped at the borders. Accumulation is int64 so results are exact for
    16-bit inputs at full production resolution.
    """
    if window < 3 or window % 2 == 0:
        raise ValidationError(f"window must be odd and >= 3, got {window}")
    h, w = raster.shape
    if window > min(h, w):
        raise ValidationError(f"window {window} exceeds image extent {min(h, w)}")
    r = window // 2
    data = raster.astype(np.int64)

    def integral(img):
        out = np.zeros((h + 1, w + 1), dtype=np.int64)
        np.cumsum(np.cumsum(img, axis=0), axis=1, out=out[1:, 1:])
        return out

    s1 = integral(data)
    s2 = integral(data * data)
    ys = np.arange(h)
    xs = np.arange(w)
    y0 = np.clip(ys - r, 0, h)[:, None]
    y1 = np.clip(ys + r + 1, 0, h)[:, None]
    x0 = np.clip(xs - r, 0, w)[None, :]
    x1 = np.clip(xs + r + 1, 0, w)[None, :]

    def box(s):
        return s[y1, x1] - s[y1, x0] - s[y0, x1] + s[y0, x0]

    count = (y1 - y0) * (x1 - x0)
    return box(s1), box(s2), count


def sauvola_threshold(raster, window=31, k=0.2, dynamic_range=None):
    """Per-pixel Sauvola threshold surface for `raster`."""
    raster = np.asarray(raster)
    if dynamic_range is None:
        dynamic_range = float(1 << (_bit_depth(raster) - 1))
    s1, s2, count = window_sums(raster, window)
    mean = s1 / count
    variance = s2 / count - mean * mean
    std = np.sqrt(np.maximum(variance, 0.0))
    return mean * (1.0 + k * (std / dynamic_range - 1.0))


def sauvola(raster, window=31, k=0.2, dynamic_range=None):
    """Local adaptive binarization; foreground = pixels above their local threshold."""
    raster = np.asarray(raster)
    return raster > sauvola_threshold(raster, window, k, dynamic_range)


def combine_and(a, b):
    """Bitwise AND of two masks."""
    a = np.asarray(a, dtype=bool)
    b = np.asarray(b, dtype=bool)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a & b
