"""Raster load/store, band differencing, and gamma normalization.

Conventions: single-channel rasters are 2-D numpy arrays (row-major),
16-bit bands are uint16, masks are bool, band differences are int32.
Bands ship as 16-bit single-channel TIFF; masks and visualizations are
written as lossless PNG.
"""

import os
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import InputError, ValidationError

# Wavelength labels for the 12-exposure sets, 7 visible + 5 near-infrared.
WAVELENGTHS = (
    "445nm Royal Blue",
    "475nm Long Blue",
    "499nm Cyan",
    "540nm Green",
    "595nm Amber",
    "638nm Red",
    "656nm Deep Red",
    "IR706nm",
    "IR728nm",
    "IR772nm",
    "IR858nm",
    "IR924nm",
)

_TIFF_16BIT_MODES = {"I;16", "I;16L", "I;16B", "I;16N"}


@dataclass
class BandStack:
    """Ordered set of 12 co-registered 16-bit bands (index 0 = 445nm, 11 = IR924nm)."""

    bands: list

    def __post_init__(self):
        if len(self.bands) != 12:
            raise ValidationError(f"band stack needs exactly 12 bands, got {len(self.bands)}")
        shape = self.bands[0].shape
        for i, b in enumerate(self.bands):
            if b.shape != shape:
                raise ValidationError(f"band {i + 1} shape {b.shape} != band 1 shape {shape}")
            if b.dtype != np.uint16:
                raise ValidationError(f"band {i + 1} must be uint16, got {b.dtype}")

    @property
    def shape(self):
        return self.bands[0].shape

    @property
    def first(self):
        return self.bands[0]

    @property
    def last(self):
        return self.bands[11]

    @classmethod
    def from_dir(cls, path):
        """Load band_01.tif .. band_12.tif from a directory."""
        bands = []
        for i in range(1, 13):
            f = os.path.join(path, f"band_{i:02d}.tif")
            bands.append(load_raster16(f))
        return cls(bands)

    def write_dir(self, path):
        os.makedirs(path, exist_ok=True)
        for i, b in enumerate(self.bands, start=1):
            write_raster16(b, os.path.join(path, f"band_{i:02d}.tif"))


def _open_image(path):
    if not os.path.isfile(path):
        raise InputError(f"no such file: {path}")
    try:
        return Image.open(path)
    except Exception as e:  # PIL raises a zoo of types for broken files
        raise InputError(f"cannot read image {path}: {e}") from e


def load_raster16(path):
    """Load a single-channel 16-bit TIFF as a uint16 array, values untouched."""
    img = _open_image(path)
    if img.mode in ("RGB", "RGBA", "CMYK", "YCbCr"):
        raise InputError(f"{path}: expected single channel, got mode {img.mode}")
    if img.mode not in _TIFF_16BIT_MODES:
        raise InputError(f"{path}: unsupported bit depth (mode {img.mode}, want 16-bit)")
    arr = np.asarray(img)
    return arr.astype(np.uint16, copy=False)


def write_raster16(raster, path):
    raster = np.ascontiguousarray(raster, dtype=np.uint16)
    try:
        Image.fromarray(raster).save(path, format="TIFF")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def load_mask(path):
    """Read a mask PNG; any nonzero pixel counts as foreground."""
    img = _open_image(path)
    if img.mode != "L":
        img = img.convert("L")
    return np.asarray(img) > 0


def write_mask(mask, path):
    """Store a bool mask as 8-bit PNG, foreground=255, background=0."""
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    try:
        Image.fromarray(data, mode="L").save(path, format="PNG")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def load_rgb(path):
    """Read an 8-bit color image (PNG or JPEG) as an HxWx3 uint8 array."""
    img = _open_image(path)
    if img.mode != "RGB":
        img = img.convert("RGB")
    return np.asarray(img).astype(np.uint8, copy=False)


def write_rgb(img, path):
    img = np.ascontiguousarray(img, dtype=np.uint8)
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValidationError(f"expected HxWx3 array, got shape {img.shape}")
    try:
        Image.fromarray(img, mode="RGB").save(path, format="PNG")
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def band_difference(a, b):
    """Sample-wise a - b as signed int32. Negatives are preserved, no clamping."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValidationError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return a.astype(np.int32) - b.astype(np.int32)


def gamma_normalize(raster, gamma=2.2):
    """Gamma-encode a 16-bit raster and stretch it to the full 8-bit range.

    The raster is scaled to [0, 1], raised to 1/gamma, min-max rescaled over
    the whole image, and rounded (half-up) to 8 bits. Monotone in the input.

    Returns (raster8, degenerate): a constant input cannot be stretched, so it
    yields an all-zero raster with the flag set instead of an error, which
    keeps batch runs alive on blank crops.
    """
    raster = np.asarray(raster)
    if raster.size == 0:
        raise ValidationError("empty raster")
    if gamma <= 0:
        raise ValidationError(f"gamma must be positive, got {gamma}")
    unit = raster.astype(np.float64) / 65535.0
    encoded = np.power(unit, 1.0 / gamma)
    lo = encoded.min()
    hi = encoded.max()
    if lo == hi:
        return np.zeros(raster.shape, dtype=np.uint8), True
    stretched = (encoded - lo) / (hi - lo) * 255.0
    return np.floor(stretched + 0.5).astype(np.uint8), False
