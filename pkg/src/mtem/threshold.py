"""Range thresholding: the four initial masks from a calibrated spec.

Produces the parchment mask, ink mask, and ink-contour mask from closed
intensity ranges, plus the "other" mask covering everything the three ranges
miss (background, holes, rice, residue). No morphological cleanup happens
here or anywhere downstream.
"""

import numpy as np

from .errors import ValidationError


def _check_same_shape(*arrays):
    shape = np.asarray(arrays[0]).shape
    for a in arrays[1:]:
        if np.asarray(a).shape != shape:
            raise ValidationError(f"dimension mismatch: {np.asarray(a).shape} vs {shape}")


def apply_range(raster, lo, hi):
    """Bit set iff lo <= value <= hi (both ends inclusive)."""
    if lo > hi:
        raise ValidationError(f"range lo {lo} > hi {hi}")
    raster = np.asarray(raster)
    return (raster >= lo) & (raster <= hi)


def threshold_parchment(diff, spec):
    """Parchment mask: band-difference values inside the calibrated range."""
    return apply_range(diff, *spec.parchment_d)


def threshold_ink(i1, diff, spec):
    """Ink mask: conjunction of the band-1 range and the band-difference range."""
    _check_same_shape(i1, diff)
    return apply_range(i1, *spec.ink_i1) & apply_range(diff, *spec.ink_d)


def threshold_contour(i1, diff, spec):
    """Ink-contour mask: same conjunction, with the contour-calibrated ranges."""
    _check_same_shape(i1, diff)
    return apply_range(i1, *spec.contour_i1) & apply_range(diff, *spec.contour_d)


def other_mask(parchment, ink, contour):
    """Complement of the union of the three thresholded masks."""
    _check_same_shape(parchment, ink, contour)
    return ~(np.asarray(parchment, bool) | np.asarray(ink, bool) | np.asarray(contour, bool))
