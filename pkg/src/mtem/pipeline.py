"""Full segmentation flow: band pair in, ink and parchment masks out.

Stages: band difference -> range thresholds (parchment / ink / contour /
other) -> contour cleaning -> ink filling -> parchment = parchment mask
union ink segmentation. Only bands 1 and 12 participate.
"""

import time
from dataclasses import dataclass

import numpy as np

from . import energymin, threshold
from .errors import MtemError, PipelineStageError, ValidationError
from .imageio import band_difference


@dataclass
class SegmentationResult:
    ink: np.ndarray  # final ink segmentation
    parchment: np.ndarray  # final parchment segmentation (superset of ink)
    timing: dict  # stage name -> elapsed seconds, plus "total"
    intermediates: dict | None = None  # raw masks, kept only on request


def _timed(timing, stage, fn, *args, **kwargs):
    start = time.perf_counter()
    try:
        out = fn(*args, **kwargs)
    except MtemError as e:
        raise PipelineStageError(stage, e) from e
    timing[stage] = time.perf_counter() - start
    return out


def segment(i1, i12, spec, weight=1.0, keep_intermediates=False, refine_contours=True):
    """Segment one fragment from its first and last band.

    `refine_contours=False` skips the contour-cleaning stage and feeds the raw
    thresholded contours to the ink fill; it exists for the noisy-contour
    ablation and is not the production path.
    """
    i1 = np.asarray(i1)
    i12 = np.asarray(i12)
    if i1.shape != i12.shape:
        raise ValidationError(f"band shapes differ: {i1.shape} vs {i12.shape}")

    timing = {}
    total_start = time.perf_counter()
    diff = _timed(timing, "band_difference", band_difference, i12, i1)
    m_parchment = _timed(timing, "threshold_parchment", threshold.threshold_parchment, diff, spec)
    m_ink = _timed(timing, "threshold_ink", threshold.threshold_ink, i1, diff, spec)
    m_contour = _timed(timing, "threshold_contour", threshold.threshold_contour, i1, diff, spec)
    m_other = _timed(timing, "other_mask", threshold.other_mask, m_parchment, m_ink, m_contour)
    if refine_contours:
        m_clean = _timed(
            timing, "clean_contours",
            energymin.clean_contours, m_contour, m_parchment, m_other, weight,
        )
    else:
        m_clean = m_contour
        timing["clean_contours"] = 0.0
    ink = _timed(timing, "fill_ink", energymin.fill_ink, m_parchment, m_clean, weight)
    parchment = m_parchment | ink
    timing["total"] = time.perf_counter() - total_start

    intermediates = None
    if keep_intermediates:
        intermediates = {
            "parchment_raw": m_parchment,
            "ink_raw": m_ink,
            "contour_raw": m_contour,
            "other": m_other,
            "contour_clean": m_clean,
        }
    return SegmentationResult(
        ink=ink, parchment=parchment, timing=timing, intermediates=intermediates
    )


def compose_rgb(result):
    """Render a segmentation as RGB: ink red, parchment green, background blue."""
    ink = np.asarray(result.ink, dtype=bool)
    parchment = np.asarray(result.parchment, dtype=bool)
    out = np.zeros(ink.shape + (3,), dtype=np.uint8)
    out[..., 2] = 255  # background
    green = parchment & ~ink
    out[green, 1] = 255
    out[green, 2] = 0
    out[ink, 0] = 255
    out[ink, 2] = 0
    return out
