"""Ink and parchment segmentation for multispectral document fragment images."""

__version__ = "0.1.0"

from .calibrate import ThresholdSpec, derive_thresholds, parse_annotation, spectral_profile
from .energymin import SeedProblem, clean_contours, distance_transform, fill_ink, minimize
from .imageio import BandStack, band_difference, gamma_normalize, load_raster16
from .pipeline import SegmentationResult, compose_rgb, segment
from .synthgen import SynthSpec, generate

__all__ = [
    "BandStack",
    "SeedProblem",
    "SegmentationResult",
    "SynthSpec",
    "ThresholdSpec",
    "band_difference",
    "clean_contours",
    "compose_rgb",
    "derive_thresholds",
    "distance_transform",
    "fill_ink",
    "gamma_normalize",
    "generate",
    "load_raster16",
    "minimize",
    "parse_annotation",
    "segment",
    "spectral_profile",
]
