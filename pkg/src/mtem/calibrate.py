"""Calibration: percentile thresholds and spectral profiles from one annotated fragment.

Ground truth is an RGB annotation (ink red, parchment green, background blue;
optionally hole cyan and rice yellow for five-class profile plots). Thresholds
are [P_n, P_100-n] percentile ranges of the band-1 intensity and the band-12
minus band-1 difference, taken over the annotated region pixels.
"""

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, ValidationError
from .imageio import band_difference

# Region labels. The three-class encoding folds holes and rice into background.
BACKGROUND = 0
PARCHMENT = 1
INK = 2
HOLE = 3
RICE = 4

REGION_NAMES = {
    INK: "Ink",
    PARCHMENT: "Parchment",
    BACKGROUND: "Background",
    HOLE: "Hole",
    RICE: "Rice",
}

# Pure annotation colors, listed in tie-break priority order.
_COLOR_PRIORITY_3 = ((INK, (255, 0, 0)), (PARCHMENT, (0, 255, 0)), (BACKGROUND, (0, 0, 255)))
_COLOR_PRIORITY_5 = _COLOR_PRIORITY_3 + ((HOLE, (0, 255, 255)), (RICE, (255, 255, 0)))

REGION_COLORS = {label: color for label, color in _COLOR_PRIORITY_5}


def parse_annotation(rgb, five_class=False):
    """Map an RGB annotation to per-pixel region labels.

    Each pixel takes the label of the nearest pure color (JPEG annotations are
    not bit-exact); distance ties resolve in the order ink > parchment >
    background (> hole > rice).
    """
    rgb = np.asarray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValidationError(f"annotation must be HxWx3, got shape {rgb.shape}")
    palette = _COLOR_PRIORITY_5 if five_class else _COLOR_PRIORITY_3
    px = rgb.astype(np.int32)
    dist = np.stack(
        [((px - np.array(c, dtype=np.int32)) ** 2).sum(axis=2) for _, c in palette], axis=0
    )
    # argmin returns the first minimum, which is the priority order above
    nearest = np.argmin(dist, axis=0)
    labels = np.empty(rgb.shape[:2], dtype=np.uint8)
    for idx, (label, _) in enumerate(palette):
        labels[nearest == idx] = label
    return labels


def region_color_image(labels):
    """Render a label map back to its RGB annotation encoding."""
    labels = np.asarray(labels)
    out = np.zeros(labels.shape + (3,), dtype=np.uint8)
    for label, color in REGION_COLORS.items():
        out[labels == label] = color
    return out


def extract_ink_contour(ink, thickness):
    """Inner boundary of an ink mask.

    Keeps exactly the ink pixels whose Chebyshev distance to the nearest
    non-ink pixel is <= thickness; anything beyond the image border counts as
    non-ink, so a lone ink pixel is its own contour.
    """
    if thickness < 1:
        raise ValidationError(f"contour thickness must be >= 1, got {thickness}")
    ink = np.asarray(ink, dtype=bool)
    # Erode with a (2t+1)^2 square via two 1-D running-min passes (zero padded);
    # survivors are deeper than `thickness`, the rest is the contour band.
    core = ink
    for axis in (0, 1):
        padded = np.zeros(
            (core.shape[0] + (2 * thickness if axis == 0 else 0),
             core.shape[1] + (2 * thickness if axis == 1 else 0)),
            dtype=bool,
        )
        if axis == 0:
            padded[thickness:thickness + core.shape[0], :] = core
            stack = [padded[k:k + core.shape[0], :] for k in range(2 * thickness + 1)]
        else:
            padded[:, thickness:thickness + core.shape[1]] = core
            stack = [padded[:, k:k + core.shape[1]] for k in range(2 * thickness + 1)]
        core = np.logical_and.reduce(stack)
    return ink & ~core


def percentile(values, n):
    """Linear-interpolation percentile on zero-based (N-1) ranks."""
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValidationError("percentile of empty input")
    if not 0 <= n <= 100:
        raise ValidationError(f"percentile parameter must be in [0, 100], got {n}")
    v = np.sort(values)
    rank = (n / 100.0) * (v.size - 1)
    j = int(np.floor(rank))
    if j >= v.size - 1:
        return float(v[-1])
    frac = rank - j
    return float(v[j] + frac * (v[j + 1] - v[j]))


def _range_of(values, n):
    return percentile(values, n), percentile(values, 100 - n)


@dataclass
class ThresholdSpec:
    """Calibrated intensity ranges per region per feature.

    Feature 1 is the band-1 intensity, feature D the band-12 minus band-1
    difference. Ranges are inclusive (lo, hi) pairs.
    """

    n: float
    contour_thickness: int
    parchment_d: tuple
    ink_i1: tuple
    ink_d: tuple
    contour_i1: tuple
    contour_d: tuple
    seed: int = 0

    def __post_init__(self):
        # n = 0 is the degenerate min/max calibration; useful for tests
        if not 0 <= self.n < 50:
            raise ValidationError(f"percentile parameter must be in [0, 50), got {self.n}")
        for name in ("parchment_d", "ink_i1", "ink_d", "contour_i1", "contour_d"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValidationError(f"{name}: lo {lo} > hi {hi}")

    def to_json(self):
        return json.dumps(
            {
                "n": self.n,
                "contour_thickness": self.contour_thickness,
                "parchment_D": list(self.parchment_d),
                "ink_I1": list(self.ink_i1),
                "ink_D": list(self.ink_d),
                "contour_I1": list(self.contour_i1),
                "contour_D": list(self.contour_d),
                "seed": self.seed,
            },
            indent=2,
        )

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        try:
            return cls(
                n=d["n"],
                contour_thickness=d["contour_thickness"],
                parchment_d=tuple(d["parchment_D"]),
                ink_i1=tuple(d["ink_I1"]),
                ink_d=tuple(d["ink_D"]),
                contour_i1=tuple(d["contour_I1"]),
                contour_d=tuple(d["contour_D"]),
                seed=d.get("seed", 0),
            )
        except KeyError as e:
            raise ValidationError(f"threshold spec missing field {e}") from e

    def save(self, path):
        with open(path, "w") as f:
            f.write(self.to_json() + "\n")

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_json(f.read())


MIN_REGION_PIXELS = 100


def derive_thresholds(bands, gt, n=10.0, thickness=3, seed=0):
    """Calibrate percentile threshold ranges from an annotated band stack.

    Parchment gets a range on the band difference D; ink and ink contours get
    joint ranges on band-1 intensity and D. Contours are extracted from the
    annotated ink mask at the given thickness.
    """
    gt = np.asarray(gt)
    if gt.shape != bands.shape:
        raise ValidationError(f"annotation shape {gt.shape} != band shape {bands.shape}")
    diff = band_difference(bands.last, bands.first)
    i1 = bands.first

    parchment = gt == PARCHMENT
    ink = gt == INK
    for name, mask in (("Parchment", parchment), ("Ink", ink)):
        count = int(mask.sum())
        if count < MIN_REGION_PIXELS:
            raise DegenerateDataError(
                f"{name} has {count} annotated pixels, need >= {MIN_REGION_PIXELS}"
            )
    contour = extract_ink_contour(ink, thickness)

    return ThresholdSpec(
        n=n,
        contour_thickness=thickness,
        parchment_d=_range_of(diff[parchment], n),
        ink_i1=_range_of(i1[ink], n),
        ink_d=_range_of(diff[ink], n),
        contour_i1=_range_of(i1[contour], n),
        contour_d=_range_of(diff[contour], n),
        seed=seed,
    )


@dataclass
class SpectralProfile:
    """Per-region per-band mean/std over randomly sampled pixels."""

    regions: dict  # name -> {"mean": [12], "std": [12], "count": int}

    def to_csv(self):
        lines = ["region,band,mean,std"]
        for name, entry in self.regions.items():
            for band in range(12):
                lines.append(
                    f"{name},{band + 1},{entry['mean'][band]:.4f},{entry['std'][band]:.4f}"
                )
        return "\n".join(lines) + "\n"


def spectral_profile(bands, gt, samples_per_region=2000, seed=0, contour_thickness=3,
                     require=()):
    """Sample region pixels and report their mean/std per band.

    Regions come from the label map (three or five classes); an extra
    "InkContour" row profiles the inner ink boundary. Regions named in
    `require` must be present or the call fails; others are profiled when
    nonempty. Sampling is uniform without replacement with a seeded RNG, so a
    fixed seed reproduces the profile exactly.
    """
    gt = np.asarray(gt)
    if gt.shape != bands.shape:
        raise ValidationError(f"annotation shape {gt.shape} != band shape {bands.shape}")
    if samples_per_region < 1:
        raise ValidationError("samples_per_region must be >= 1")
    rng = np.random.default_rng(seed)

    masks = {}
    for label in (INK, PARCHMENT, BACKGROUND, HOLE, RICE):
        m = gt == label
        if m.any():
            masks[REGION_NAMES[label]] = m
    ink = gt == INK
    if ink.any():
        masks["InkContour"] = extract_ink_contour(ink, contour_thickness)
    for name in require:
        if name not in masks:
            raise DegenerateDataError(f"requested region {name} absent from annotation")

    stack = np.stack([b.astype(np.float64) for b in bands.bands], axis=0)
    regions = {}
    for name in ("Ink", "Parchment", "Background", "Hole", "Rice", "InkContour"):
        if name not in masks:
            continue
        ys, xs = np.nonzero(masks[name])
        count = min(samples_per_region, ys.size)
        pick = rng.choice(ys.size, size=count, replace=False)
        sample = stack[:, ys[pick], xs[pick]]
        regions[name] = {
            "mean": sample.mean(axis=1).tolist(),
            "std": sample.std(axis=1).tolist(),
            "count": count,
        }
    return SpectralProfile(regions=regions)
