"""Synthetic 12-band fragments with exact ground truth.

A fragment is an irregular parchment blob on dark background, carrying glyph
strokes (ink), punched holes, rice-tissue patches straddling the parchment
edge, darkened-parchment patches, a faint reflection halo just outside the
parchment boundary, and small ink-like residue specks scattered over
non-parchment areas. Every pixel's 12 band values come from its material's
spectral profile plus noise, so thresholds, masks, and metrics can be
validated against the generator's own labels.

Noise model: one spatially smooth broadband field shared by all bands (the
dominant component, exposure-like) plus small per-band white noise. Materials
respond to the broadband field through per-band gains: parchment responds
uniformly, so its band-12 minus band-1 difference is exact per material and
the calibrated parchment range transfers perfectly between fragments; ink and
its relatives respond with a gain that rises across bands, so their
difference feature varies smoothly and in step with their band-1 intensity.
Intensity variation is therefore spatially coherent, the way degradation
behaves on real material, rather than per-pixel salt-and-pepper.

Stroke borders blend toward parchment over two pixels, making true ink
contours spectrally intermediate. Residue specks share that intermediate
signature (contour-range noise); darkened patches and the edge halo sit just
above the contour range at the default percentile, which is what makes the
percentile choice measurable: tighter ranges lose contour coverage, looser
ranges admit the halo and flood.
"""

import json
import os
from dataclasses import dataclass, field, asdict

import numpy as np

from .calibrate import BACKGROUND, HOLE, INK, PARCHMENT, RICE, extract_ink_contour, \
    region_color_image
from .energymin import distance_transform
from .errors import DegenerateDataError, ValidationError
from .imageio import BandStack, write_rgb

# Material (value) classes; several map to the same ground-truth region.
(_BG, _PARCH, _INK, _HOLE, _RICE, _EDGE1, _EDGE2, _DARKENED, _HALO, _RESIDUE) = range(10)

MATERIALS = (
    "background", "parchment", "ink", "hole", "rice",
    "ink_edge_outer", "ink_edge_inner", "darkened_parchment", "edge_halo", "residue",
)


def _rising(flat, start_band, peak):
    """Profile flat through start_band, then rising linearly to peak at band 12."""
    vals = [flat] * 12
    steps = 12 - start_band
    for i in range(1, steps + 1):
        vals[start_band - 1 + i] = int(round(flat + (peak - flat) * i / steps))
    return vals


def _mix(a, b, frac):
    return [int(round((1 - frac) * x + frac * y)) for x, y in zip(a, b)]


_PARCH_MEANS = _rising(8000, 7, 45000)
_INK_MEANS = _rising(2500, 7, 6000)
_BG_MEANS = [2000] * 12

DEFAULT_MEANS = {
    "background": _BG_MEANS,
    "parchment": _PARCH_MEANS,
    "ink": _INK_MEANS,
    "hole": _rising(2500, 9, 9000),
    "rice": [30000] * 12,
    # stroke border pixels pick up a little parchment through the thin ink layer
    "ink_edge_outer": _mix(_INK_MEANS, _PARCH_MEANS, 0.03),
    "ink_edge_inner": _mix(_INK_MEANS, _PARCH_MEANS, 0.015),
    "darkened_parchment": _rising(2600, 7, 8280),
    "edge_halo": _mix(_BG_MEANS, _PARCH_MEANS, 0.1535),
    "residue": _rising(2616, 7, 6816),
}

# Broadband (shared-field) gain per band. The rising ramp for ink-like
# materials couples their band-1 and band-difference variation.
_FLAT_GAIN = [1.0] * 12
_RAMP_GAIN = [round(0.2 + 1.2182 * i / 11, 4) for i in range(12)]

DEFAULT_BROADBAND_GAINS = {
    "background": _FLAT_GAIN,
    "parchment": _FLAT_GAIN,
    "ink": _RAMP_GAIN,
    "hole": _FLAT_GAIN,
    "rice": _FLAT_GAIN,
    "ink_edge_outer": _RAMP_GAIN,
    "ink_edge_inner": _RAMP_GAIN,
    "darkened_parchment": _FLAT_GAIN,
    "edge_halo": _FLAT_GAIN,
    "residue": _RAMP_GAIN,
}

# Per-band white noise std per material. Parchment has none, which keeps its
# difference feature exact; darkened patches and the halo are deliberately
# narrow so their overlap with the contour range switches cleanly with the
# percentile parameter.
DEFAULT_WHITE_STDS = {
    "background": [150.0] * 12,
    "parchment": [0.0] * 12,
    "ink": [25.0] * 12,
    "hole": [150.0] * 12,
    "rice": [150.0] * 12,
    "ink_edge_outer": [25.0] * 12,
    "ink_edge_inner": [25.0] * 12,
    "darkened_parchment": [42.0] * 12,
    "edge_halo": [42.0] * 12,
    "residue": [25.0] * 12,
}

DEFAULT_BROADBAND_STD = 700.0
DEFAULT_BROADBAND_SMOOTH_PX = 5.0


@dataclass
class SynthSpec:
    """Everything needed to generate one fragment deterministically."""

    width: int = 512
    height: int = 512
    seed: int = 0
    means: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_MEANS.items()})
    white_stds: dict = field(
        default_factory=lambda: {k: list(v) for k, v in DEFAULT_WHITE_STDS.items()}
    )
    broadband_gains: dict = field(
        default_factory=lambda: {k: list(v) for k, v in DEFAULT_BROADBAND_GAINS.items()}
    )
    broadband_std: float = DEFAULT_BROADBAND_STD
    broadband_smooth_px: float = DEFAULT_BROADBAND_SMOOTH_PX
    parchment_blob_count: int = 1
    parchment_radius_frac: float = 0.38  # of min(width, height)
    glyph_count: int = 14
    stroke_width: int = 10
    hole_count: int = 10
    hole_radius: tuple = (4, 9)
    rice_count: int = 5
    rice_radius: int = 26
    darkened_count: int = 4
    darkened_radius: int = 12
    halo_width: int = 2
    residue_count: int = 12
    residue_radius: tuple = (1, 3)

    def __post_init__(self):
        if self.width < 32 or self.height < 32:
            raise ValidationError("fragment must be at least 32x32")
        for table, kind in ((self.means, "means"), (self.white_stds, "stds"),
                            (self.broadband_gains, "gains")):
            for name in MATERIALS:
                if name not in table:
                    raise ValidationError(f"missing {kind} for material {name}")
                if len(table[name]) != 12:
                    raise ValidationError(f"{name} needs 12 band {kind}")
        for name in MATERIALS:
            if not all(0 <= v <= 65535 for v in self.means[name]):
                raise ValidationError(f"{name} means must lie in [0, 65535]")
            if any(s < 0 for s in self.white_stds[name]):
                raise ValidationError(f"{name} stds must be nonnegative")
        if self.broadband_std < 0:
            raise ValidationError("broadband std must be nonnegative")

    def to_json(self):
        d = asdict(self)
        d["hole_radius"] = list(self.hole_radius)
        d["residue_radius"] = list(self.residue_radius)
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        for key in ("hole_radius", "residue_radius"):
            if key in d:
                d[key] = tuple(d[key])
        return cls(**d)

    @classmethod
    def scaled_to(cls, width, height, seed=0, **overrides):
        """Default layout rescaled to another image size (for benchmarks).

        Feature counts follow the area; feature sizes follow the linear scale
        (capped so huge rasters get more glyphs rather than giant ones).
        """
        f = (width * height) / (512.0 * 512.0)
        s = f ** 0.5
        params = dict(
            width=width,
            height=height,
            seed=seed,
            glyph_count=max(4, int(round(14 * f))),
            stroke_width=max(4, int(round(10 * min(s, 1.5)))),
            hole_count=max(2, int(round(10 * f))),
            rice_count=max(2, int(round(5 * min(f, 6.0)))),
            rice_radius=max(8, int(round(26 * min(s, 2.0)))),
            darkened_count=max(2, int(round(4 * f))),
            darkened_radius=max(5, int(round(12 * min(s, 2.0)))),
            residue_count=max(4, int(round(12 * f))),
        )
        params.update(overrides)
        return cls(**params)


def _smooth_field(rng, shape, sigma_px):
    """Unit-variance Gaussian field with spatial correlation length sigma_px."""
    white = rng.standard_normal(shape)
    if sigma_px <= 0.5:
        return white
    fy = np.fft.fftfreq(shape[0])[:, None]
    fx = np.fft.rfftfreq(shape[1])[None, :]
    transfer = np.exp(-2.0 * np.pi ** 2 * sigma_px ** 2 * (fy ** 2 + fx ** 2))
    smooth = np.fft.irfft2(np.fft.rfft2(white) * transfer, s=shape)
    return smooth / smooth.std()


def _radial_blob(shape, center, radius, rng, harmonics=4, wiggle=0.18):
    """Star-convex blob: radius modulated by a few random Fourier harmonics."""
    h, w = shape
    cy, cx = center
    ys = np.arange(h)[:, None] - cy
    xs = np.arange(w)[None, :] - cx
    rho = np.hypot(ys, xs)
    theta = np.arctan2(ys, xs)
    r = np.full(theta.shape, float(radius))
    for k in range(2, 2 + harmonics):
        amp = rng.uniform(-wiggle, wiggle) / harmonics * radius
        phase = rng.uniform(0, 2 * np.pi)
        r += amp * np.cos(k * theta + phase)
    return rho <= r


def _disk(shape, center, radius):
    h, w = shape
    ys = np.arange(h)[:, None] - center[0]
    xs = np.arange(w)[None, :] - center[1]
    return ys * ys + xs * xs <= radius * radius


def _stroke_mask(shape, points, width):
    """Pixels within width/2 of the polyline through `points`."""
    h, w = shape
    mask = np.zeros(shape, dtype=bool)
    half = width / 2.0
    pad = int(np.ceil(half)) + 1
    for (y0, x0), (y1, x1) in zip(points[:-1], points[1:]):
        ylo = max(0, int(min(y0, y1)) - pad)
        yhi = min(h, int(max(y0, y1)) + pad + 1)
        xlo = max(0, int(min(x0, x1)) - pad)
        xhi = min(w, int(max(x0, x1)) + pad + 1)
        ys = np.arange(ylo, yhi)[:, None]
        xs = np.arange(xlo, xhi)[None, :]
        dy, dx = y1 - y0, x1 - x0
        seg_sq = dy * dy + dx * dx
        if seg_sq == 0:
            t = np.zeros((yhi - ylo, xhi - xlo))
        else:
            t = np.clip(((ys - y0) * dy + (xs - x0) * dx) / seg_sq, 0.0, 1.0)
        dist_sq = (ys - (y0 + t * dy)) ** 2 + (xs - (x0 + t * dx)) ** 2
        mask[ylo:yhi, xlo:xhi] |= dist_sq <= half * half
    return mask


def _sample_point(rng, allowed):
    ys, xs = np.nonzero(allowed)
    if ys.size == 0:
        return None
    i = rng.integers(ys.size)
    return int(ys[i]), int(xs[i])


def generate(spec):
    """Generate one fragment.

    Returns (bands, labels3, labels5): the 12-band stack, the three-class
    ground truth (holes and rice fold into background), and the five-class
    map used for spectral-profile plots.
    """
    h, w = spec.height, spec.width
    rng = np.random.default_rng(spec.seed)
    material = np.full((h, w), _BG, dtype=np.uint8)

    # parchment blobs
    parchment = np.zeros((h, w), dtype=bool)
    base_r = spec.parchment_radius_frac * min(h, w)
    for _ in range(spec.parchment_blob_count):
        cy = h / 2 + rng.uniform(-0.02, 0.02) * h
        cx = w / 2 + rng.uniform(-0.02, 0.02) * w
        parchment |= _radial_blob((h, w), (cy, cx), base_r, rng)
    material[parchment] = _PARCH

    if spec.glyph_count > 0 and not parchment.any():
        raise DegenerateDataError("layout infeasible: glyphs requested but no parchment area")

    interior = distance_transform(~parchment) if parchment.any() else np.zeros((h, w))

    # glyph strokes, kept clear of the parchment edge so rice patches cannot reach them
    ink = np.zeros((h, w), dtype=bool)
    stroke_margin = spec.rice_radius + spec.stroke_width + 6
    allowed = interior >= stroke_margin
    if spec.glyph_count > 0 and not allowed.any():
        raise DegenerateDataError(
            "layout infeasible: parchment too small for glyphs at this margin"
        )
    for _ in range(spec.glyph_count):
        start = _sample_point(rng, allowed)
        if start is None:
            break
        points = [start]
        for _ in range(int(rng.integers(2, 4))):
            for _attempt in range(8):
                angle = rng.uniform(0, 2 * np.pi)
                length = rng.uniform(25, 55)
                ny = int(points[-1][0] + length * np.sin(angle))
                nx = int(points[-1][1] + length * np.cos(angle))
                if 0 <= ny < h and 0 <= nx < w and allowed[ny, nx]:
                    points.append((ny, nx))
                    break
        if len(points) >= 2:
            ink |= _stroke_mask((h, w), points, spec.stroke_width)
    ink &= parchment
    material[ink] = _INK

    stroke_dist = distance_transform(ink) if ink.any() else np.full((h, w), np.inf)

    # holes punched through the parchment, away from strokes
    for _ in range(spec.hole_count):
        r = int(rng.integers(spec.hole_radius[0], spec.hole_radius[1] + 1))
        ok = (interior >= r + 3) & (stroke_dist >= r + 14)
        center = _sample_point(rng, ok)
        if center is None:
            continue
        d = _disk((h, w), center, r)
        material[d & parchment & ~ink] = _HOLE

    # darkened parchment patches
    for _ in range(spec.darkened_count):
        r = spec.darkened_radius
        ok = (interior >= r + 2) & (stroke_dist >= r + 25) & (material == _PARCH)
        center = _sample_point(rng, ok)
        if center is None:
            continue
        blob = _radial_blob((h, w), center, r, rng, harmonics=3, wiggle=0.25)
        material[blob & (material == _PARCH)] = _DARKENED

    # rice patches straddling the parchment boundary
    boundary = parchment.copy()
    boundary[1:-1, 1:-1] &= ~(
        parchment[:-2, 1:-1] & parchment[2:, 1:-1] & parchment[1:-1, :-2] & parchment[1:-1, 2:]
    )
    rice_keepout = spec.rice_radius + spec.stroke_width
    for _ in range(spec.rice_count):
        ok = boundary & (stroke_dist >= rice_keepout)
        center = _sample_point(rng, ok)
        if center is None:
            continue
        blob = _radial_blob((h, w), center, spec.rice_radius, rng, harmonics=3, wiggle=0.22)
        material[blob & (material != _INK)] = _RICE

    # region semantics are fixed before the purely visual overlays
    region3 = np.full((h, w), BACKGROUND, dtype=np.uint8)
    region3[(material == _PARCH) | (material == _DARKENED)] = PARCHMENT
    region3[material == _INK] = INK
    region5 = region3.copy()
    region5[material == _HOLE] = HOLE
    region5[material == _RICE] = RICE

    # stroke borders blend toward parchment over 2 px
    edge1 = extract_ink_contour(ink, 1)
    edge2 = extract_ink_contour(ink, 2) & ~edge1
    material[edge1] = _EDGE1
    material[edge2] = _EDGE2

    # diffuse-reflection halo on background pixels hugging the parchment edge
    if spec.halo_width > 0 and parchment.any():
        outside_dist = distance_transform(parchment)
        halo = (material == _BG) & (outside_dist > 0) & (outside_dist <= spec.halo_width)
        material[halo] = _HALO

    # ink-like residue specks on background, holes, and rice
    if spec.residue_count > 0:
        parch_like = (material == _PARCH) | (material == _DARKENED)
        parch_dist = (
            distance_transform(parch_like) if parch_like.any() else np.full((h, w), np.inf)
        )
        speckable = (
            ((material == _BG) | (material == _HOLE) | (material == _RICE))
            & (parch_dist >= 5)
        )
        for _ in range(spec.residue_count):
            r = int(rng.integers(spec.residue_radius[0], spec.residue_radius[1] + 1))
            center = _sample_point(rng, speckable)
            if center is None:
                break
            d = _disk((h, w), center, r)
            material[d & speckable] = _RESIDUE

    # band synthesis: shared smooth broadband field + per-band white noise
    mean_table = np.array([spec.means[m] for m in MATERIALS], dtype=np.float64)
    gain_table = np.array([spec.broadband_gains[m] for m in MATERIALS], dtype=np.float64)
    white_table = np.array([spec.white_stds[m] for m in MATERIALS], dtype=np.float64)
    broadband = (
        spec.broadband_std * _smooth_field(rng, (h, w), spec.broadband_smooth_px)
        if spec.broadband_std > 0
        else np.zeros((h, w))
    )
    bands = []
    for b in range(12):
        vals = mean_table[material, b] + gain_table[material, b] * broadband
        stds = white_table[material, b]
        if (stds > 0).any():
            vals = vals + rng.standard_normal((h, w)) * stds
        bands.append(np.clip(np.rint(vals), 0, 65535).astype(np.uint16))

    return BandStack(bands), region3, region5


def write_fragment(spec, out_dir):
    """Generate and persist a fragment in the layout the pipeline consumes."""
    bands, region3, region5 = generate(spec)
    os.makedirs(out_dir, exist_ok=True)
    bands.write_dir(out_dir)
    write_rgb(region_color_image(region3), os.path.join(out_dir, "gt.png"))
    write_rgb(region_color_image(region5), os.path.join(out_dir, "gt5.png"))
    with open(os.path.join(out_dir, "synth.json"), "w") as f:
        f.write(spec.to_json() + "\n")
    return bands, region3, region5
