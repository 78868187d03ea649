"""Seeded two-label energy minimization and its two segmentation adaptations.

A SeedProblem labels every domain pixel A or B. The data cost of a label is
the exact Euclidean distance from the pixel to the nearest pixel of that
label's seed mask; the smoothness cost pays `smoothness_weight` for every
4-adjacent pair of domain pixels with different labels (pairs straddling the
domain boundary cost nothing). `minimize` returns a certified global optimum.

The two adaptations: `clean_contours` relabels the raw ink-contour mask
between the "other" regions and the parchment mask, keeping the
parchment-attracted pixels; `fill_ink` relabels the complement of the
parchment mask between parchment and the cleaned contours, which floods
stroke interiors (and anything fully enclosed by contours) into the ink
segmentation.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

from ._mincut import solve_binary_labeling
from .errors import DegenerateDataError, ValidationError

_FAR = 1e15  # sentinel for "no seed in this column yet"; any real distance is tiny


@njit(cache=True)
def _column_distances(seed):
    """1-D distance to the nearest seed within each column (FAR if none)."""
    h, w = seed.shape
    g = np.empty((h, w), np.float64)
    for x in range(w):
        d = _FAR
        for y in range(h):
            if seed[y, x]:
                d = 0.0
            elif d < _FAR:
                d += 1.0
            g[y, x] = d
        d = _FAR
        for y in range(h - 1, -1, -1):
            if seed[y, x]:
                d = 0.0
            elif d < _FAR:
                d += 1.0
            if d < g[y, x]:
                g[y, x] = d
    return g


@njit(cache=True)
def _squared_edt_rows(g):
    """Lower envelope of parabolas per row: exact squared Euclidean distances."""
    h, w = g.shape
    out = np.empty((h, w), np.float64)
    v = np.empty(w, np.int64)
    z = np.empty(w + 1, np.float64)
    big = 1e30
    for y in range(h):
        k = 0
        v[0] = 0
        z[0] = -big
        z[1] = big
        for q in range(1, w):
            fq = g[y, q] * g[y, q] + q * q
            while True:
                p = v[k]
                fp = g[y, p] * g[y, p] + p * p
                s = (fq - fp) / (2.0 * q - 2.0 * p)
                if s <= z[k]:
                    k -= 1
                else:
                    break
            k += 1
            v[k] = q
            z[k] = s
            z[k + 1] = big
        k = 0
        for q in range(w):
            while z[k + 1] < q:
                k += 1
            p = v[k]
            dq = q - p
            out[y, q] = dq * dq + g[y, p] * g[y, p]
    return out


def distance_transform(seed):
    """Exact Euclidean distance from every pixel center to the nearest seed pixel."""
    seed = np.asarray(seed, dtype=bool)
    if not seed.any():
        raise DegenerateDataError("distance transform of an empty seed mask")
    sq = _squared_edt_rows(_column_distances(seed))
    return np.sqrt(sq)


@dataclass
class SeedProblem:
    """Two-label problem: domain pixels choose between seed_a and seed_b attraction."""

    domain: np.ndarray
    seed_a: np.ndarray
    seed_b: np.ndarray
    smoothness_weight: float = 1.0

    def __post_init__(self):
        self.domain = np.asarray(self.domain, dtype=bool)
        self.seed_a = np.asarray(self.seed_a, dtype=bool)
        self.seed_b = np.asarray(self.seed_b, dtype=bool)
        if self.seed_a.shape != self.domain.shape or self.seed_b.shape != self.domain.shape:
            raise ValidationError("domain and seed masks must share dimensions")
        if not self.domain.any():
            raise ValidationError("empty domain")
        if not self.seed_a.any():
            raise ValidationError("empty seed_a")
        if not self.seed_b.any():
            raise ValidationError("empty seed_b")
        if self.smoothness_weight < 0:
            raise ValidationError("smoothness weight must be nonnegative")


@dataclass
class Labeling:
    """Result of `minimize`: per-domain-pixel labels plus the recomputed energy."""

    label_b: np.ndarray  # True where a domain pixel took label B; False elsewhere
    domain: np.ndarray
    achieved_energy: float


def labeling_energy(domain, cost_a, cost_b, label_b, weight):
    """Evaluate the energy definition directly for a given labeling."""
    domain = np.asarray(domain, dtype=bool)
    label_b = np.asarray(label_b, dtype=bool)
    data = np.where(label_b, cost_b, cost_a)
    total = float(data[domain].sum())
    for dy, dx in ((0, 1), (1, 0)):
        a = (slice(0, domain.shape[0] - dy), slice(0, domain.shape[1] - dx))
        b = (slice(dy, None), slice(dx, None))
        pair = domain[a] & domain[b]
        total += weight * float((pair & (label_b[a] != label_b[b])).sum())
    return total


def minimize(problem):
    """Solve a SeedProblem to global optimality.

    Seed distances are computed on the full grid and read at domain pixels,
    so a domain pixel lying on a seed has zero data cost for that label.
    The reported energy is re-evaluated from the returned labels with
    `labeling_energy`, independently of the solver's internal bookkeeping.
    """
    cost_a = distance_transform(problem.seed_a)
    cost_b = distance_transform(problem.seed_b)
    label_b = solve_binary_labeling(
        problem.domain, cost_a, cost_b, float(problem.smoothness_weight)
    )
    energy = labeling_energy(
        problem.domain, cost_a, cost_b, label_b, float(problem.smoothness_weight)
    )
    return Labeling(label_b=label_b, domain=problem.domain, achieved_energy=energy)


def clean_contours(contour_mask, parchment_mask, other, weight=1.0):
    """Strip noise from the raw ink-contour mask.

    Contour pixels are pulled toward the parchment mask (true contours hug
    the outer stroke boundary on parchment) and toward the "other" mask
    (noise sits inside background, hole, and rice regions); the
    parchment-attracted pixels survive. Result is a subset of the input mask.
    """
    contour_mask = np.asarray(contour_mask, dtype=bool)
    parchment_mask = np.asarray(parchment_mask, dtype=bool)
    other = np.asarray(other, dtype=bool)
    if parchment_mask.shape != contour_mask.shape or other.shape != contour_mask.shape:
        raise ValidationError("masks must share dimensions")
    if not parchment_mask.any() or not other.any():
        raise DegenerateDataError(
            "empty parchment mask or empty other mask: thresholding produced degenerate "
            "masks, check the calibration ranges against this image"
        )
    if not contour_mask.any():
        return np.zeros_like(contour_mask)
    labeling = minimize(
        SeedProblem(
            domain=contour_mask,
            seed_a=other,
            seed_b=parchment_mask,
            smoothness_weight=weight,
        )
    )
    return labeling.label_b & contour_mask


def fill_ink(parchment_mask, clean_contour_mask, weight=1.0):
    """Grow the ink segmentation from the cleaned contours.

    Everything outside the parchment mask competes between parchment
    attraction and contour attraction; the contour-attracted side becomes the
    ink segmentation. Disjoint from the parchment mask by construction.
    """
    parchment_mask = np.asarray(parchment_mask, dtype=bool)
    clean_contour_mask = np.asarray(clean_contour_mask, dtype=bool)
    if clean_contour_mask.shape != parchment_mask.shape:
        raise ValidationError("masks must share dimensions")
    if not clean_contour_mask.any():
        raise DegenerateDataError(
            "empty contour mask: no ink contours survived cleaning, nothing to segment"
        )
    domain = ~parchment_mask
    if not domain.any():
        return np.zeros_like(parchment_mask)
    labeling = minimize(
        SeedProblem(
            domain=domain,
            seed_a=parchment_mask,
            seed_b=clean_contour_mask,
            smoothness_weight=weight,
        )
    )
    return labeling.label_b & domain
