"""Confusion-based segmentation metrics and the timing benchmark.

Ink predictions are scored against annotated ink; parchment predictions are
scored against the union of annotated parchment and ink (the region scholars
actually want). Zero-denominator metrics report 0 and are flagged so
degenerate fragments cannot silently inflate batch averages; batch numbers
are unweighted per-fragment means (macro averages).
"""

import time
from dataclasses import dataclass

import numpy as np

from .calibrate import INK, PARCHMENT
from .errors import ValidationError


def confusion(pred, gt):
    """Pixel counts (tp, fp, fn, tn); foreground is the class of interest."""
    pred = np.asarray(pred, dtype=bool)
    gt = np.asarray(gt, dtype=bool)
    if pred.shape != gt.shape:
        raise ValidationError(f"dimension mismatch: {pred.shape} vs {gt.shape}")
    tp = int((pred & gt).sum())
    fp = int((pred & ~gt).sum())
    fn = int((~pred & gt).sum())
    tn = int((~pred & ~gt).sum())
    return tp, fp, fn, tn


@dataclass
class MetricsReport:
    class_name: str
    tp: int
    fp: int
    fn: int
    tn: int
    iou: float
    precision: float
    recall: float
    f1: float
    undefined: tuple = ()  # metrics that hit 0/0 and were pinned to 0

    def to_dict(self):
        return {
            "class": self.class_name,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "tn": self.tn,
            "iou": self.iou,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "undefined": list(self.undefined),
        }


def metrics(counts, class_name=""):
    """IoU, precision, recall, F1 from confusion counts; 0/0 -> 0, flagged."""
    tp, fp, fn, tn = counts
    if min(tp, fp, fn, tn) < 0:
        raise ValidationError("confusion counts must be nonnegative")
    undefined = []

    def ratio(num, den, name):
        if den == 0:
            undefined.append(name)
            return 0.0
        return num / den

    iou = ratio(tp, tp + fp + fn, "iou")
    precision = ratio(tp, tp + fp, "precision")
    recall = ratio(tp, tp + fn, "recall")
    f1 = ratio(2.0 * precision * recall, precision + recall, "f1")
    return MetricsReport(
        class_name=class_name, tp=tp, fp=fp, fn=fn, tn=tn,
        iou=iou, precision=precision, recall=recall, f1=f1,
        undefined=tuple(undefined),
    )


def evaluate_masks(ink_pred, parchment_pred, gt):
    """Score an (ink, parchment) mask pair against a region label map."""
    gt = np.asarray(gt)
    ink_report = metrics(confusion(ink_pred, gt == INK), class_name="Ink")
    parchment_gt = (gt == INK) | (gt == PARCHMENT)
    parchment_report = metrics(confusion(parchment_pred, parchment_gt), class_name="Parchment")
    return ink_report, parchment_report


def evaluate_run(result, gt):
    """Score a pipeline SegmentationResult against a region label map."""
    return evaluate_masks(result.ink, result.parchment, gt)


def mean_reports(reports, class_name):
    """Macro average over per-fragment reports (counts summed for reference)."""
    if not reports:
        raise ValidationError("no reports to average")
    return {
        "class": class_name,
        "fragments": len(reports),
        "iou": float(np.mean([r.iou for r in reports])),
        "precision": float(np.mean([r.precision for r in reports])),
        "recall": float(np.mean([r.recall for r in reports])),
        "f1": float(np.mean([r.f1 for r in reports])),
        "aggregation": "macro",
    }


def format_table(rows):
    """Aligned text table from (name, iou, precision, recall, f1) rows."""
    header = ("Method", "IoU", "Precision", "Recall", "F1-Score")
    name_width = max(len(header[0]), *(len(r[0]) for r in rows))
    lines = [
        f"{header[0]:<{name_width}}  {header[1]:>8}  {header[2]:>9}  {header[3]:>8}  {header[4]:>8}"
    ]
    for name, iou, precision, recall, f1 in rows:
        lines.append(
            f"{name:<{name_width}}  {iou:>8.4f}  {precision:>9.4f}  {recall:>8.4f}  {f1:>8.4f}"
        )
    return "\n".join(lines)


def bench_timing(sizes, seed=7, aspect=1.0):
    """Run the full pipeline on synthetic fragments of the given pixel counts.

    Thresholds are calibrated once on a default-size fragment, then each
    sized fragment is generated and segmented; only the segmentation is
    timed. Returns a list of (pixels, seconds) rows.
    """
    from . import synthgen
    from .calibrate import derive_thresholds

    for size in sizes:
        if size < 10_000:
            raise ValidationError(f"benchmark sizes must be >= 10000 pixels, got {size}")

    cal_spec = synthgen.SynthSpec(seed=seed)
    bands, gt, _ = synthgen.generate(cal_spec)
    thresholds = derive_thresholds(bands, gt, seed=seed)

    from .pipeline import segment

    rows = []
    for i, size in enumerate(sizes):
        height = int(round((size / aspect) ** 0.5))
        width = int(round(size / height))
        spec = synthgen.SynthSpec.scaled_to(width, height, seed=seed + 1 + i)
        bands, _, _ = synthgen.generate(spec)

        start = time.perf_counter()
        segment(bands.first, bands.last, thresholds)
        elapsed = time.perf_counter() - start
        rows.append((width * height, elapsed))
    return rows


def timing_csv(rows):
    return "pixels,seconds\n" + "\n".join(f"{p},{s:.6f}" for p, s in rows) + "\n"
