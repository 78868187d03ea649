"""Batch command-line interface.

Exit codes: 0 ok, 2 io, 3 validation, 4 degenerate-data. Errors print a
machine-readable `error:<category>: <message>` line on stderr. Primary
outputs are byte-reproducible for identical inputs and flags; timing files
are the only exception.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from . import baselines, evaluate, pipeline, synthgen
from .calibrate import ThresholdSpec, derive_thresholds, parse_annotation, spectral_profile
from .errors import InputError, MtemError
from .imageio import (BandStack, gamma_normalize, load_mask, load_raster16,
                      load_rgb, write_mask, write_rgb)

log = logging.getLogger("mtem")


def _setup_logging():
    level = os.environ.get("MTEM_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")


def _load_annotation(path, five_class=False):
    return parse_annotation(load_rgb(path), five_class=five_class)


def _cmd_normalize(args):
    raster = load_raster16(args.band)
    out, degenerate = gamma_normalize(raster, gamma=args.gamma)
    if degenerate:
        log.warning("constant input image, output is all zeros")
    from PIL import Image

    Image.fromarray(out, mode="L").save(args.output, format="PNG")
    print(f"wrote {args.output}" + (" (degenerate input)" if degenerate else ""))
    return 0


def _cmd_profile(args):
    bands = BandStack.from_dir(args.band_dir)
    gt = _load_annotation(args.gt, five_class=args.five_class)
    profile = spectral_profile(
        bands, gt, samples_per_region=args.samples, seed=args.seed,
        contour_thickness=args.thickness,
    )
    with open(args.output, "w") as f:
        f.write(profile.to_csv())
    print(f"wrote {args.output} ({len(profile.regions)} regions)")
    return 0


def _cmd_calibrate(args):
    bands = BandStack.from_dir(args.band_dir)
    gt = _load_annotation(args.gt)
    spec = derive_thresholds(bands, gt, n=args.n, thickness=args.thickness, seed=args.seed)
    spec.save(args.output)
    print(f"wrote {args.output}")
    return 0


def _cmd_segment(args):
    i1 = load_raster16(args.band1)
    i12 = load_raster16(args.band12)
    spec = ThresholdSpec.load(args.spec)
    result = pipeline.segment(
        i1, i12, spec, weight=args.weight, keep_intermediates=args.debug_masks,
        refine_contours=not args.noisy_contours,
    )
    os.makedirs(args.output, exist_ok=True)
    write_rgb(pipeline.compose_rgb(result), os.path.join(args.output, "segmentation.png"))
    write_mask(result.ink, os.path.join(args.output, "ink_mask.png"))
    write_mask(result.parchment, os.path.join(args.output, "parchment_mask.png"))
    if args.debug_masks:
        for name, mask in result.intermediates.items():
            write_mask(mask, os.path.join(args.output, f"debug_{name}.png"))
        _dump_data_costs(result.intermediates, args.output)
    timing = {
        "pixels": int(np.asarray(i1).size),
        "seconds_total": result.timing["total"],
        "seconds_per_stage": {k: v for k, v in result.timing.items() if k != "total"},
    }
    with open(os.path.join(args.output, "timing.json"), "w") as f:
        json.dump(timing, f, indent=2)
        f.write("\n")
    print(f"wrote {args.output} ({timing['seconds_total']:.2f}s)")
    return 0


def _dump_data_costs(intermediates, out_dir):
    """Write the ink-fill stage's data-cost rasters as scaled 8-bit PNGs."""
    from PIL import Image

    from .energymin import distance_transform

    costs = {
        "cost_parchment": intermediates["parchment_raw"],
        "cost_contour": intermediates["contour_clean"],
    }
    for name, seed in costs.items():
        if not seed.any():
            continue
        dist = distance_transform(seed)
        top = dist.max()
        scaled = (dist / top * 255.0) if top > 0 else dist
        img = np.floor(scaled + 0.5).astype(np.uint8)
        Image.fromarray(img, mode="L").save(
            os.path.join(out_dir, f"debug_{name}.png"), format="PNG"
        )


def _cmd_baseline(args):
    raster = load_raster16(args.band12)
    meta = {"method": args.method, "input": args.band12, "input_kind": "raw 16-bit band"}
    if args.method == "otsu":
        t, mask = baselines.otsu(raster)
        meta["threshold"] = t
    elif args.method == "sauvola":
        mask = baselines.sauvola(raster, window=args.window, k=args.k)
        meta.update(window=args.window, k=args.k)
    else:  # and-combination
        t, otsu_mask = baselines.otsu(raster)
        sauvola_mask = baselines.sauvola(raster, window=args.window, k=args.k)
        mask = baselines.combine_and(otsu_mask, sauvola_mask)
        meta.update(threshold=t, window=args.window, k=args.k)
    write_mask(mask, args.output)
    meta["foreground_fraction"] = float(np.mean(mask))
    with open(os.path.splitext(args.output)[0] + ".json", "w") as f:
        json.dump(meta, f, indent=2)
        f.write("\n")
    print(f"wrote {args.output}")
    return 0


def _cmd_evaluate(args):
    ink_path = os.path.join(args.pred_dir, "ink_mask.png")
    parchment_path = os.path.join(args.pred_dir, "parchment_mask.png")
    for p in (ink_path, parchment_path):
        if not os.path.isfile(p):
            raise InputError(f"prediction mask missing: {p}")
    gt = _load_annotation(args.gt)
    ink_report, parchment_report = evaluate.evaluate_masks(
        load_mask(ink_path), load_mask(parchment_path), gt
    )
    report = {"ink": ink_report.to_dict(), "parchment": parchment_report.to_dict()}
    with open(args.output, "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
    print(evaluate.format_table([
        ("Ink", ink_report.iou, ink_report.precision, ink_report.recall, ink_report.f1),
        ("Parchment", parchment_report.iou, parchment_report.precision,
         parchment_report.recall, parchment_report.f1),
    ]))
    return 0


def _generate_one(task):
    spec_json, out_dir = task
    synthgen.write_fragment(synthgen.SynthSpec.from_json(spec_json), out_dir)
    return out_dir


def _cmd_synth(args):
    if args.spec:
        with open(args.spec) as f:
            spec = synthgen.SynthSpec.from_json(f.read())
    else:
        spec = synthgen.SynthSpec(seed=args.seed)
    if args.count == 1:
        synthgen.write_fragment(spec, args.output)
        print(f"wrote {args.output}")
        return 0
    tasks = []
    for i in range(args.count):
        sub = synthgen.SynthSpec.from_json(spec.to_json())
        sub.seed = spec.seed + i
        tasks.append((sub.to_json(), os.path.join(args.output, f"fragment_{i:03d}")))
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for out_dir in pool.map(_generate_one, tasks):
                log.info("generated %s", out_dir)
    else:
        for task in tasks:
            _generate_one(task)
    print(f"wrote {args.count} fragments under {args.output}")
    return 0


def _parse_sizes(text):
    sizes = []
    for token in text.split(","):
        token = token.strip().lower()
        factor = 1
        if token.endswith("k"):
            factor, token = 1_000, token[:-1]
        elif token.endswith("m"):
            factor, token = 1_000_000, token[:-1]
        try:
            sizes.append(int(float(token) * factor))
        except ValueError:
            raise InputError(f"bad size token: {token!r}")
    return sizes


def _cmd_bench(args):
    rows = evaluate.bench_timing(_parse_sizes(args.sizes), seed=args.seed)
    with open(args.output, "w") as f:
        f.write(evaluate.timing_csv(rows))
    for pixels, seconds in rows:
        print(f"{pixels} px: {seconds:.3f}s")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="mtem",
        description="Segment ink and parchment in multispectral fragment images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("normalize", help="gamma-normalize a 16-bit band to 8-bit")
    p.add_argument("band")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--gamma", type=float, default=2.2)
    p.set_defaults(func=_cmd_normalize)

    p = sub.add_parser("profile", help="per-region spectral statistics as CSV")
    p.add_argument("band_dir")
    p.add_argument("gt")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--samples", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--thickness", type=int, default=3)
    p.add_argument("--five-class", action="store_true")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("calibrate", help="derive percentile thresholds from an annotation")
    p.add_argument("band_dir")
    p.add_argument("gt")
    p.add_argument("-n", type=float, default=10.0)
    p.add_argument("--thickness", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("segment", help="run the full segmentation on a band pair")
    p.add_argument("band1")
    p.add_argument("band12")
    p.add_argument("--spec", required=True)
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--debug-masks", action="store_true")
    p.add_argument("--noisy-contours", action="store_true",
                   help="skip contour cleaning (ablation)")
    p.set_defaults(func=_cmd_segment)

    p = sub.add_parser("baseline", help="Otsu / Sauvola / AND binarization of one band")
    p.add_argument("method", choices=["otsu", "sauvola", "and"])
    p.add_argument("band12")
    p.add_argument("--window", type=int, default=31)
    p.add_argument("--k", type=float, default=0.2)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_baseline)

    p = sub.add_parser("evaluate", help="score predicted masks against an annotation")
    p.add_argument("pred_dir")
    p.add_argument("gt")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("synth", help="generate synthetic fragments")
    p.add_argument("--spec")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("bench", help="pipeline timing across synthetic sizes")
    p.add_argument("--sizes", default="250k,1m,4m")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv=None):
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MtemError as e:
        print(f"error:{e.category}: {e}", file=sys.stderr)
        return e.exit_code
    except FileNotFoundError as e:
        print(f"error:io: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
