import time

import numpy as np
import pytest

from mtem import synthgen
from mtem.calibrate import derive_thresholds
from mtem.energymin import SeedProblem, minimize
from mtem.pipeline import segment

CAL_SEED = 100
HELDOUT_SEEDS = tuple(range(200, 210))


@pytest.fixture(scope="session")
def jit_warm():
    """Trigger numba compilation before anything is timed."""
    dom = np.zeros((3, 3), bool)
    dom[1, 1] = True
    sa = np.zeros((3, 3), bool)
    sa[0, 0] = True
    sb = np.zeros((3, 3), bool)
    sb[2, 2] = True
    minimize(SeedProblem(dom, sa, sb, 1.0))
    return True


@pytest.fixture(scope="session")
def calibration_fragment():
    spec = synthgen.SynthSpec(seed=CAL_SEED)
    bands, gt, gt5 = synthgen.generate(spec)
    return bands, gt, gt5


@pytest.fixture(scope="session")
def thresholds(calibration_fragment):
    bands, gt, _ = calibration_fragment
    return derive_thresholds(bands, gt, n=10, thickness=3)


@pytest.fixture(scope="session")
def heldout_fragments():
    out = []
    for seed in HELDOUT_SEEDS:
        bands, gt, _ = synthgen.generate(synthgen.SynthSpec(seed=seed))
        out.append((bands, gt))
    return out


@pytest.fixture(scope="session")
def pipeline_batch(jit_warm, calibration_fragment, thresholds, heldout_fragments):
    """Calibrate-once, segment the held-out batch; records its own wall time."""
    start = time.perf_counter()
    bands, gt, _ = calibration_fragment
    spec = derive_thresholds(bands, gt, n=10, thickness=3)
    runs = []
    for fr_bands, fr_gt in heldout_fragments:
        result = segment(fr_bands.first, fr_bands.last, spec, keep_intermediates=True)
        runs.append((result, fr_gt))
    elapsed = time.perf_counter() - start
    return {"thresholds": spec, "runs": runs, "elapsed": elapsed}
