"""Benchmark of the numba kernels against the pure-numpy fallback.

Run with `python -m speechbeam.bench`. Spawns a subprocess with
SPEECHBEAM_NO_NUMBA=1 for the fallback timings so both backends are measured
from a clean import.
"""

import json
import os
import subprocess
import sys
import time

import numpy as np


def _time_kernels(repeats=5):
    from . import kernels
    from .postfilter import GruStream, gru_infer
    from .weights_io import GruPostfilterWeights

    rng = np.random.default_rng(0)
    results = {"backend": kernels.backend_name()}

    # GRU inference: 2x512 on 200 frames of 514-dim features.
    weights = GruPostfilterWeights.zeros()
    for tensors in (weights.weight_ih, weights.weight_hh):
        for t in tensors:
            t += rng.standard_normal(t.shape).astype(np.float32) * 0.05
    features = rng.standard_normal((200, 514))
    gru_infer(features[:2], weights)  # warm up any JIT
    best = min(
        _timed(lambda: gru_infer(features, weights)) for _ in range(repeats)
    )
    results["gru_infer_200_frames_s"] = best

    # Delay-and-sum: 8 mics, 600 frames, 257 bins.
    specs = (rng.standard_normal((8, 600, 257))
             + 1j * rng.standard_normal((8, 600, 257)))
    taus = rng.uniform(-4, 4, size=8)
    kernels.das_frame(specs[:, 0, :], taus, 512)  # warm up
    def das_all():
        for l in range(specs.shape[1]):
            kernels.das_frame(specs[:, l, :], taus, 512)
    results["delay_and_sum_600_frames_s"] = min(_timed(das_all) for _ in range(repeats))
    return results


def _timed(fn):
    t0 = time.perf_counter()
    fn()
    return time.perf_counter() - t0


def main():
    if os.environ.get("_SPEECHBEAM_BENCH_CHILD"):
        print(json.dumps(_time_kernels()))
        return
    here = _time_kernels()
    env = dict(os.environ, SPEECHBEAM_NO_NUMBA="1", _SPEECHBEAM_BENCH_CHILD="1")
    child = subprocess.run(
        [sys.executable, "-m", "speechbeam.bench"],
        env=env, capture_output=True, text=True, check=True,
    )
    other = json.loads(child.stdout.strip().splitlines()[-1])
    print(f"{'kernel':<32}{here['backend']:>12}{other['backend']:>12}{'speedup':>10}")
    for key in ("gru_infer_200_frames_s", "delay_and_sum_600_frames_s"):
        ratio = other[key] / here[key] if here[key] else float("nan")
        print(f"{key:<32}{here[key]:>11.4f}s{other[key]:>11.4f}s{ratio:>9.2f}x")


if __name__ == "__main__":
    main()
