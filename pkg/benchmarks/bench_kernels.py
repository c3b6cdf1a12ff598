"""Time the numba kernels against the R22SDF_DISABLE_JIT=1 fallback.

Each backend runs in its own interpreter because the switch is read at
import time. Usage::

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _best(fn, repeat):
    fn()  # warm-up (JIT compile or cache load)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def worker(repeat, scale):
    from r22sdf import _accel
    from r22sdf.complex_mult import cmul3_batch
    from r22sdf.config import FFTConfig
    from r22sdf.digit_slicing import DEFAULT_SLICE, multiply_batch
    from r22sdf.sdf_pipeline import build_pipeline, run_frames

    rng = np.random.default_rng(0)
    n = int(200_000 * scale)
    a, b, c, d = (rng.integers(-2**15, 2**15, size=n) for _ in range(4))
    frames = list(rng.integers(-2**14, 2**14, size=(max(1, int(500 * scale)), 8, 2)))

    results = {
        "multiply_batch": (n, _best(lambda: multiply_batch(a, b, DEFAULT_SLICE), repeat)),
        "cmul3_batch": (n, _best(lambda: cmul3_batch(a, b, c, d, DEFAULT_SLICE), repeat)),
        "pipeline N=8": (
            len(frames) * 8,
            _best(lambda: run_frames(build_pipeline(FFTConfig()), frames), repeat),
        ),
    }
    print(json.dumps({"jit": _accel.USE_NUMBA, "results": results}))


def spawn(disable, repeat, scale):
    env = dict(os.environ)
    env.pop("R22SDF_DISABLE_JIT", None)
    if disable:
        env["R22SDF_DISABLE_JIT"] = "1"
    out = subprocess.run(
        [sys.executable, __file__, "--worker", "--repeat", str(repeat), "--scale", str(scale)],
        env=env, capture_output=True, text=True, check=True,
    )
    return json.loads(out.stdout)["results"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0, help="workload multiplier")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        worker(args.repeat, args.scale)
        return
    jit = spawn(False, args.repeat, args.scale)
    ref = spawn(True, args.repeat, args.scale)
    print(f"{'kernel':<16}{'items':>9}{'numba s':>11}{'fallback s':>12}{'speed-up':>10}")
    for name, (items, t_jit) in jit.items():
        t_ref = ref[name][1]
        print(f"{name:<16}{items:>9}{t_jit:>11.4f}{t_ref:>12.4f}{t_ref / t_jit:>9.1f}x")


if __name__ == "__main__":
    main()
