#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from dbwire._kernels import _fallback

try:
    from dbwire._kernels import _native
except ImportError:
    _native = None


def time_call(fn, args, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def scan_args(rng, n):
    return (rng.uniform(-6, 6, n), rng.uniform(-6, 6, n),
            rng.uniform(-0.3, 2.5, n), 0.05, -0.45, 0.005, 181, 0.3, 5.0)


def render_args(rng, width, height, nboxes):
    base = np.array([[0, 0, 1.0], [-1, 0, 0], [0, -1, 0]])
    boxes = []
    for i in range(nboxes):
        cx, cy, cz = 1.5 + i, rng.uniform(-2, 2), rng.uniform(0.3, 0.9)
        sx, sy, sz = rng.uniform(0.2, 0.8, 3)
        boxes.append([cx - sx / 2, cy - sy / 2, cz - sz / 2,
                      cx + sx / 2, cy + sy / 2, cz + sz / 2])
    return (np.array([0.4, 0.0, 0.6]), base, width / 2, width / 2,
            width / 2, height / 2, width, height, np.array(boxes),
            0.0, 0.3, 5.0)


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()
    rng = np.random.default_rng(0)

    cases = [
        ("scan 500 pts", "scan_accumulate", scan_args(rng, 500)),
        ("scan 50k pts", "scan_accumulate", scan_args(rng, 50_000)),
        ("render 160x120, 4 boxes", "render_depth",
         render_args(rng, 160, 120, 4)),
        ("render 424x240, 8 boxes", "render_depth",
         render_args(rng, 424, 240, 8)),
    ]

    print(f"{'case':28s} {'python':>12s} {'native':>12s} {'speedup':>9s}")
    for name, fn_name, call_args in cases:
        py = time_call(getattr(_fallback, fn_name), call_args, args.repeats)
        if _native is None:
            print(f"{name:28s} {py * 1e3:10.2f}ms {'n/a':>12s} {'-':>9s}")
            continue
        nat = time_call(getattr(_native, fn_name), call_args, args.repeats)
        print(f"{name:28s} {py * 1e3:10.2f}ms {nat * 1e3:10.2f}ms "
              f"{py / nat:8.1f}x")
    if _native is None:
        print("\nnative kernels not built; pip install -e . to compile them")


if __name__ == "__main__":
    main()
