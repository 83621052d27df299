"""Timing comparison of the python and compiled kernel backends.

Runs the hot paths (drift evaluation, X4 bracket evaluation, RK4 stepping,
and the stratum-classification inner loop) against both backends and
prints a table of per-call medians with the compiled speedup.

Usage: python benchmarks/bench_backends.py [--repeats N]
"""

import argparse
import math
import statistics
import time

import numpy as np

import pidp._kernels_py as kpy

try:
    import pidp._kernels_cy as kcy
except ImportError:
    kcy = None

PARAMS = (1.0, 1.0, 1.0, 1.0, 10.0)


def sample_states(n: int) -> np.ndarray:
    rng = np.random.Generator(np.random.PCG64(7))
    thetas = rng.uniform(-math.pi, math.pi, size=(n, 2))
    omegas = rng.uniform(-3.0, 3.0, size=(n, 2))
    return np.hstack([thetas, omegas])


def bench_drift(mod, states):
    for z in states:
        mod.drift(*PARAMS, z)


def bench_x4(mod, states):
    for z in states:
        mod.field_value(*PARAMS, 4, z)


def bench_rk4(mod, states):
    z0 = np.array([math.pi - 0.1, math.pi, 0.0, 0.0])
    mod.rk4_control_steps(*PARAMS, z0, 0.0, 1e-3, 10_000, 1e6)


def bench_classify(mod, states):
    for z in states:
        mod.stratum_dets(*PARAMS, z)
        mod.leaf_matrix(*PARAMS, z)


TASKS = [
    ("drift eval x2000", bench_drift, 2000),
    ("X4 eval x500", bench_x4, 500),
    ("RK4 10k steps", bench_rk4, 1),
    ("classify+rank x500", bench_classify, 500),
]


def median_time(fn, mod, states, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(mod, states)
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=5, help="timing repeats per task")
    args = ap.parse_args()

    backends = [("python", kpy)]
    if kcy is not None:
        backends.append(("compiled", kcy))
    else:
        print("compiled backend not importable; timing python only")

    header = f"{'task':<22}" + "".join(f"{name:>14}" for name, _ in backends)
    if kcy is not None:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, fn, n in TASKS:
        states = sample_states(n)
        row = f"{label:<22}"
        medians = []
        for _, mod in backends:
            m = median_time(fn, mod, states, args.repeats)
            medians.append(m)
            row += f"{m * 1e3:>12.2f}ms"
        if len(medians) == 2 and medians[1] > 0.0:
            row += f"{medians[0] / medians[1]:>9.1f}x"
        print(row)


if __name__ == "__main__":
    main()
