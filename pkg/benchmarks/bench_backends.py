"""Timing comparison of the compiled and pure-Python recurrence kernels.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Both implementations are imported directly (bypassing the LHSPHERE_KERNELS
selector) so a single process can time them side by side.  Workloads
mirror the two hot call patterns: full Bessel tables at moderate order
for real arguments (decay sweeps) and for complex arguments off the real
axis (root polishing).
"""

import time

import numpy as np

from lhsphere import _bessel_py
from lhsphere.backend import available_backends

try:
    from lhsphere import _bessel_cy
except ImportError:
    _bessel_cy = None


def time_call(fn, args_list, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for args in args_list:
            fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def workloads():
    rng = np.random.default_rng(7)
    real_args = [(40, float(z)) for z in rng.uniform(0.1, 30.0, 400)]
    complex_args = [(40, complex(re, im)) for re, im in
                    zip(rng.uniform(0.1, 30.0, 400),
                        rng.uniform(-2.0, 2.0, 400))]
    return [
        ("jn_array real n=40 x400", "jn_array", real_args),
        ("yn_array real n=40 x400", "yn_array", real_args),
        ("h1n_array real n=40 x400", "h1n_array", real_args),
        ("jn_array complex n=40 x400", "jn_array", complex_args),
        ("h1n_array complex n=40 x400", "h1n_array", complex_args),
    ]


def main():
    print(f"available backends: {', '.join(available_backends())}")
    if _bessel_cy is None:
        print("compiled extension not built; timing pure Python only")
    header = f"{'workload':34s} {'py [ms]':>10s}"
    if _bessel_cy is not None:
        header += f" {'cy [ms]':>10s} {'speedup':>8s}"
    print(header)
    for label, name, args_list in workloads():
        t_py = time_call(getattr(_bessel_py, name), args_list)
        line = f"{label:34s} {t_py * 1e3:10.2f}"
        if _bessel_cy is not None:
            t_cy = time_call(getattr(_bessel_cy, name), args_list)
            line += f" {t_cy * 1e3:10.2f} {t_py / t_cy:7.1f}x"
        print(line)


if __name__ == "__main__":
    main()
