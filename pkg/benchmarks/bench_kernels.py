"""Time the compiled and pure-Python threshold kernels side by side.

    python3 benchmarks/bench_kernels.py [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

from fourphoton import kernels, optimize


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def bench(impl, repeat):
    rho, kappa = 0.1, 0.9
    grid = np.radians(np.arange(0.0, 180.0, 7.5))
    x0 = np.radians([70.0, 90.0, 180.0, 20.0])
    rows = {}
    rows["eta_grid 24^4"], _ = best_of(lambda: impl.eta_grid(grid, rho, kappa), repeat)
    rows["nelder_mead x1"], nm = best_of(
        lambda: impl.nelder_mead(x0, math.radians(7.5), rho, kappa, 1e-10, 1e-10, 4000), repeat
    )

    saved = {k: getattr(kernels, k) for k in ("eta_grid", "nelder_mead", "eta_objective", "ch_parts")}
    try:
        for k in saved:
            setattr(kernels, k, getattr(impl, k))
        rows["optimize_angles"], res = best_of(lambda: optimize.optimize_angles(rho, kappa), repeat)
    finally:
        for k, v in saved.items():
            setattr(kernels, k, v)
    return rows, nm[1], res.eta_min


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    found = kernels.backends()
    results = {name: bench(impl, args.repeat) for name, impl in found.items()}
    names = list(results)
    print(f"{'kernel':<18}" + "".join(f"{n:>12}" for n in names) + ("     speedup" if len(names) > 1 else ""))
    for row in results[names[0]][0]:
        t = [results[n][0][row] for n in names]
        line = f"{row:<18}" + "".join(f"{x * 1e3:>10.2f}ms" for x in t)
        if len(t) > 1:
            line += f"{t[0] / t[1]:>11.1f}x"
        print(line)
    for n in names:
        print(f"{n}: simplex f = {results[n][1]!r}, eta_min = {results[n][2]!r}")


if __name__ == "__main__":
    main()
