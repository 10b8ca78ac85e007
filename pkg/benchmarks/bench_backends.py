#!/usr/bin/env python3
"""Benchmark the compiled core against the NumPy fallback.

Times the two hot kernels on representative workloads: the RK4 charge
integrator (50 source periods at 2000 samples per period) and the 1-D FDTD
stepper (the sensor grid at 20 cells per slab for a few periods).

Run: python benchmarks/bench_backends.py
"""

import math
import time

import numpy as np

from tvcap import _fallback
from tvcap.constants import C0, ETA0

try:
    from tvcap import _core
except ImportError:
    _core = None


def time_call(fn, *args, repeat=3, **kwargs):
    best = math.inf
    for _ in range(repeat):
        start = time.perf_counter()
        fn(*args, **kwargs)
        best = min(best, time.perf_counter() - start)
    return best


def rk4_workload(periods=50, spp=2000):
    f0 = 1e6
    dt = 1.0 / (f0 * spp)
    n = periods * spp
    t_half = 0.5 * dt * np.arange(2 * n + 1)
    c = 1e-9 * (1.0 + 0.4 * np.cos(2 * math.pi * f0 * t_half))
    a = 1.0 / (10.0 * c)
    b = (6.0 + np.cos(2 * math.pi * f0 * t_half)) / 10.0
    return (a, b, 6e-9, dt, 1e6)


def fdtd_workload(periods=2, cells=20):
    f0 = 1e11
    lam = C0 / f0
    dx = lam / 400 / cells
    dt = dx / C0
    pad = int(round(0.25 * lam / dx))
    n_lam = int(round(lam / dx))
    src = pad
    sheet = src + pad + n_lam
    n_nodes = sheet + n_lam + pad + 1
    eps = np.ones(n_nodes)
    eps[sheet:sheet + cells] = 151.7
    n_steps = int(round(periods / f0 / dt))
    omega = 2 * math.pi * f0
    t = dt * np.arange(n_steps)
    einc = 4.0 + np.sin(omega * t)
    hinc = -(4.0 + np.sin(omega * (t + 0.5 * dt + 0.5 * dx / C0))) / ETA0
    eps_tv = 1.0 + 150.0 * (1.0 + 0.5 * np.sin(omega * dt * np.arange(n_steps + 1)))
    probes = np.array([src + pad, sheet + n_lam], dtype=np.int64)
    return (eps, sheet - cells, sheet, eps_tv, sheet, 1e-3, src, einc, hinc,
            dt, dx, probes, n_steps)


def main():
    impls = [("numpy", _fallback)]
    if _core is not None:
        impls.append(("compiled", _core))
    else:
        print("compiled core not built; timing the NumPy fallback only")

    rk4_args = rk4_workload()
    n_rk4 = (len(rk4_args[0]) - 1) // 2
    fdtd_args = fdtd_workload()
    n_cells = len(fdtd_args[0])
    n_steps = fdtd_args[-1]

    print(f"rk4_charge: {n_rk4} steps")
    results = {}
    for name, impl in impls:
        results[name] = time_call(impl.rk4_charge, *rk4_args)
        print(f"  {name:>9}: {results[name] * 1e3:8.2f} ms")
    if len(results) == 2:
        print(f"  speedup: {results['numpy'] / results['compiled']:.1f}x")

    print(f"fdtd_run: {n_cells} nodes x {n_steps} steps")
    results = {}
    for name, impl in impls:
        results[name] = time_call(impl.fdtd_run, *fdtd_args, repeat=2)
        print(f"  {name:>9}: {results[name] * 1e3:8.2f} ms")
    if len(results) == 2:
        print(f"  speedup: {results['numpy'] / results['compiled']:.1f}x")


if __name__ == "__main__":
    main()
