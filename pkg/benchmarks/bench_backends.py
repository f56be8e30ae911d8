"""Compare the compiled kernel core against the pure-Python fallback.

Runs the hot kernels and two end-to-end paths (matched-solution epochs,
sparse recovery) on both backends at mmcal's desk scale and prints a
timing table. The pure-Python twin exists for portability, not speed;
expect three to four orders of magnitude.

Usage:
    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from mmcal import rng
from mmcal.backend import get_impl


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def bench_kernels(impl, m, n, repeat):
    a = rng.gaussian_matrix(m, n, 1)
    b = rng.gaussian_matrix(n, m, 2)
    sq = rng.gaussian_matrix(m, m, 3) + 4.0 * np.eye(m)
    x = rng.gaussian_vector(4, n)
    out_mm = np.empty((m, m))
    out_mv = np.empty(m)
    timings = {}
    timings[f"matmul {m}x{n} * {n}x{m}"] = _time(lambda: impl.matmul(a, b, out_mm), repeat)
    timings[f"matvec {m}x{n}"] = _time(lambda: impl.matvec(a, x, out_mv), repeat)

    def run_invert():
        work = sq.copy()
        inv = np.eye(m)
        impl.invert(work, inv, 1e-12)

    timings[f"invert {m}x{m}"] = _time(run_invert, repeat)

    tall = rng.gaussian_matrix(n, m, 5)

    def run_qr():
        work = tall.copy()
        q = np.empty((n, m))
        vhead = np.empty(m)
        rdiag = np.empty(m)
        impl.qr_thin(work, q, vhead, rdiag, 1e-12)

    timings[f"qr_thin {n}x{m}"] = _time(run_qr, repeat)
    return timings


def bench_pipeline(backend_name, m, n, epochs, fista_iters):
    """End-to-end paths, re-imported so the chosen backend is active."""
    import importlib
    import os

    os.environ["MMCAL_BACKEND"] = backend_name
    import mmcal.backend

    importlib.reload(mmcal.backend)
    for mod in ("mmcal.linalg", "mmcal.measurement", "mmcal.mismatch",
                "mmcal.matched", "mmcal.recovery"):
        importlib.reload(importlib.import_module(mod))
    from mmcal.matched import ImageOracle, algorithm1
    from mmcal.measurement import measure, NOISELESS
    from mmcal.recovery import RecoveryConfig, fista_l1
    from mmcal import phantoms

    h = int(round(np.sqrt(n)))
    a = rng.gaussian_matrix(m, n, 1)
    a_u = rng.gaussian_matrix(m, n, 2)
    x = phantoms.phantom("blobs", h, n // h)
    y = measure(a_u, x, NOISELESS)
    t0 = time.perf_counter()
    algorithm1(y, ImageOracle(x), a, np.full(n, 0.5), epochs=epochs)
    t_alg1 = time.perf_counter() - t0
    x0 = phantoms.sparse_spikes(n, 5, 9)
    y0 = measure(a, x0, NOISELESS)
    t0 = time.perf_counter()
    fista_l1(y0, a, RecoveryConfig(max_iters=fista_iters, rel_tol=1e-12))
    t_fista = time.perf_counter() - t0
    return {f"algorithm1 ({epochs} epochs)": t_alg1,
            f"fista_l1 ({fista_iters} iters)": t_fista}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--quick", action="store_true",
                        help="smaller sizes so the pure-Python pass stays short")
    args = parser.parse_args()

    if args.quick:
        m, n, epochs, fista_iters, repeat = 24, 64, 10, 40, 3
    else:
        m, n, epochs, fista_iters, repeat = 120, 256, 30, 200, 3

    results = {}
    for name in ("compiled", "python"):
        try:
            impl = get_impl(name)
        except ImportError:
            print(f"[{name}] backend unavailable; skipping")
            continue
        results[name] = bench_kernels(impl, m, n, repeat)
        results[name].update(bench_pipeline(name, m, n, epochs, fista_iters))

    if "compiled" in results and "python" in results:
        width = max(len(k) for k in results["compiled"])
        print(f"{'benchmark':<{width}}  {'compiled':>12}  {'python':>12}  {'speedup':>9}")
        for key in results["compiled"]:
            tc = results["compiled"][key]
            tp = results["python"].get(key, float("nan"))
            print(f"{key:<{width}}  {tc:12.6f}  {tp:12.6f}  {tp / tc:8.1f}x")
    else:
        for name, rows in results.items():
            print(f"[{name}]")
            for key, val in rows.items():
                print(f"  {key}: {val:.6f}s")


if __name__ == "__main__":
    main()
