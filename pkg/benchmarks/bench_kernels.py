#!/usr/bin/env python3
"""Compare the compiled and pure-numpy kernel backends.

Usage::

    python3 benchmarks/bench_kernels.py [--points N] [--trajectories N] [--t-end T]
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from superband import _pykernels
from superband.synthesis import SynthesisParams, gaussian_terms

try:
    from superband import _kernels
except ImportError:  # extension not built
    _kernels = None


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=2**18, help="field evaluation points")
    ap.add_argument("--trajectories", type=int, default=1000, help="Bohmian trajectories")
    ap.add_argument("--t-end", type=float, default=2.0, help="trajectory end time")
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    p = SynthesisParams(alpha=args.alpha)
    amps, widths = gaussian_terms(p)
    x = np.linspace(-40.0, 60.0, args.points)
    x0 = np.linspace(-10.0, 10.0, args.trajectories)
    t_out = np.linspace(0.0, args.t_end, 11)
    common = (p.kappa0, p.hbar, p.mass, amps, widths)

    backends = [("numpy", _pykernels)]
    if _kernels is not None:
        backends.append(("cython", _kernels))
    results = {}
    for name, mod in backends:
        results[name] = {
            "superband_field": best_of(lambda: mod.superband_field(x, 3.0, *common), args.repeat),
            "guiding_velocity": best_of(lambda: mod.guiding_velocity(x, 3.0, *common),
                                        args.repeat),
            "rk4_trajectories": best_of(
                lambda: mod.rk4_trajectories(x0, t_out, 1e-2, 0.0, *common), 1),
        }
    print(f"{'kernel':<20}" + "".join(f"{n:>12}" for n, _ in backends) + "     speedup")
    for kernel in results["numpy"]:
        row = f"{kernel:<20}" + "".join(f"{results[n][kernel]:>11.4f}s" for n, _ in backends)
        if "cython" in results:
            row += f"  {results['numpy'][kernel] / results['cython'][kernel]:>9.1f}x"
        print(row)
    if _kernels is not None:
        a = _pykernels.rk4_trajectories(x0, t_out, 1e-2, 0.0, *common)[0]
        b = _kernels.rk4_trajectories(x0, t_out, 1e-2, 0.0, *common)[0]
        print(f"max trajectory difference between backends: {np.nanmax(np.abs(a - b)):.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
