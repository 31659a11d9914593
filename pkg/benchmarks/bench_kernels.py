"""Compare the compiled kernels with the NumPy fallback.

Kernel timings call both modules directly. The end-to-end timing runs the
same short simulation in two subprocesses, one with ``KSHIFT_PURE=1``.

    python benchmarks/bench_kernels.py [--sizes 1001 4001 16001] [--repeat 5]
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from kshift import _kernels_py

try:
    from kshift import _kernels
except ImportError:
    _kernels = None

E2E = """
import time
from kshift import Grid, ChemoParams, EnvironmentProfile, SimConfig, run, BACKEND
cfg = SimConfig(Grid.from_spacing(-40, 160, 0.1), EnvironmentProfile.tanh(-1, 1, shift_speed=0.5),
                ChemoParams(0.2, 1, 1, 1), 20.0, snapshot_dt=1.0)
t0 = time.perf_counter(); run(cfg); print(BACKEND, time.perf_counter() - t0)
"""


def inputs(n, rng):
    x = np.linspace(-20, 20, n)
    h = x[1] - x[0]
    u = np.exp(-x**2)
    v = 0.5 * np.exp(-np.abs(x))
    r = np.tanh(x)
    lower = -np.ones(n)
    upper = -np.ones(n)
    diag = 2.0 + h * h + rng.random(n)
    diag_s = -2.0 / h**2 + r
    off2 = np.full(n - 1, 1.0 / h**4)
    return dict(u=u, v=v, r=r, h=h, lower=lower, upper=upper, diag=diag, rhs=u.copy(),
                diag_s=diag_s, off2=off2)


def bench(mod, a, repeat):
    out = np.empty_like(a["u"])
    cases = {
        "solve_tridiag": lambda: mod.solve_tridiag(a["lower"], a["diag"], a["upper"], a["rhs"]),
        "upwind_step": lambda: mod.upwind_step(a["u"], a["v"], a["r"], a["h"], 1e-4, 0.2, 1.0,
                                               0.0, out),
        "sturm_count": lambda: mod.sturm_count(a["diag_s"], a["off2"], 0.5),
    }
    res = {}
    for name, fn in cases.items():
        number = max(1, int(0.05 / max(timeit.timeit(fn, number=1), 1e-7)))
        res[name] = min(timeit.repeat(fn, number=number, repeat=repeat)) / number
    return res


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1001, 4001, 16001])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--no-e2e", action="store_true", help="skip the end-to-end run")
    args = p.parse_args(argv)

    rng = np.random.default_rng(0)
    if _kernels is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':<14}{'n':>7}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for n in args.sizes:
        a = inputs(n, rng)
        py = bench(_kernels_py, a, args.repeat)
        cy = bench(_kernels, a, args.repeat) if _kernels is not None else None
        for name in py:
            c = f"{cy[name] * 1e6:14.1f}{py[name] / cy[name]:10.1f}" if cy else f"{'-':>14}{'-':>10}"
            print(f"{name:<14}{n:>7}{py[name] * 1e6:14.1f}{c}")

    if not args.no_e2e:
        print("\nend-to-end (tanh habitat, 2001 nodes, t = 20):")
        for pure in ("1", "0"):
            env = dict(os.environ, KSHIFT_PURE=pure)
            out = subprocess.run([sys.executable, "-c", E2E], env=env, capture_output=True,
                                 text=True, check=True)
            backend, secs = out.stdout.split()
            print(f"  {backend:<8}{float(secs):8.2f} s")


if __name__ == "__main__":
    main()
