"""Compare the compiled and pure-Python kernels.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times one Dormand-Prince ray step and a batch of Weyl root counts with each
backend, and checks that both give the same numbers.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from kelvinwaves import _kernels_py
from kelvinwaves.geometry import Ellipsoid
from kelvinwaves.kernels import make_consts, metric_rows
from kelvinwaves.model import PhysicalConfig
from kelvinwaves.raytrace import seed_ray
from kelvinwaves.weyl import sample_bundle

try:
    from kelvinwaves import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases():
    cfg = PhysicalConfig((0.1, 0.0, 0.5), 2.0)
    ell = Ellipsoid((1.0, 0.86, 0.57))
    omega = 0.5
    consts = make_consts(cfg, omega, ell)
    s0 = seed_ray(cfg, omega, ell, 0, (0.0, 0.1), 0.0)
    y = s0.vector
    rows = metric_rows(cfg, np.linspace(1e-6, 0.99, 200))
    yy, t1, t2, th = sample_bundle(2000, np.random.default_rng(0))
    axes = np.array(ell.semi_axes)
    jac = axes[None, :, None] * np.stack([t1, t2], axis=-1)
    a = 2.0 * yy / axes
    xi = np.column_stack([np.cos(th), np.sin(th)])
    return {
        "dopri_step": lambda be: be.dopri_step(consts, 0, y, 1e-2),
        "count_roots (2000 samples x 200 freqs)": lambda be: be.count_roots(rows, jac, a, xi, 1.0),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'kernel':42s} " + " ".join(f"{n:>12s}" for n, _ in backends) + "   speedup")
    for name, fn in cases().items():
        times, outs = [], []
        for _, be in backends:
            fn(be)
            number = 1 if name.startswith("count") else 200
            best = min(timeit.repeat(lambda: fn(be), number=number, repeat=args.repeat)) / number
            times.append(best)
            outs.append(fn(be))
        speed = f"{times[0] / times[1]:9.1f}x" if len(times) > 1 else "      n/a"
        print(f"{name:42s} " + " ".join(f"{t * 1e6:10.1f}us" for t in times) + speed)
        if len(outs) > 1:
            a, b = (np.concatenate([np.ravel(v) for v in o]) if isinstance(o, tuple) else np.ravel(o) for o in outs)
            print(f"{'':42s} max |difference| = {np.max(np.abs(a - b)):.2e}")


if __name__ == "__main__":
    main()
