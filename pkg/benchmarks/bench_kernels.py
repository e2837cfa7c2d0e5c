"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--size 128]

Prints one line per kernel: median wall time for each backend, the speedup
and the max abs difference between the two results.
"""

import argparse
import statistics
import time

import numpy as np

from nptorus.geometry import ModeIndex, TorusShape
from nptorus.kernels import azimuthal_kernel, kstar_apply, slp_apply
from nptorus.oracle import QuadratureGrid


def _time(fn, repeat):
    fn()  # warm-up; triggers JIT compilation (cached on disk afterwards)
    runs = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        runs.append(time.perf_counter() - t)
    return statistics.median(runs), out


def cases(size):
    shape = TorusShape(1.0, 1.0)
    g = QuadratureGrid(size, size // 2)
    fine = g.refine(2)
    yield "azimuthal", lambda b: azimuthal_kernel(
        g.sigma, np.arange(g.n_sigma) * 2, fine.sigma, fine.phi, shape.tau0, shape.a, [0, 1, 2, 3], backend=b
    )

    small = QuadratureGrid(max(size // 4, 8), max(size // 8, 4))
    tx = small.positions(shape).reshape(-1, 3)
    tnu = small.outward_normals(shape).reshape(-1, 3)
    src = small.positions(shape).reshape(-1, 3)
    w = small.weights(shape).reshape(-1)
    q = np.array([small.density(ModeIndex(m, 1), shape).reshape(-1) * w for m in range(4)])
    self_idx = np.arange(tx.shape[0])
    yield "kstar_pointwise", lambda b: kstar_apply(tx, tnu, src, q, self_idx, backend=b)

    pts = tx[:64] * 1.7
    yield "slp", lambda b: slp_apply(pts, tnu[:64], g.positions(shape).reshape(-1, 3),
                                     np.array([g.density(ModeIndex(1, n), shape).reshape(-1) * g.weights(shape).reshape(-1)
                                               for n in range(-2, 3)]),
                                     backend=b)[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=128, help="n_sigma of the base grid")
    args = ap.parse_args()
    print(f"{'kernel':<16} {'numba [s]':>10} {'numpy [s]':>10} {'speedup':>8} {'max diff':>10}")
    for name, fn in cases(args.size):
        t_nb, r_nb = _time(lambda: fn("numba"), args.repeat)
        t_np, r_np = _time(lambda: fn("numpy"), args.repeat)
        diff = float(np.max(np.abs(r_nb - r_np)))
        print(f"{name:<16} {t_nb:10.4f} {t_np:10.4f} {t_np / t_nb:8.2f} {diff:10.2e}")


if __name__ == "__main__":
    main()
