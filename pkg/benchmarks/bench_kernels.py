"""Time the compiled jet kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]

Three workloads: raw jet products, a transcendental expression (series
composition), and a full fundamental-data evaluation on a torus grid.
"""
import argparse
import math
import timeit

import numpy as np

from mtsurf import curvature as C
from mtsurf import jet as J
from mtsurf import surfaces as S
from mtsurf.jet import Jet


def workloads():
    rng = np.random.default_rng(0)
    n = J.MAX_ORDER
    size = (n + 1) * (n + 2) // 2
    a = Jet(rng.normal(size=size) + 1j * rng.normal(size=size), n, (0.1, 0.2))
    b = Jet(rng.normal(size=size) + 1j * rng.normal(size=size), n, (0.1, 0.2))
    x = Jet.lift("xi", (0.3, -0.2), 4)
    xb = Jet.lift("xibar", (0.3, -0.2), 4)
    torus = S.euclidean_torus("1 + 0.5*cos(2*theta)")
    pts = [(float(R), float(t)) for R in np.linspace(-2, 2, 6) for t in np.linspace(0, 2 * math.pi, 6, endpoint=False)]

    def products():
        for _ in range(200):
            a * b

    def transcendental():
        for _ in range(50):
            (x * xb).exp() * (x + 0.5).log() + (x * xb + 1).sqrt()

    def torus_grid():
        for p in pts:
            C.fundamental_data(torus, p)

    return {"jet product (order 6) x200": products, "exp/log/sqrt (order 4) x50": transcendental,
            "fundamental data, 36 torus points": torus_grid}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    try:
        J.set_backend("compiled")
    except ImportError:
        print("compiled kernels not built; only the numpy fallback is available")
        return 1
    rows = []
    for name, fn in workloads().items():
        times = {}
        for backend in ("python", "compiled"):
            J.set_backend(backend)
            fn()  # warm caches
            times[backend] = min(timeit.repeat(fn, number=1, repeat=args.repeat))
        rows.append((name, times["python"], times["compiled"]))
    J.set_backend("compiled")
    print(f"{'workload':36s} {'numpy [ms]':>11s} {'compiled [ms]':>14s} {'speedup':>8s}")
    for name, tp, tc in rows:
        print(f"{name:36s} {1e3 * tp:11.2f} {1e3 * tc:14.2f} {tp / tc:7.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
