"""Time the compiled Jacobi kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is called with identical long double inputs on both backends;
the table lists the best wall time per call and the largest difference
between the two results.
"""
import argparse
import timeit

import numpy as np

from paneitzlab import _kernels_py, kernels

try:
    from paneitzlab import _kernels_c
except ImportError:  # extension not built
    _kernels_c = None

LD = np.longdouble


def cases():
    fam = kernels.jacobi_family(1.5, 1.5, 1100)
    args = (fam.a, fam.b, fam.p0)
    x, w = kernels.gauss_jacobi(1.5, 1.5, 513)
    wf = np.cos(3 * x) * w
    c = np.asarray(np.random.default_rng(1).standard_normal(513), dtype=LD)
    xe = np.linspace(-1, 1, 2001).astype(LD)
    x0 = np.asarray(x, dtype=LD) * (1 + LD(1e-12))
    return {
        "project K=512, 513 nodes": lambda m: m.project(x, wf, *args, 512),
        "evaluate deg 512 + derivative, 2001 pts": lambda m: m.evaluate(c, xe, *args, True),
        "table K=256, 2001 pts": lambda m: m.table(xe, *args, 256, False),
        "christoffel N=513": lambda m: m.christoffel(x, *args, 513),
        "polish_nodes N=513, 3 steps": lambda m: m.polish_nodes(x0, *args, 513, 3),
    }


def largest_difference(a, b):
    a = a if isinstance(a, tuple) else (a,)
    b = b if isinstance(b, tuple) else (b,)
    return max(float(np.max(np.abs(np.asarray(p, float) - np.asarray(q, float)))) for p, q in zip(a, b))


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args(argv)
    if _kernels_c is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':42s} {'cython [ms]':>12s} {'python [ms]':>12s} {'speed-up':>9s} {'max diff':>10s}")
    for name, call in cases().items():
        tc = min(timeit.repeat(lambda: call(_kernels_c), number=1, repeat=args.repeat))
        tp = min(timeit.repeat(lambda: call(_kernels_py), number=1, repeat=args.repeat))
        diff = largest_difference(call(_kernels_c), call(_kernels_py))
        print(f"{name:42s} {tc * 1e3:12.3f} {tp * 1e3:12.3f} {tp / tc:9.1f} {diff:10.2e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
