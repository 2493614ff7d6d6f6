"""Time the compiled kernels against their numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``. Each kernel is first called
once per backend so compilation is excluded, then results are checked for
agreement before timing.
"""

import argparse
import timeit

import numpy as np

from smtprony import _kernels
from smtprony.model import validate_general_position


def cases(rng):
    x = rng.uniform(0.0, 40.0, 200_000)
    m = 6
    perms = _kernels.permutation_table(m)
    roots, amps, tau = rng.uniform(0, 3, m), rng.uniform(0.5, 4, m), rng.uniform(0, 50, 2 * m)
    pts = rng.uniform(-2, 2, (24, 3))
    from itertools import combinations
    subsets = np.array(list(combinations(range(24), 4)), dtype=np.int64)
    return {
        "bessel j_1/2, 2e5 args": lambda b: _kernels.bessel_normalized(0.5, x, backend=b),
        "bessel j_0, 2e5 args": lambda b: _kernels.bessel_normalized(0.0, x, backend=b),
        "permutation scan, m=6": lambda b: _kernels.permutation_residuals(roots, amps, tau, 0, perms, backend=b),
        "affine ranks, C(24,4)": lambda b: _kernels.subset_singular_ratios(pts, subsets, backend=b),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args(argv)
    backends = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])
    if len(backends) == 1:
        print("numba is not available; timing the numpy backend only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<26s}" + "".join(f"{b:>12s}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for name, fn in cases(rng).items():
        outs = [fn(b) for b in backends]  # warm-up and compile
        if len(outs) > 1:
            np.testing.assert_allclose(outs[0], outs[1], rtol=1e-10, atol=1e-14)
        times = [min(timeit.repeat(lambda b=b: fn(b), number=1, repeat=args.repeat)) for b in backends]
        row = f"{name:<26s}" + "".join(f"{t * 1e3:10.2f}ms" for t in times)
        if len(times) > 1:
            row += f"{times[0] / times[1]:11.1f}x"
        print(row)
    t = min(timeit.repeat(lambda: validate_general_position(rng.uniform(-1, 1, (20, 3))), number=1, repeat=3))
    print(f"validate_general_position, 20 points in R^3 ({_kernels.BACKEND}): {t * 1e3:.2f} ms")


if __name__ == "__main__":
    main()
