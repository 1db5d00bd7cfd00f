"""Time the compiled sparse kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py --m 2000 --n 6000 --density 0.005

Prints one line per kernel with the best time of each backend and the
speedup. Both backends are checked to agree before timing.
"""

import argparse
import timeit

import numpy as np

from inexact_ipm import _kernels_py
from inexact_ipm.linalg import SparseMatrix

try:
    from inexact_ipm import _kernels as _compiled
except ImportError:
    _compiled = None


def random_sparse(rng, m, n, density):
    nnz = max(int(m * n * density), n)
    rows = rng.integers(0, m, size=nnz)
    cols = np.concatenate([np.arange(n), rng.integers(0, n, size=nnz - n)])
    vals = rng.uniform(-1.0, 1.0, size=nnz)
    return SparseMatrix.from_triplets(m, n, rows, cols, vals)


def cases(A, rng):
    m, n = A.num_rows, A.num_cols
    v = rng.standard_normal(n)
    u = rng.standard_normal(m)
    d2 = rng.uniform(0.1, 10.0, size=n)
    args = (A.indptr, A.indices, A.data)
    return {
        "csc_matvec": (args + (v, m)),
        "csc_rmatvec": (args + (u,)),
        "csc_normal_apply": (args + (d2, u)),
        "csc_normal_diagonal": (args + (d2, m)),
    }


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=2000)
    parser.add_argument("--n", type=int, default=6000)
    parser.add_argument("--density", type=float, default=0.005)
    parser.add_argument("--repeat", type=int, default=7)
    parser.add_argument("--number", type=int, default=20)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    rng = np.random.default_rng(args.seed)
    A = random_sparse(rng, args.m, args.n, args.density)
    print(f"A: {A.num_rows} x {A.num_cols}, nnz = {A.data.shape[0]}")
    if _compiled is None:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{'kernel':<22}{'python [us]':>14}{'cython [us]':>14}{'speedup':>10}")
    for name, call_args in cases(A, rng).items():
        py_fn = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py_fn(*call_args), repeat=args.repeat,
                                 number=args.number)) / args.number
        if _compiled is None:
            print(f"{name:<22}{t_py * 1e6:>14.1f}{'-':>14}{'-':>10}")
            continue
        c_fn = getattr(_compiled, name)
        ref = py_fn(*call_args)
        out = np.asarray(c_fn(*call_args))
        if not np.allclose(out, ref, rtol=1e-12, atol=1e-12 * np.abs(ref).max(initial=1.0)):
            raise SystemExit(f"{name}: backends disagree")
        t_c = min(timeit.repeat(lambda: c_fn(*call_args), repeat=args.repeat,
                                number=args.number)) / args.number
        print(f"{name:<22}{t_py * 1e6:>14.1f}{t_c * 1e6:>14.1f}{t_py / t_c:>10.2f}")


if __name__ == "__main__":
    main()
