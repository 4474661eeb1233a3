"""Time the compiled kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--p 2]
"""
import argparse
import timeit

import numpy as np

from persmod import _fallback

try:
    from persmod import _kernels
except ImportError:
    _kernels = None


def rref_case(rng, size, p):
    mat = rng.integers(0, p, size=(size, size), dtype=np.int64)
    return lambda impl: impl.rref(mat, p)


def scan_case(rng, m, n, k, p):
    # A x = b with b outside every column space of the scanned family, so the whole range is visited
    a0 = np.zeros((m, n), dtype=np.int64)
    steps = rng.integers(0, p, size=(k, m, n), dtype=np.int64)
    steps[:, -1, :] = 0
    b0 = np.zeros(m, dtype=np.int64)
    b0[-1] = 1
    bs = np.zeros((k, m), dtype=np.int64)
    return lambda impl: impl.first_solvable(a0, steps, b0, bs, p, 0, p**k)


def best_of(fn, impl, repeat):
    timer = timeit.Timer(lambda: fn(impl))
    loops, _ = timer.autorange()
    return min(timer.repeat(repeat, loops)) / loops


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--p", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    cases = [(f"rref {s}x{s}", rref_case(rng, s, args.p)) for s in (8, 32, 128)]
    cases += [(f"first_solvable 12x8, 2^{k} maps", scan_case(rng, 12, 8, k, args.p)) for k in (8, 12)]
    if _kernels is None:
        print("compiled kernels are not built; timing the fallback only")
    print(f"{'case':<34}{'python':>12}{'cython':>12}{'speedup':>10}")
    for name, fn in cases:
        slow = best_of(fn, _fallback, args.repeat)
        if _kernels is None:
            print(f"{name:<34}{slow * 1e3:>10.3f}ms{'-':>12}{'-':>10}")
            continue
        assert np.array_equal(fn(_fallback)[0], fn(_kernels)[0])
        fast = best_of(fn, _kernels, args.repeat)
        print(f"{name:<34}{slow * 1e3:>10.3f}ms{fast * 1e3:>10.3f}ms{slow / fast:>9.1f}x")


if __name__ == "__main__":
    main()
