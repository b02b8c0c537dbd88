"""Compare the compiled and pure-Python frequency-table kernels.

    python3 benchmarks/bench_kernels.py [--pairs 200000] [--periods 72] [--repeat 3]
"""
import argparse
import time

import numpy as np

from kgcomplete import _pykernels

try:
    from kgcomplete import _kernels
except ImportError:
    _kernels = None


def make_pairs(n_pairs, k, seed=0):
    rng = np.random.default_rng(seed)
    entity = rng.integers(0, max(n_pairs // 4, 1), n_pairs)
    period = rng.integers(0, k, n_pairs)
    key = np.unique(entity * k + period)
    return np.ascontiguousarray(key // k), np.ascontiguousarray(key % k)


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t)
    return min(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pairs", type=int, default=200_000)
    ap.add_argument("--periods", type=int, default=72)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    entity, period = make_pairs(args.pairs, args.periods)
    print(f"{len(entity)} (entity, period) pairs, k={args.periods}")
    t_py, ref = best_of(lambda: _pykernels.frequency_table(entity, period, args.periods), args.repeat)
    print(f"pure python  {t_py * 1e3:10.1f} ms")
    if _kernels is None:
        print("compiled     not built")
        return
    t_c, got = best_of(lambda: _kernels.frequency_table(entity, period, args.periods), args.repeat)
    assert np.array_equal(np.asarray(got), ref)
    print(f"cython       {t_c * 1e3:10.1f} ms   ({t_py / t_c:.0f}x)")


if __name__ == "__main__":
    main()
