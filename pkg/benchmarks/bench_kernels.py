"""Time the compiled tree kernels against the pure-Python fallback.

    python3 benchmarks/bench_kernels.py --nodes 10000 100000 --repeat 5
"""

import argparse
import timeit

import numpy as np

from ledgerlogic.logic import _kernels_py

try:
    from ledgerlogic.logic import _kernels
except ImportError:
    _kernels = None

KERNELS = ["diamond_up", "box_down", "diamond_down", "box_up",
           "next_exists", "next_all", "prev_exists", "prev_all"]


def random_tree(n, rng):
    # breadth-first parents: every node hangs off an earlier one
    parent = np.empty(n, dtype=np.int64)
    parent[0] = -1
    parent[1:] = np.sort(rng.integers(0, np.arange(1, n)))
    mask = (rng.random(n) < 0.3).astype(np.uint8)
    return parent, mask


def best(fn, parent, mask, repeat):
    return min(timeit.repeat(lambda: fn(parent, mask), number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, nargs="+", default=[1_000, 10_000, 100_000])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if _kernels is None:
        print("compiled kernels not built; only the fallback is timed")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<14}{'nodes':>9}{'python ms':>12}{'cython ms':>12}{'speedup':>10}")
    for n in args.nodes:
        parent, mask = random_tree(n, rng)
        for name in KERNELS:
            py = best(getattr(_kernels_py, name), parent, mask, args.repeat)
            if _kernels is None:
                print(f"{name:<14}{n:>9}{py * 1e3:>12.3f}{'-':>12}{'-':>10}")
                continue
            cy = best(getattr(_kernels, name), parent, mask, args.repeat)
            assert np.array_equal(getattr(_kernels_py, name)(parent, mask), getattr(_kernels, name)(parent, mask))
            print(f"{name:<14}{n:>9}{py * 1e3:>12.3f}{cy * 1e3:>12.3f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
