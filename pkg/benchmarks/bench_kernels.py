"""Time the compiled kernels against the numpy fallback.

Both backends consume identical inputs and must agree bit for bit, so
this also doubles as a large randomized equivalence check. Run:

    python3 benchmarks/bench_kernels.py [--l 2000000] [--repeat 5]
"""

import argparse
import time

import numpy as np

from tuplebn._kernels import HAVE_COMPILED, _pykernels

if HAVE_COMPILED:
    from tuplebn._kernels import _ckernels
else:
    _ckernels = None


def _timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def bench_sample_node(l, repeat, rng):
    d = 3
    n_parents = 2
    n_cols = 4
    jcol = 3
    pcols = np.array([0, 1], dtype=np.int64)
    pstrides = np.array([d, 1], dtype=np.int64)
    raw = rng.dirichlet(np.ones(d), size=d ** n_parents)
    cum = np.cumsum(raw, axis=1)
    u = rng.random(l)
    base = rng.integers(0, d, size=(l, n_cols), dtype=np.int64)

    results = {}
    times = {}
    for name, mod in (("python", _pykernels), ("compiled", _ckernels)):
        if mod is None:
            continue
        rows = base.copy()
        times[name] = _timeit(lambda: mod.sample_node(u.copy(), rows, jcol, pcols, pstrides, cum), repeat)
        results[name] = rows[:, jcol].copy()
    if len(results) == 2:
        assert np.array_equal(results["python"], results["compiled"]), "backends disagree"
    return times


def bench_count_tuples(l, repeat, rng):
    d = 4
    n_cols = 8
    cols = np.array([1, 4, 6], dtype=np.int64)
    strides = np.array([d * d, d, 1], dtype=np.int64)
    rows = rng.integers(0, d, size=(l, n_cols), dtype=np.int64)

    results = {}
    times = {}
    for name, mod in (("python", _pykernels), ("compiled", _ckernels)):
        if mod is None:
            continue
        times[name] = _timeit(lambda: mod.count_tuples(rows, cols, strides, d ** 3), repeat)
        results[name] = mod.count_tuples(rows, cols, strides, d ** 3)
    if len(results) == 2:
        assert np.array_equal(results["python"], results["compiled"]), "backends disagree"
    return times


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--l", type=int, default=2_000_000, help="rows per kernel call")
    parser.add_argument("--repeat", type=int, default=5, help="take the best of this many runs")
    args = parser.parse_args()

    rng = np.random.default_rng(20260814)
    rows = [
        ("sample_node", bench_sample_node(args.l, args.repeat, rng)),
        ("count_tuples", bench_count_tuples(args.l, args.repeat, rng)),
    ]

    print(f"l={args.l} rows, best of {args.repeat}")
    print(f"{'kernel':<14} {'python':>10} {'compiled':>10} {'speedup':>8}")
    for name, times in rows:
        py = times["python"]
        if "compiled" in times:
            cy = times["compiled"]
            print(f"{name:<14} {py * 1e3:>8.1f}ms {cy * 1e3:>8.1f}ms {py / cy:>7.1f}x")
        else:
            print(f"{name:<14} {py * 1e3:>8.1f}ms {'absent':>10} {'':>8}")
    if not HAVE_COMPILED:
        print("compiled backend not available; showing fallback only")


if __name__ == "__main__":
    main()
