"""Benchmark the compiled kernels against the pure-Python fallback.

Usage: python3 benchmarks/bench_kernels.py
"""

import time
from array import array

from order_bench import kernels
from order_bench.kernels import _pykernels
from order_bench.seeding import derive_rng

try:
    from order_bench.kernels import _ckernels
except ImportError:
    _ckernels = None


def timeit(fn, *args, repeat=5):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def bench_inversions(impl):
    rng = derive_rng("bench-inv", 0)
    data = [array("q", [rng.randrange(1000) for _ in range(500)]) for _ in range(200)]

    def run():
        for d in data:
            impl.count_inversions_ranked(d)

    return timeit(run)


def bench_cycles(impl):
    rng = derive_rng("bench-cyc", 0)
    perms = []
    for _ in range(2000):
        p = list(range(1, 201))
        rng.shuffle(p)
        perms.append(array("q", p))

    def run():
        for p in perms:
            impl.cycle_count(p)

    return timeit(run)


def bench_sgd(impl):
    rng = derive_rng("bench-sgd", 0)
    dim = 1 << 16
    rows = 20_000
    indices, indptr, labels = [], [0], []
    for _ in range(rows):
        row = sorted({rng.randrange(dim) for _ in range(30)})
        indices.extend(row)
        indptr.append(len(indices))
        labels.append(rng.randrange(2))
    args = (array("q", indices), array("q", indptr), array("b", labels),
            array("q", range(rows)))

    def run():
        weights = array("d", bytes(8 * dim))
        impl.logistic_sgd_epoch(*args, weights, 0.0, 0.3)

    return timeit(run, repeat=3)


def main():
    print(f"active backend: {kernels.BACKEND}")
    benches = [
        ("count_inversions_ranked (200 x n=500)", bench_inversions),
        ("cycle_count (2000 x n=200)", bench_cycles),
        ("logistic_sgd_epoch (20k rows x 30 feats)", bench_sgd),
    ]
    for name, bench in benches:
        py = bench(_pykernels)
        if _ckernels is not None:
            c = bench(_ckernels)
            print(f"{name}: python {py*1e3:8.2f} ms | compiled {c*1e3:8.2f} ms "
                  f"| speedup {py / c:5.1f}x")
        else:
            print(f"{name}: python {py*1e3:8.2f} ms | compiled: not built")


if __name__ == "__main__":
    main()
