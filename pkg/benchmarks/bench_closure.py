"""Compare the numba and numpy kernels behind the oracle.

    python benchmarks/bench_closure.py [--sizes 40 160 640] [--repeat 5]

Each size builds a random DAG shaped like an induced history (a few replica
chains plus cross-replica sync edges), checks that both paths agree, then
times them. The first jit call is timed separately since it includes
compilation (or loading it from the on-disk cache).
"""

import argparse
import time

import numpy as np

from crdtkit import kernels


def history_dag(n, replicas=4, sync_p=0.05, seed=0):
    rng = np.random.default_rng(seed)
    adj = np.zeros((n, n), dtype=np.bool_)
    owner = rng.integers(0, replicas, size=n)
    last = {}
    for i in range(n):
        r = int(owner[i])
        if r in last:
            adj[last[r], i] = True
        last[r] = i
        senders = np.nonzero(rng.random(i) < sync_p)[0]
        adj[senders, i] = True
    return adj


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[40, 160, 640])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    t0 = time.perf_counter()
    kernels.closure_jit(history_dag(4))
    print(f"jit warm-up: {1e3 * (time.perf_counter() - t0):.1f} ms")

    print(f"{'n':>6} {'numpy ms':>10} {'numba ms':>10} {'speedup':>8}")
    for n in args.sizes:
        adj = history_dag(n, seed=n)
        a, b = kernels.closure_np(adj), kernels.closure_jit(adj)
        assert np.array_equal(a, b), "kernels disagree"
        t_np = best_of(lambda: kernels.closure_np(adj), args.repeat)
        t_jit = best_of(lambda: kernels.closure_jit(adj), args.repeat)
        print(f"{n:>6} {1e3 * t_np:>10.3f} {1e3 * t_jit:>10.3f} {t_np / t_jit:>8.1f}x")


if __name__ == "__main__":
    main()
