"""Compare the compiled kernels with the numpy fallback.

    python benchmarks/bench_backends.py [--docs N] [--dim D] [--eig-dims 32,64,128]

Prints a TSV of median wall-clock seconds per kernel and backend, and
checks that both backends return bit-identical results.
"""
import argparse
import statistics
import sys
import time

import numpy as np

from prunerank import _backend


def median_time(fn, repeat):
    timings = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        timings.append(time.perf_counter() - start)
    return statistics.median(timings)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--docs", type=int, default=100_000)
    parser.add_argument("--dim", type=int, default=256)
    parser.add_argument("--eig-dims", default="32,64,128")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    backends = _backend.available()
    if "cython" not in backends:
        print("compiled extension not built; only the numpy fallback is available", file=sys.stderr)

    rng = np.random.default_rng(args.seed)
    matrix = rng.standard_normal((args.docs, args.dim), dtype=np.float32)
    query = rng.standard_normal(args.dim)

    print("kernel\tshape\tbackend\tmedian_s\tspeedup_vs_numpy")
    results = {}
    for name, mod in sorted(backends.items()):
        results[name] = mod.score_rows(matrix, query)
        t = median_time(lambda: mod.score_rows(matrix, query), args.repeat)
        results[(name, "score")] = t
    for name in sorted(backends):
        t = results[(name, "score")]
        print(f"score_rows\t{args.docs}x{args.dim}\t{name}\t{t:.6f}\t{results[('numpy', 'score')] / t:.2f}")
    if len(backends) > 1 and not np.array_equal(results["cython"], results["numpy"]):
        print("warning: score_rows results differ between backends", file=sys.stderr)

    for d in (int(x) for x in args.eig_dims.split(",")):
        x = rng.standard_normal((2 * d, d))
        s = np.ascontiguousarray(x.T @ x)
        outputs, times = {}, {}
        for name, mod in sorted(backends.items()):
            outputs[name] = mod.jacobi_eigh(s.copy(), 1e-12, 100)
            times[name] = median_time(lambda: mod.jacobi_eigh(s.copy(), 1e-12, 100),
                                      max(1, args.repeat // 2))
        for name in sorted(backends):
            print(f"jacobi_eigh\t{d}x{d}\t{name}\t{times[name]:.6f}\t{times['numpy'] / times[name]:.2f}")
        if len(backends) > 1:
            same = all(np.array_equal(a, b) for a, b in zip(outputs["cython"][:2], outputs["numpy"][:2]))
            if not same:
                print(f"warning: jacobi_eigh results differ between backends at d={d}", file=sys.stderr)


if __name__ == "__main__":
    main()
