"""Compiled vs pure-Python kernel timings.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--streams 2 4 10]

For each stream count, times water-filling, the inner worst-case loop and the
full robust design on the same random gains with both backends, checks the
results agree bit for bit, and prints microseconds per call and the speedup.
"""

import argparse
import timeit

import numpy as np

from fdrelay._backend import compiled_kernels, python_kernels
from fdrelay.channel import sample_channel, singular_values_sq


def _cases(n, seed=0):
    rng = np.random.default_rng(seed)
    s1 = singular_values_sq(sample_channel(n + 1, n, rng, 2.0))
    s2 = singular_values_sq(sample_channel(n + 1, n, rng, 2.0))
    gr, _ = python_kernels.waterfill(list(s2), 5.0)
    return {
        "waterfill": lambda k: k.waterfill(s1, 5.0),
        "worst_case": lambda k: k.worst_case(s1, gr, 5.0, 2.0, 1e-6, 500),
        "robust": lambda k: k.robust(s1, s2, 5.0, 5.0, 2.0, n, 0.95, 1e-4, 1e-6, 200, 500, 1),
    }


def _same(a, b):
    if isinstance(a, (tuple, list)):
        return len(a) == len(b) and all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) or isinstance(b, np.ndarray):
        return np.array_equal(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    return a == b


def _time(fn, repeat):
    number = 1
    while timeit.timeit(fn, number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--streams", type=int, nargs="+", default=[2, 4, 10])
    args = ap.parse_args(argv)
    if compiled_kernels is None:
        raise SystemExit("compiled extension not built; run `pip install --no-build-isolation -e .`")
    print(f"{'kernel':<12}{'n':>4}{'python us':>14}{'cython us':>14}{'speedup':>10}  identical")
    for n in args.streams:
        for name, call in _cases(n).items():
            same = _same(call(python_kernels), call(compiled_kernels))
            tp = _time(lambda: call(python_kernels), args.repeat)
            tc = _time(lambda: call(compiled_kernels), args.repeat)
            print(f"{name:<12}{n:>4}{tp * 1e6:>14.1f}{tc * 1e6:>14.1f}{tp / tc:>10.1f}  {same}")


if __name__ == "__main__":
    main()
