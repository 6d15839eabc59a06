"""Compare the compiled and pure-Python kernels on sampled spaces.

    python benchmarks/bench_kernels.py [--repeat N]
"""

from __future__ import annotations

import argparse
import random
import timeit

from ecover import _kernels
from ecover.spaces import carpet_level, gasket_level, hawaiian_stage


def _cases():
    yield "gasket-3", gasket_level(3, 1 / 64), 1 / 16
    yield "carpet-2", carpet_level(2, 1 / 36), 1 / 18
    yield "earring-4", hawaiian_stage(4, 1 / 128), 1 / 32


def _words(seed: int, count: int, length: int, rank: int):
    rng = random.Random(seed)
    letters = [x for g in range(1, rank + 1) for x in (g, -g)]
    return [tuple(rng.choice(letters) for _ in range(length)) for _ in range(count)]


def _time(fn, repeat: int) -> float:
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    py = _kernels.python_backend
    cy = _kernels.compiled_backend
    if cy is None:
        print("compiled backend unavailable; only the Python timings are shown")
    rows = []
    for name, space, scale in _cases():
        edges = py.threshold_edges(space.dist, scale)
        for label, call in (
            ("threshold_edges", lambda b: b.threshold_edges(space.dist, scale)),
            ("triangles", lambda b: b.triangles(space.n, edges)),
        ):
            t_py = _time(lambda: call(py), args.repeat)
            t_cy = _time(lambda: call(cy), args.repeat) if cy else float("nan")
            rows.append((f"{name} ({space.n} pts)", label, t_py, t_cy))
    words = _words(seed=11, count=2000, length=200, rank=3)
    for label, fn in (("free_reduce", "free_reduce"), ("cyclic_reduce", "cyclic_reduce")):
        t_py = _time(lambda: [getattr(py, fn)(w) for w in words], args.repeat)
        t_cy = _time(lambda: [getattr(cy, fn)(w) for w in words], args.repeat) if cy else float("nan")
        rows.append(("2000 words x 200", label, t_py, t_cy))
    print(f"{'input':<24}{'kernel':<18}{'python ms':>12}{'compiled ms':>14}{'speedup':>10}")
    for inp, label, t_py, t_cy in rows:
        print(f"{inp:<24}{label:<18}{t_py * 1e3:>12.2f}{t_cy * 1e3:>14.2f}{t_py / t_cy:>10.1f}")


if __name__ == "__main__":
    main()
