"""Compiled vs pure-Python kernels on the workloads the library actually runs.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per workload: best-of-N seconds for each backend, the speedup,
and whether the two backends returned identical results.
"""

from __future__ import annotations

import argparse
import random
import sys
import timeit

from padic_gibbs import _kernels_py
from padic_gibbs.model import ModelParams, ti_system

try:
    from padic_gibbs import _ckernels
except ImportError:
    _ckernels = None


def depth2_weights(p: int, seed: int = 0):
    """One 3^7-term configuration sum (a depth-2 partition function)."""
    rng = random.Random(seed)
    mod = p**24 if p < 5 else p**20
    nv = 7
    vf = [1, 1, rng.randrange(mod)] * 3 + [rng.randrange(1, mod) for _ in range(12)]
    edges = [(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (2, 6)]
    sibs = [(1, 2), (3, 4), (5, 6)]
    pairs = [(a, b, rng.randrange(1, mod)) for a, b in edges + sibs]
    return (nv, vf, pairs, mod)


def survivor_level(p: int, level: int):
    """Digit-by-digit survival test of the invariant system at one level."""
    params = ModelParams.create(p, p, p, 0, 16)
    eqs = [q.integer_terms(20) for q in ti_system(params)]
    base = p ** (level - 1)
    parents = [(1 + i * p, 1 + j * p) for i in range(min(base // p, 27)) for j in range(min(base // p, 27))]
    return (eqs, 2, p, level, parents)


WORKLOADS = {
    "config_weights p=3 depth 2": ("config_weights", depth2_weights(3)),
    "config_weights p=7 depth 2": ("config_weights", depth2_weights(7)),
    "surviving_children p=3 level 6": ("surviving_children", survivor_level(3, 6)),
    "surviving_children p=5 level 4": ("surviving_children", survivor_level(5, 4)),
}


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled kernels not built; run `pip install -e . --no-build-isolation` first")
        return 1
    print(f"{'workload':34} {'python s':>10} {'cython s':>10} {'speedup':>8}  same")
    for name, (fn, fargs) in WORKLOADS.items():
        py, cy = getattr(_kernels_py, fn), getattr(_ckernels, fn)
        same = py(*fargs) == cy(*fargs)
        t_py = min(timeit.repeat(lambda: py(*fargs), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: cy(*fargs), number=1, repeat=args.repeat))
        print(f"{name:34} {t_py:10.4f} {t_cy:10.4f} {t_py / t_cy:7.1f}x  {same}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
