"""Compare the compiled attractor kernel with the pure-Python fallback.

Usage: python3 benchmarks/bench_attractor.py [--sizes 1000 5000 20000] [--repeat 5]
"""

import argparse
import random
import timeit

from artifact import _attractor_py
from artifact.games import ABELARD, ELOISE, ParityArena

try:
    from artifact import _attractor
except ImportError:
    _attractor = None


def random_arena(n, degree, seed):
    rng = random.Random(seed)
    vertices = [(i, rng.choice((ELOISE, ABELARD)), rng.randrange(4)) for i in range(n)]
    edges = {(i, rng.randrange(n)) for i in range(n) for _ in range(degree)}
    return ParityArena(vertices, sorted(edges))


def kernel_args(a, seed):
    rng = random.Random(seed)
    n = len(a)
    active = bytearray(b"\x01") * n
    target = bytearray(rng.random() < 0.05 for _ in range(n))
    return (a.succ_ptr, a.succ_idx, a.pred_ptr, a.pred_idx, a.owner, active, target, 0)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--sizes", type=int, nargs="+", default=[1_000, 5_000, 20_000])
    p.add_argument("--degree", type=int, default=3)
    p.add_argument("--repeat", type=int, default=5)
    args = p.parse_args()

    print(f"{'vertices':>9} {'python ms':>10} {'cython ms':>10} {'speedup':>8}")
    for n in args.sizes:
        a = random_arena(n, args.degree, n)
        kargs = kernel_args(a, n)
        py = min(timeit.repeat(lambda: _attractor_py.attractor(*kargs), number=1, repeat=args.repeat))
        if _attractor is None:
            print(f"{n:>9} {py * 1e3:>10.2f} {'n/a':>10} {'n/a':>8}")
            continue
        attr_c, _ = _attractor.attractor(*kargs)
        attr_p, _ = _attractor_py.attractor(*kargs)
        assert bytes(attr_c) == bytes(attr_p), "backends disagree"
        cy = min(timeit.repeat(lambda: _attractor.attractor(*kargs), number=1, repeat=args.repeat))
        print(f"{n:>9} {py * 1e3:>10.2f} {cy * 1e3:>10.2f} {py / cy:>7.1f}x")


if __name__ == "__main__":
    main()
