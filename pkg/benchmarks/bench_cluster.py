"""Compare the compiled and pure-Python clustering kernels.

    python benchmarks/bench_cluster.py [--activities 200] [--comments 100]

Each synthetic activity mixes template comments (bot-like, few patterns)
and free-text comments (human-like, mostly singleton patterns); the latter
is the worst case since few pairs get skipped by the union-find shortcut.
"""

import argparse
import random
import time

from crowdbot._cluster_py import single_linkage as py_linkage
from crowdbot.patterns import _encode, normalize_comment

try:
    from crowdbot._cluster import single_linkage as cy_linkage
except ImportError:
    cy_linkage = None

WORDS = [f"{a}{b}" for a in "bcdfghjklmnpqrstvwz" for b in "aeiou"]


def make_activity(rng, n, human_share):
    bodies = []
    for _ in range(n):
        if rng.random() < human_share:
            bodies.append(" ".join(rng.sample(WORDS, rng.randint(4, 15))))
        else:
            bodies.append(f"Bumps {rng.choice(['serde', 'rand', 'tokio'])} from 1.{rng.randint(0, 9)} to 1.{rng.randint(10, 20)}")
    return _encode([normalize_comment(b) for b in bodies])


def bench(kernel, activities, threshold, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        for sets in activities:
            kernel(sets, threshold)
        best = min(best, time.perf_counter() - start)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--activities", type=int, default=200)
    ap.add_argument("--comments", type=int, default=100)
    ap.add_argument("--threshold", type=float, default=0.5)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = random.Random(args.seed)
    print(f"{'workload':<10} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for name, share in (("bot", 0.1), ("mixed", 0.5), ("human", 1.0)):
        acts = [make_activity(rng, args.comments, share) for _ in range(args.activities)]
        if cy_linkage is not None:
            for sets in acts[:20]:
                assert cy_linkage(sets, args.threshold) == py_linkage(sets, args.threshold)
        t_py = bench(py_linkage, acts, args.threshold, args.repeat)
        if cy_linkage is None:
            print(f"{name:<10} {t_py:>10.3f} {'n/a':>10} {'n/a':>8}")
            continue
        t_cy = bench(cy_linkage, acts, args.threshold, args.repeat)
        print(f"{name:<10} {t_py:>10.3f} {t_cy:>10.3f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
