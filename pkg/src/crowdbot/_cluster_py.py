"""Pure-Python single-linkage clustering over token-id sets.

Reference implementation of the compiled kernel in ``_cluster.pyx``; both
must return identical labels for identical input.
"""

from __future__ import annotations

from typing import Sequence


def _find(parent: list[int], i: int) -> int:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


def single_linkage(token_sets: Sequence[Sequence[int]], threshold: float) -> list[int]:
    n = len(token_sets)
    sets = [frozenset(s) for s in token_sets]
    parent = list(range(n))
    for i in range(n):
        a = sets[i]
        for j in range(i + 1, n):
            ri = _find(parent, i)
            rj = _find(parent, j)
            if ri == rj:
                continue
            b = sets[j]
            union = len(a | b)
            if union == 0:
                dist = 0.0
            else:
                dist = 1.0 - len(a & b) / union
            if dist <= threshold:
                # lower root wins so labels depend only on the partition
                if ri < rj:
                    parent[rj] = ri
                else:
                    parent[ri] = rj
    labels = [0] * n
    first_seen: dict[int, int] = {}
    for i in range(n):
        root = _find(parent, i)
        if root not in first_seen:
            first_seen[root] = len(first_seen)
        labels[i] = first_seen[root]
    return labels
