# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled single-linkage clustering over token-id sets."""

import itertools

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t i) noexcept nogil:
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


cdef inline Py_ssize_t _intersect(const cnp.int64_t[::1] flat,
                                  Py_ssize_t a0, Py_ssize_t a1,
                                  Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef Py_ssize_t count = 0
    while a0 < a1 and b0 < b1:
        if flat[a0] == flat[b0]:
            count += 1
            a0 += 1
            b0 += 1
        elif flat[a0] < flat[b0]:
            a0 += 1
        else:
            b0 += 1
    return count


def single_linkage(token_sets, double threshold):
    """Label each set by connected component of the distance <= threshold graph.

    ``token_sets`` is a sequence of integer sequences; duplicates within a
    sequence are ignored. Labels are numbered by first occurrence.
    """
    cdef Py_ssize_t n = len(token_sets)
    cdef Py_ssize_t i, j, ri, rj, inter, uni, la, lb
    cdef double dist

    sets = [sorted(set(s)) for s in token_sets]
    offsets_np = np.zeros(n + 1, dtype=np.intp)
    np.cumsum([len(s) for s in sets], out=offsets_np[1:])
    flat_np = np.fromiter(
        itertools.chain.from_iterable(sets), dtype=np.int64, count=offsets_np[n]
    )

    cdef const cnp.int64_t[::1] flat = flat_np
    cdef Py_ssize_t[::1] off = offsets_np
    parent_np = np.arange(n, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = parent_np

    with nogil:
        for i in range(n):
            la = off[i + 1] - off[i]
            for j in range(i + 1, n):
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri == rj:
                    continue
                lb = off[j + 1] - off[j]
                inter = _intersect(flat, off[i], off[i + 1], off[j], off[j + 1])
                uni = la + lb - inter
                if uni == 0:
                    dist = 0.0
                else:
                    dist = 1.0 - (<double>inter) / (<double>uni)
                if dist <= threshold:
                    if ri < rj:
                        parent[rj] = ri
                    else:
                        parent[ri] = rj

    labels = [0] * n
    first_seen = {}
    for i in range(n):
        ri = _find(parent, i)
        if ri not in first_seen:
            first_seen[ri] = len(first_seen)
        labels[i] = first_seen[ri]
    return labels
