# cython: language_level=3
"""Compiled hot loops. Semantics must match ``_pykernels`` exactly."""
import numpy as np

from libc.stdint cimport int64_t


def frequency_table(const int64_t[::1] entity, const int64_t[::1] period, Py_ssize_t k):
    cdef Py_ssize_t m = entity.shape[0]
    cdef Py_ssize_t i, j, p, r = 0
    if period.shape[0] != m:
        raise ValueError("entity and period arrays differ in length")
    if k < 0:
        raise ValueError("k must be non-negative")
    out = np.zeros((k, k + 1), dtype=np.int64)
    cdef int64_t[:, ::1] t = out
    for i in range(m):
        p = period[i]
        if p < 0 or p >= k:
            raise ValueError(f"period {p} outside [0, {k})")
        if i == 0 or entity[i] != entity[i - 1]:
            r = 1
        else:
            if period[i] <= period[i - 1]:
                raise ValueError("observations must be unique and sorted by (entity, period)")
            r += 1
        t[p, r] += 1
        if r > 1:
            t[p, r - 1] -= 1
    for p in range(1, k):
        for j in range(k + 1):
            t[p, j] += t[p - 1, j]
    return out
