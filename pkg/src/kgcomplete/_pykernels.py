"""Pure-Python kernels, used when the compiled extension is unavailable."""
import numpy as np


def frequency_table(entity, period, k):
    """Cumulative frequency-of-frequencies table.

    ``entity`` and ``period`` describe deduplicated observations sorted by
    entity, then period. Row ``t`` of the ``(k, k + 1)`` result holds
    ``f_i`` in column ``i`` for the histogram over periods ``0..t``;
    column 0 is always zero.
    """
    entity = np.asarray(entity, dtype=np.int64).tolist()
    period = np.asarray(period, dtype=np.int64).tolist()
    if len(entity) != len(period):
        raise ValueError("entity and period arrays differ in length")
    if k < 0:
        raise ValueError("k must be non-negative")
    delta = [[0] * (k + 1) for _ in range(k)]
    r = 0
    prev_e = prev_p = None
    for e, p in zip(entity, period):
        if p < 0 or p >= k:
            raise ValueError(f"period {p} outside [0, {k})")
        if e != prev_e:
            r = 1
        else:
            if p <= prev_p:
                raise ValueError("observations must be unique and sorted by (entity, period)")
            r += 1
        row = delta[p]
        row[r] += 1
        if r > 1:
            row[r - 1] -= 1
        prev_e, prev_p = e, p
    for p in range(1, k):
        prev, row = delta[p - 1], delta[p]
        for j in range(k + 1):
            row[j] += prev[j]
    return np.array(delta, dtype=np.int64).reshape(k, k + 1)
