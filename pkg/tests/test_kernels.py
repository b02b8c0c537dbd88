import numpy as np
import pytest
from hypothesis import given, strategies as st

from kgcomplete import _core, _pykernels

try:
    from kgcomplete import _kernels
except ImportError:  # extension not built
    _kernels = None

BACKENDS = [_pykernels] + ([_kernels] if _kernels is not None else [])
backend_ids = [b.__name__.rsplit(".", 1)[-1] for b in BACKENDS]


def _call(mod, e, p, k):
    return mod.frequency_table(np.asarray(e, np.int64), np.asarray(p, np.int64), k)


def brute_table(pairs, k):
    """Recount every prefix from scratch."""
    out = np.zeros((k, k + 1), dtype=np.int64)
    for t in range(k):
        counts = {}
        for e, p in pairs:
            if p <= t:
                counts[e] = counts.get(e, 0) + 1
        for x in counts.values():
            out[t, x] += 1
    return out


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_small_table(mod):
    # A in periods 0 and 1, B in 0, C in 1
    got = _call(mod, [0, 0, 1, 2], [0, 1, 0, 1], 2)
    assert got.tolist() == [[0, 2, 0], [0, 2, 1]]


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_empty_and_gaps(mod):
    assert _call(mod, [], [], 0).shape == (0, 1)
    assert _call(mod, [], [], 2).tolist() == [[0, 0, 0], [0, 0, 0]]
    assert _call(mod, [5, 5], [0, 2], 3).tolist() == [[0, 1, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]]


@pytest.mark.parametrize("mod", BACKENDS, ids=backend_ids)
def test_rejects_unsorted_or_duplicate(mod):
    with pytest.raises(ValueError):
        _call(mod, [0, 0], [1, 1], 2)
    with pytest.raises(ValueError):
        _call(mod, [0, 0], [1, 0], 2)
    with pytest.raises(ValueError):
        _call(mod, [0], [3], 2)
    with pytest.raises(ValueError):
        _call(mod, [0, 1], [0], 2)


observation_sets = st.sets(st.tuples(st.integers(0, 30), st.integers(0, 11)), max_size=120)


@given(observation_sets)
def test_backends_match_bruteforce(obs):
    pairs = sorted(obs)
    k = max((p for _, p in pairs), default=-1) + 1
    e = [x for x, _ in pairs]
    p = [y for _, y in pairs]
    expected = brute_table(pairs, k)
    for mod in BACKENDS:
        assert np.array_equal(_call(mod, e, p, k), expected)


def test_dispatch_accepts_lists():
    assert _core.frequency_table([0, 0], [0, 1], 2).tolist() == [[0, 1, 0], [0, 0, 1]]
    assert _core.BACKEND in ("cython", "python")
