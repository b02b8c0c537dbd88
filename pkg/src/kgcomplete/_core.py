"""Kernel backend selection.

The compiled Cython extension is used when importable. Setting
``KGCOMPLETE_PURE_PYTHON=1`` forces the pure-Python fallback.
"""
import os

import numpy as np

from . import _pykernels

BACKEND = "python"

if os.environ.get("KGCOMPLETE_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _pykernels
    else:
        BACKEND = "cython"
else:
    _impl = _pykernels


def frequency_table(entity, period, k):
    """Dispatch to the selected backend; see ``_pykernels.frequency_table``."""
    entity = np.ascontiguousarray(entity, dtype=np.int64)
    period = np.ascontiguousarray(period, dtype=np.int64)
    return _impl.frequency_table(entity, period, int(k))


__all__ = ["BACKEND", "frequency_table"]
