"""Backend selection for the hot kernel-sum loops.

The compiled Cython extension is used when it importable, unless the
environment variable ``UBK_BACKEND=python`` forces the numpy fallback.
Both backends implement identical semantics on identical inputs.
"""

from __future__ import annotations

import os

from . import _core_numpy

KIND_NAMES = _core_numpy.KIND_NAMES

if os.environ.get("UBK_BACKEND", "").lower() == "python":
    _impl = _core_numpy
    BACKEND = "python"
else:
    try:
        from . import _core_cy as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _core_numpy
        BACKEND = "python"


def backend_name() -> str:
    return BACKEND


def profile(kind, u):
    return _impl.profile(kind, u)


def density_sums(kind, x_sorted, grid, scale):
    return _impl.density_sums(kind, x_sorted, grid, scale)


def weighted_sums(kind, x_sorted, y_by_x, grid, scale):
    return _impl.weighted_sums(kind, x_sorted, y_by_x, grid, scale)


def indicator_sums(kind, x_sorted, y_by_x, grid, scale, t_grid):
    return _impl.indicator_sums(kind, x_sorted, y_by_x, grid, scale, t_grid)


def pair_sum(kind, x_sorted, scale):
    return _impl.pair_sum(kind, x_sorted, scale)
