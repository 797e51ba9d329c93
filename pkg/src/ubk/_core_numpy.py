"""Pure-numpy implementation of the hot kernel-sum loops.

This module mirrors the API of the compiled extension ``ubk._core_cy``;
``ubk.core`` picks one of the two at import time.  All routines take the
covariates pre-sorted (ascending) so that compact kernel support turns
each evaluation point into a contiguous window found by binary search.

Kernel kind codes (1-d profiles supported on [-1/2, 1/2], closed):
    0  box           1
    1  triangular    2(1 - 2|u|)
    2  epanechnikov  1.5(1 - 4u^2)
    3  quartic       1.875(1 - 4u^2)^2
"""

from __future__ import annotations

import numpy as np

BOX = 0
TRIANGULAR = 1
EPANECHNIKOV = 2
QUARTIC = 3

KIND_NAMES = {"box": BOX, "triangular": TRIANGULAR,
              "epanechnikov": EPANECHNIKOV, "quartic": QUARTIC}


def profile(kind: int, u):
    """1-d kernel profile on the closed support [-1/2, 1/2]."""
    u = np.asarray(u, dtype=np.float64)
    inside = np.abs(u) <= 0.5
    if kind == BOX:
        return inside.astype(np.float64)
    if kind == TRIANGULAR:
        return np.where(inside, 2.0 * (1.0 - 2.0 * np.abs(u)), 0.0)
    if kind == EPANECHNIKOV:
        return np.where(inside, 1.5 * (1.0 - 4.0 * u * u), 0.0)
    if kind == QUARTIC:
        q = 1.0 - 4.0 * u * u
        return np.where(inside, 1.875 * q * q, 0.0)
    raise ValueError(f"unknown kernel kind {kind}")


def _window(x_sorted, g, scale):
    lo = np.searchsorted(x_sorted, g - 0.5 * scale, side="left")
    hi = np.searchsorted(x_sorted, g + 0.5 * scale, side="right")
    return lo, hi


def density_sums(kind, x_sorted, grid, scale):
    """out[j] = sum_i K((grid[j] - x_i)/scale), d = 1."""
    x_sorted = np.ascontiguousarray(x_sorted, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    out = np.empty(grid.shape[0], dtype=np.float64)
    for j, g in enumerate(grid):
        lo, hi = _window(x_sorted, g, scale)
        out[j] = profile(kind, (g - x_sorted[lo:hi]) / scale).sum()
    return out


def weighted_sums(kind, x_sorted, y_by_x, grid, scale):
    """Denominator and response-weighted numerator sums per grid point."""
    x_sorted = np.ascontiguousarray(x_sorted, dtype=np.float64)
    y_by_x = np.ascontiguousarray(y_by_x, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    den = np.empty(grid.shape[0], dtype=np.float64)
    num = np.empty(grid.shape[0], dtype=np.float64)
    for j, g in enumerate(grid):
        lo, hi = _window(x_sorted, g, scale)
        w = profile(kind, (g - x_sorted[lo:hi]) / scale)
        den[j] = w.sum()
        num[j] = (w * y_by_x[lo:hi]).sum()
    return den, num


def indicator_sums(kind, x_sorted, y_by_x, grid, scale, t_grid):
    """den[j] and num[j, l] = sum_i 1{y_i <= t_l} K((grid[j] - x_i)/scale)."""
    x_sorted = np.ascontiguousarray(x_sorted, dtype=np.float64)
    y_by_x = np.ascontiguousarray(y_by_x, dtype=np.float64)
    grid = np.asarray(grid, dtype=np.float64)
    t_grid = np.asarray(t_grid, dtype=np.float64)
    den = np.empty(grid.shape[0], dtype=np.float64)
    num = np.empty((grid.shape[0], t_grid.shape[0]), dtype=np.float64)
    for j, g in enumerate(grid):
        lo, hi = _window(x_sorted, g, scale)
        w = profile(kind, (g - x_sorted[lo:hi]) / scale)
        yw = y_by_x[lo:hi]
        order = np.argsort(yw, kind="stable")
        cw = np.concatenate(([0.0], np.cumsum(w[order])))
        pos = np.searchsorted(yw[order], t_grid, side="right")
        den[j] = cw[-1]
        num[j] = cw[pos]
    return den, num


def pair_sum(kind, x_sorted, scale):
    """sum_{i,j} K((x_i - x_j)/scale), diagonal included."""
    return float(density_sums(kind, x_sorted, x_sorted, scale).sum())
