"""Deterministic bias f * K_h - f and its rate in h.

Bias is always computed by quadrature against the analytic density,
never by averaging replicated estimates, so it isolates the
deterministic term of the error decomposition.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .kernels import BandwidthSpec, Kernel


@dataclass(frozen=True)
class BiasCurve:
    rows: tuple[tuple[float, float], ...]  # (h, sup_bias)
    slope_fit: Optional[tuple[float, float]]  # (slope, r_squared)
    excluded: tuple[float, ...] = ()  # h values flagged for zero bias

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["h", "sup_bias"])
            for h, b in self.rows:
                writer.writerow([repr(h), repr(b)])


def _nodes(q: int, d: int) -> tuple[np.ndarray, float]:
    axis = -0.5 + (np.arange(q) + 0.5) / q
    if d == 1:
        return axis[:, None], 1.0 / q
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1), (1.0 / q) ** d


def convolve(oracle, kernel: Kernel, bw: BandwidthSpec, x) -> float:
    """(f * K_h)(x) by midpoint quadrature over the kernel support."""
    d = kernel.dimension
    q = 2048 if d == 1 else 512
    nodes, wq = _nodes(q, d)
    kv = np.asarray(kernel.evaluate(nodes[:, 0] if d == 1 else nodes)) * wq
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    u = x[None, :] - bw.scales(d)[None, :] * nodes
    fu = np.asarray(oracle.f(u[:, 0] if d == 1 else u), dtype=np.float64)
    return float(fu @ kv)


def _convolve_grid(oracle, kernel: Kernel, bw: BandwidthSpec, grid: np.ndarray) -> np.ndarray:
    d = kernel.dimension
    q = 2048 if d == 1 else 512
    nodes, wq = _nodes(q, d)
    kv = np.asarray(kernel.evaluate(nodes[:, 0] if d == 1 else nodes)) * wq
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim == 1:
        grid = grid[:, None]
    s = bw.scales(d)
    out = np.empty(grid.shape[0])
    for i, x in enumerate(grid):
        u = x[None, :] - s[None, :] * nodes
        fu = np.asarray(oracle.f(u[:, 0] if d == 1 else u), dtype=np.float64)
        out[i] = fu @ kv
    return out


def bias_sup(oracle, kernel: Kernel, bw: BandwidthSpec, grid) -> float:
    """max over the grid of |f * K_h - f|."""
    grid = np.asarray(grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("grid must be nonempty")
    conv = _convolve_grid(oracle, kernel, bw, grid)
    truth = np.asarray(
        oracle.f(grid if kernel.dimension > 1 or grid.ndim == 1 else grid[:, 0]),
        dtype=np.float64,
    )
    return float(np.max(np.abs(conv - truth)))


def bias_rate_fit(
    oracle, kernel: Kernel, h_list: Sequence[float], grid, zero_tol: float = 1e-12
) -> BiasCurve:
    """Log-log fit of sup bias against h; zero-bias rows are excluded and
    flagged, and the fit is refused when nothing remains."""
    hs = [float(h) for h in h_list]
    if len(hs) < 4 or any(b <= a for a, b in zip(hs, hs[1:])):
        raise ValueError("need >= 4 strictly increasing bandwidths")
    rows = [(h, bias_sup(oracle, kernel, BandwidthSpec(h=h), grid)) for h in hs]
    kept = [(h, b) for h, b in rows if b > zero_tol]
    excluded = tuple(h for h, b in rows if b <= zero_tol)
    if len(kept) < 2:
        raise ValueError("all bias rows are zero; rate fit refused")
    log_h = np.log([h for h, _ in kept])
    log_b = np.log([b for _, b in kept])
    slope, intercept = np.polyfit(log_h, log_b, 1)
    pred = slope * log_h + intercept
    ss_res = float(np.sum((log_b - pred) ** 2))
    ss_tot = float(np.sum((log_b - log_b.mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return BiasCurve(rows=tuple(rows), slope_fit=(float(slope), r2), excluded=excluded)
