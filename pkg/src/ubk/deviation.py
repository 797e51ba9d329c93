"""Uniform-in-bandwidth normalized sup statistics over dyadic blocks."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .estimators import (
    PairedSample,
    SortedSample,
    UNDEFINED,
    cond_ecdf_grid,
    density_grid,
    nw_grid,
    smoothed_condcdf_grid,
    smoothed_density_grid,
    smoothed_regression_grid,
)
from .kernels import BandwidthSpec, Kernel


class RangeEmptyError(ValueError):
    """The requested bandwidth range contains no dyadic block."""


class DegenerateReportError(ValueError):
    """No grid point had both estimate and target defined."""


@dataclass(frozen=True)
class DyadicBlocks:
    """Doubling bandwidth blocks h_j = 2^j * c * (log(n)/n)^gamma."""

    c: float
    k: int
    h_list: tuple[float, ...]
    gamma: float = 1.0

    @property
    def n_k(self) -> int:
        return 2**self.k

    @property
    def l_k(self) -> int:
        return len(self.h_list) - 1


@dataclass(frozen=True)
class DeviationRow:
    n: int
    h: float
    sup_dev: float
    normalized_stat: float
    undefined_count: int


@dataclass(frozen=True)
class DeviationReport:
    rows: tuple[DeviationRow, ...]
    statistic: float
    slope_fit: Optional[tuple[float, float, float]] = None  # slope, intercept, r^2

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["n", "h", "sup_dev", "normalized_stat", "undefined_count"])
            for r in self.rows:
                writer.writerow([r.n, repr(r.h), repr(r.sup_dev),
                                 repr(r.normalized_stat), r.undefined_count])


def normalizer(n: int, h: float) -> float:
    """sqrt(n h / max(log(1/h), log log n)); natural logs, n >= 16."""
    if n < 16:
        raise ValueError("normalizer requires n >= 16")
    if not 0.0 < h <= 2.0:
        raise ValueError("bandwidth must lie in (0, 2]")
    return math.sqrt(n * h / max(math.log(1.0 / h), math.log(math.log(n))))


def dyadic_grid(c: float, k: int, h_cap: float, gamma: float = 1.0) -> DyadicBlocks:
    """Doubling blocks anchored at c*(log(n_k)/n_k)^gamma, capped at h_cap."""
    if c <= 0:
        raise ValueError("c must be positive")
    if k < 4:
        raise ValueError("k must be >= 4")
    if not 0.0 < h_cap <= 2.0:
        raise ValueError("h_cap must lie in (0, 2]")
    n_k = 2**k
    h0 = c * (math.log(n_k) / n_k) ** gamma
    if h0 > h_cap:
        raise RangeEmptyError(
            f"first block {h0:.6g} exceeds the cap {h_cap:.6g}; sample too small for c={c}"
        )
    hs = [h0]
    while hs[-1] * 2.0 <= h_cap:
        hs.append(hs[-1] * 2.0)
    return DyadicBlocks(c=c, k=k, h_list=tuple(hs), gamma=gamma)


def sup_deviation(
    estimate: Callable, target: Callable, grid: Sequence
) -> tuple[float, int]:
    """Finite-grid sup of |estimate - target| over points where both are
    defined; counts points where either is UNDEFINED."""
    grid = list(grid)
    if not grid:
        raise ValueError("grid must be nonempty")
    sup = -math.inf
    undefined = 0
    for x in grid:
        e = estimate(x)
        t = target(x)
        if e is UNDEFINED or t is UNDEFINED:
            undefined += 1
            continue
        sup = max(sup, abs(float(e) - float(t)))
    if sup == -math.inf:
        raise DegenerateReportError("every grid point was undefined")
    return sup, undefined


def _sup_dev_arrays(est: np.ndarray, tgt: np.ndarray) -> tuple[float, int]:
    """Array variant of sup_deviation; NaN entries count as undefined.

    For 2-d inputs (condcdf mode) an all-NaN row counts as one undefined
    location in z."""
    diff = np.abs(est - tgt)
    if diff.ndim == 2:
        row_ok = ~np.all(np.isnan(diff), axis=1)
        undefined = int(np.sum(~row_ok))
        finite = diff[np.isfinite(diff)]
    else:
        mask = np.isfinite(diff)
        undefined = int(np.sum(~mask))
        finite = diff[mask]
    if finite.size == 0:
        raise DegenerateReportError("every grid point was undefined")
    return float(np.max(finite)), undefined


def ub_statistic(
    sample_source: Callable[[int], object],
    kernel: Kernel,
    c: float,
    blocks: DyadicBlocks,
    x_grid: np.ndarray,
    mode: str,
    oracle,
    t_grid: Optional[np.ndarray] = None,
    targets: Optional[dict] = None,
) -> DeviationReport:
    """Per-block normalized sup deviation of an estimator against its
    smoothed target; the report statistic is the max over blocks.

    ``targets`` optionally caches per-h target arrays (keyed by h) so
    replicated runs do not redo the quadrature.
    """
    if mode not in ("density", "regression", "condcdf"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "condcdf" and t_grid is None:
        raise ValueError("condcdf mode needs a t grid")
    n = blocks.n_k
    sample = sample_source(n)
    ss = SortedSample.from_sample(sample)
    x_grid = np.asarray(x_grid, dtype=np.float64)
    rows = []
    for h in blocks.h_list:
        bw = BandwidthSpec(h=h)
        if mode == "density":
            est = density_grid(ss, kernel, bw, x_grid)
            if targets is not None and h in targets:
                tgt = targets[h]
            else:
                tgt = smoothed_density_grid(oracle, kernel, bw, x_grid)
                if targets is not None:
                    targets[h] = tgt
        elif mode == "regression":
            est = nw_grid(ss, kernel, bw, x_grid)
            if targets is not None and h in targets:
                tgt = targets[h]
            else:
                r_bar, f_bar = smoothed_regression_grid(oracle, kernel, bw, x_grid)
                with np.errstate(invalid="ignore", divide="ignore"):
                    tgt = np.where(f_bar > 0.0, r_bar / f_bar, np.nan)
                if targets is not None:
                    targets[h] = tgt
        else:
            est = cond_ecdf_grid(ss, kernel, bw, x_grid, t_grid)
            if targets is not None and h in targets:
                tgt = targets[h]
            else:
                tgt = smoothed_condcdf_grid(oracle, kernel, bw, x_grid, t_grid)
                if targets is not None:
                    targets[h] = tgt
        sup, undef = _sup_dev_arrays(est, tgt)
        rows.append(DeviationRow(n=n, h=h, sup_dev=sup,
                                 normalized_stat=sup * normalizer(n, h),
                                 undefined_count=undef))
    statistic = max(r.normalized_stat for r in rows)
    return DeviationReport(rows=tuple(rows), statistic=statistic)


def grid_spacing_ok(x_grid: np.ndarray, h_min: float, d: int = 1) -> bool:
    """Recommended sup-proxy rule: grid spacing <= h_min^(1/d) / 8."""
    xs = np.sort(np.asarray(x_grid, dtype=np.float64).reshape(-1))
    if xs.size < 2:
        return False
    return float(np.max(np.diff(xs))) <= h_min ** (1.0 / d) / 8.0
