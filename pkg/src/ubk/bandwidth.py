"""Data-driven bandwidth selection clamped to the admissible range."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import core
from .estimators import (
    PairedSample,
    Sample,
    SortedSample,
    UNDEFINED,
    density_estimate,
    nw_estimate,
)
from .kernels import BandwidthSpec, Kernel

PLUGIN_RATE_EXPONENT = -0.2  # reference rate n^(-1/5) for d = 1
PLUGIN_FLOOR = 0.05


@dataclass(frozen=True)
class BandwidthRange:
    a_n: float
    b_n: float
    gamma: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.a_n < self.b_n <= 1.0:
            raise ValueError("need 0 < a_n < b_n <= 1")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must lie in (0, 1]")


def bandwidth_range(n: int, c: float, gamma: float = 1.0,
                    b_exponent: float = -0.1) -> BandwidthRange:
    """a_n = c (log n / n)^gamma with b_n = n^b_exponent."""
    a_n = c * (math.log(n) / n) ** gamma
    return BandwidthRange(a_n=a_n, b_n=n**b_exponent, gamma=gamma, c=c)


def lscv_score(sample: Sample, kernel: Kernel, h: float, quad_points: int = 2048) -> float:
    """Least-squares cross-validation score
    integral(fhat^2) - (2/n) sum_i fhat_leave_one_out(X_i)."""
    n = sample.n
    ss = SortedSample.from_sample(sample)
    s = h  # d = 1
    lo = ss.x[0] - 0.5 * s
    hi = ss.x[-1] + 0.5 * s
    grid = lo + (np.arange(quad_points) + 0.5) * (hi - lo) / quad_points
    fhat = core.density_sums(kernel.kind, ss.x, grid, s) / (n * h)
    integral_sq = float(np.sum(fhat * fhat) * (hi - lo) / quad_points)
    pair = core.pair_sum(kernel.kind, ss.x, s)
    k_zero = float(np.asarray(kernel.evaluate(np.zeros(1)))[0])
    loo_sum = (pair - n * k_zero) / ((n - 1) * h)
    return integral_sq - 2.0 * loo_sum / n


def lscv_bandwidth(sample: Sample, kernel: Kernel, h_grid: Sequence[float]) -> float:
    """Grid argmin of the LSCV score; ties break toward the smaller h."""
    if sample.n < 3:
        raise ValueError("LSCV needs n >= 3")
    if sample.d != 1 or kernel.dimension != 1:
        raise ValueError("LSCV selector is implemented for d = 1")
    hs = sorted(float(h) for h in h_grid)
    if not hs:
        raise ValueError("h grid must be nonempty")
    scores = [lscv_score(sample, kernel, h) for h in hs]
    best = min(range(len(hs)), key=lambda i: (scores[i], hs[i]))
    return hs[best]


def local_plugin_bandwidth(
    sample: Sample, kernel: Kernel, x, pilot_h: float
) -> float:
    """n^(-1/5) * Chat(x) with Chat = (pilot density or floor)^(-1/5)."""
    if pilot_h <= 0:
        raise ValueError("pilot bandwidth must be positive")
    f_pilot = density_estimate(sample, kernel, BandwidthSpec(h=pilot_h), x)
    c_hat = max(f_pilot, PLUGIN_FLOOR) ** PLUGIN_RATE_EXPONENT
    return sample.n**PLUGIN_RATE_EXPONENT * c_hat


def clamp_bandwidth(h: float, rng: BandwidthRange) -> tuple[float, bool]:
    clamped = min(max(h, rng.a_n), rng.b_n)
    return clamped, clamped != h


def variable_bandwidth_estimate(
    sample,
    kernel: Kernel,
    h_of_x: Callable[[float], float],
    rng: BandwidthRange,
    x,
    mode: str,
):
    """Evaluate the mode's estimator at x with the local, clamped
    bandwidth; the value depends on h_of_x only through h_of_x(x)."""
    if mode not in ("density", "regression"):
        raise ValueError(f"unknown mode {mode!r}")
    h, _ = clamp_bandwidth(float(h_of_x(x)), rng)
    bw = BandwidthSpec(h=h)
    if mode == "density":
        base = sample.base if isinstance(sample, PairedSample) else sample
        return density_estimate(base, kernel, bw, x)
    if not isinstance(sample, PairedSample):
        raise ValueError("regression mode needs a paired sample")
    return nw_estimate(sample, kernel, bw, x)
