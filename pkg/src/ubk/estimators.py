"""Kernel-type estimators, weighted processes and smoothed targets.

Point estimators return the distinguished ``UNDEFINED`` marker when their
denominator vanishes; grid evaluators mark those entries with NaN and the
callers count them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import core
from .kernels import BandwidthSpec, Kernel


class _Undefined:
    """Zero-denominator marker for ratio estimators."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


def is_undefined(value) -> bool:
    return value is UNDEFINED


@dataclass(frozen=True)
class Sample:
    points: np.ndarray  # (n, d)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("sample needs at least one d-vector point")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


@dataclass(frozen=True)
class PairedSample:
    base: Sample
    responses: np.ndarray  # (n,)

    def __post_init__(self):
        y = np.asarray(self.responses, dtype=np.float64)
        if y.shape != (self.base.n,):
            raise ValueError("responses length must equal the sample size")
        object.__setattr__(self, "responses", y)

    @property
    def n(self) -> int:
        return self.base.n

    @property
    def d(self) -> int:
        return self.base.d


@dataclass(frozen=True)
class WeightedProcessSpec:
    """One member of a finite weighted-process family.

    ``p`` is the response moment order (> 2) in the unbounded regime, or
    ``math.inf`` together with a bound ``M`` in the bounded regime.
    """

    phi: Callable[[np.ndarray], np.ndarray]
    envelope_F: Callable[[np.ndarray], np.ndarray]
    c_phi: Callable[[np.ndarray], np.ndarray]
    d_phi: Callable[[np.ndarray], np.ndarray]
    p: float = math.inf
    M: Optional[float] = None

    def __post_init__(self):
        if self.p <= 2:
            raise ValueError("moment order p must exceed 2 (or be inf)")


def _scaled_offsets(sample: Sample, kernel: Kernel, bw: BandwidthSpec, x) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (sample.d,) or sample.d != kernel.dimension:
        raise ValueError("point, sample and kernel dimensions must agree")
    return (x[None, :] - sample.points) / bw.scales(sample.d)[None, :]


def _weights(sample: Sample, kernel: Kernel, bw: BandwidthSpec, x) -> np.ndarray:
    u = _scaled_offsets(sample, kernel, bw, x)
    return np.asarray(kernel.evaluate(u[:, 0] if sample.d == 1 else u))


def density_estimate(sample: Sample, kernel: Kernel, bw: BandwidthSpec, x) -> float:
    """(nh)^-1 sum_i K((x - X_i) / h^(1/d))."""
    w = _weights(sample, kernel, bw, x)
    return float(w.sum() / (sample.n * bw.h))


def nw_estimate(ps: PairedSample, kernel: Kernel, bw: BandwidthSpec, x):
    """Kernel-weighted response average; UNDEFINED on a zero denominator."""
    w = _weights(ps.base, kernel, bw, x)
    den = w.sum()
    if den == 0.0:
        return UNDEFINED
    return float((w * ps.responses).sum() / den)


def cond_ecdf(ps: PairedSample, kernel: Kernel, bw: BandwidthSpec, t: float, z):
    """Kernel-weighted empirical CDF of Y given X near z."""
    w = _weights(ps.base, kernel, bw, z)
    den = w.sum()
    if den == 0.0:
        return UNDEFINED
    return float((w * (ps.responses <= t)).sum() / den)


def weighted_process(
    ps: PairedSample,
    spec: WeightedProcessSpec,
    kernel: Kernel,
    bw: BandwidthSpec,
    x,
    mask: Optional[np.ndarray] = None,
) -> float:
    """Un-normalized weighted sum sum_i (c(x) phi(Y_i) + d(x)) K(.).

    ``mask`` restricts the sum to a subset of indices; the full sum equals
    the sum of the two complementary-mask sums exactly.
    """
    w = _weights(ps.base, kernel, bw, x)
    x_arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    xq = x_arr[0] if ps.d == 1 else x_arr
    c = float(np.asarray(spec.c_phi(xq)))
    dv = float(np.asarray(spec.d_phi(xq)))
    terms = (c * np.asarray(spec.phi(ps.responses), dtype=np.float64) + dv) * w
    if mask is not None:
        terms = terms[np.asarray(mask, dtype=bool)]
    return float(terms.sum())


def truncation_threshold(p: float, k: int) -> float:
    return (2.0**k / k) ** (1.0 / p)


def truncation_split(
    ps: PairedSample, spec: WeightedProcessSpec, k: int
) -> tuple[np.ndarray, np.ndarray]:
    """Partition indices by the envelope of Y_i against (n_k/k)^(1/p)."""
    if not math.isfinite(spec.p):
        raise ValueError("truncation split requires a finite moment order p")
    if k < 1:
        raise ValueError("block index k must be >= 1")
    thr = truncation_threshold(spec.p, k)
    fv = np.asarray(spec.envelope_F(ps.responses), dtype=np.float64)
    low = fv < thr
    return low, ~low


# ---------------------------------------------------------------------------
# Smoothed (population) targets by deterministic quadrature.

_QUAD_NODES = 2048


def _quad_nodes(q: int = _QUAD_NODES) -> tuple[np.ndarray, float]:
    return -0.5 + (np.arange(q) + 0.5) / q, 1.0 / q


def smoothed_density_grid(oracle, kernel: Kernel, bw: BandwidthSpec, xs) -> np.ndarray:
    """f-bar(x, h) = (f * K_h)(x) on a grid of 1-d points."""
    if kernel.dimension != 1:
        raise ValueError("grid targets are implemented for d = 1")
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    v, wq = _quad_nodes()
    kv = np.asarray(kernel.evaluate(v)) * wq
    s = float(bw.scales(1)[0])
    return oracle.f(xs[:, None] - s * v[None, :]) @ kv


def smoothed_regression_grid(
    oracle, kernel: Kernel, bw: BandwidthSpec, xs
) -> tuple[np.ndarray, np.ndarray]:
    """(r-bar, f-bar) on a grid; the regression target is their ratio."""
    if kernel.dimension != 1:
        raise ValueError("grid targets are implemented for d = 1")
    xs = np.asarray(xs, dtype=np.float64).reshape(-1)
    v, wq = _quad_nodes()
    kv = np.asarray(kernel.evaluate(v)) * wq
    s = float(bw.scales(1)[0])
    u = xs[:, None] - s * v[None, :]
    fu = oracle.f(u)
    r_bar = (oracle.m(u) * fu) @ kv
    f_bar = fu @ kv
    return r_bar, f_bar


def smoothed_condcdf_grid(
    oracle, kernel: Kernel, bw: BandwidthSpec, zs, ts
) -> np.ndarray:
    """Population conditional CDF target on a (z, t) product grid.

    Returns the ratio E[K 1{Y <= t}] / E[K], which is a proper
    distribution function in t; entries where f-bar vanishes are NaN.
    """
    if kernel.dimension != 1:
        raise ValueError("grid targets are implemented for d = 1")
    zs = np.asarray(zs, dtype=np.float64).reshape(-1)
    ts = np.asarray(ts, dtype=np.float64).reshape(-1)
    v, wq = _quad_nodes()
    kv = np.asarray(kernel.evaluate(v)) * wq
    s = float(bw.scales(1)[0])
    u = zs[:, None] - s * v[None, :]
    fu = oracle.f(u)
    f_bar = fu @ kv
    out = np.empty((zs.shape[0], ts.shape[0]))
    for j, t in enumerate(ts):
        out[:, j] = (oracle.cond_cdf(t, u) * fu) @ kv
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.where(f_bar[:, None] > 0.0, out / f_bar[:, None], np.nan)
    return out


def smoothed_targets(oracle, kernel: Kernel, bw: BandwidthSpec, x, t=None) -> dict:
    """Single-point smoothed targets {f_bar, r_bar, F_cond}.

    Ratio targets are UNDEFINED where f-bar vanishes; r_bar/F_cond are
    None when the oracle lacks the corresponding truth.
    """
    d = kernel.dimension
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    v, wq = _quad_nodes()
    if d == 1:
        nodes = v[:, None]
        weights = np.asarray(kernel.evaluate(v)) * wq
    else:
        mesh = np.meshgrid(*([v] * d), indexing="ij")
        nodes = np.stack([m.ravel() for m in mesh], axis=-1)
        weights = np.asarray(kernel.evaluate(nodes)) * (wq**d)
    s = bw.scales(d)
    u = x[None, :] - s[None, :] * nodes
    uq = u[:, 0] if d == 1 else u
    fu = np.asarray(oracle.f(uq), dtype=np.float64)
    f_bar = float(fu @ weights)
    out = {"f_bar": f_bar, "r_bar": None, "F_cond": None}
    if getattr(oracle, "m", None) is not None:
        out["r_bar"] = float((np.asarray(oracle.m(uq)) * fu) @ weights)
    if t is not None and getattr(oracle, "cond_cdf", None) is not None:
        num = float((np.asarray(oracle.cond_cdf(t, uq)) * fu) @ weights)
        out["F_cond"] = num / f_bar if f_bar > 0.0 else UNDEFINED
    return out


# ---------------------------------------------------------------------------
# Batch evaluation over 1-d grids (hot path; dispatches to ubk.core).


@dataclass(frozen=True)
class SortedSample:
    """Covariates sorted ascending, with responses reordered to match."""

    x: np.ndarray
    y: Optional[np.ndarray] = None

    @classmethod
    def from_sample(cls, sample) -> "SortedSample":
        if isinstance(sample, PairedSample):
            pts = sample.base.points[:, 0]
            order = np.argsort(pts, kind="stable")
            return cls(np.ascontiguousarray(pts[order]),
                       np.ascontiguousarray(sample.responses[order]))
        pts = sample.points[:, 0]
        return cls(np.ascontiguousarray(np.sort(pts, kind="stable")))

    @property
    def n(self) -> int:
        return self.x.shape[0]


def density_grid(ss: SortedSample, kernel: Kernel, bw: BandwidthSpec, xs) -> np.ndarray:
    s = float(bw.scales(1)[0])
    sums = core.density_sums(kernel.kind, ss.x, np.asarray(xs, dtype=np.float64), s)
    return sums / (ss.n * bw.h)


def nw_grid(ss: SortedSample, kernel: Kernel, bw: BandwidthSpec, xs) -> np.ndarray:
    """Nadaraya-Watson on a grid; zero-denominator points are NaN."""
    s = float(bw.scales(1)[0])
    den, num = core.weighted_sums(kernel.kind, ss.x, ss.y,
                                  np.asarray(xs, dtype=np.float64), s)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den != 0.0, num / den, np.nan)


def cond_ecdf_grid(
    ss: SortedSample, kernel: Kernel, bw: BandwidthSpec, zs, ts
) -> np.ndarray:
    """Conditional ECDF on a (z, t) grid; zero-denominator rows are NaN."""
    s = float(bw.scales(1)[0])
    den, num = core.indicator_sums(kernel.kind, ss.x, ss.y,
                                   np.asarray(zs, dtype=np.float64), s,
                                   np.asarray(ts, dtype=np.float64))
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(den[:, None] != 0.0, num / den[:, None], np.nan)
