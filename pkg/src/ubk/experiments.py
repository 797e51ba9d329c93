"""Seeded Monte Carlo studies tying estimators, deviations and selectors
together; used by the command-line runner and the acceptance suite."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import stats as sps

from . import bandwidth as bwsel
from . import bias as bias_mod
from . import deviation as dev
from . import empirical_process as ep
from . import simulate as sim
from .estimators import SortedSample, density_grid, nw_grid
from .kernels import BandwidthSpec, kernel

INTERVAL = sim.DEFAULT_INTERVAL


def eval_grid(points: int) -> np.ndarray:
    return np.linspace(INTERVAL[0], INTERVAL[1], points)


def _rep_key(k: int, rep: int) -> int:
    # decouple replicate substreams across block sizes
    return (k << 20) + rep


# ---------------------------------------------------------------------------
# Dyadic-block stability scans (normalized sup statistics).


@dataclass
class StabilityScan:
    rows: list = field(default_factory=list)  # (k, n, h, j, sup_dev, norm_stat, undef)
    stats_by_k: dict = field(default_factory=dict)  # k -> per-replicate statistic
    undefined_by_k: dict = field(default_factory=dict)  # k -> per-replicate counts

    def percentile_by_k(self, q: float) -> dict:
        return {k: float(np.percentile(v, q)) for k, v in self.stats_by_k.items()}

    def median_by_k(self) -> dict:
        return {k: float(np.median(v)) for k, v in self.stats_by_k.items()}

    def stability_ratio(self, q: float = 95.0) -> float:
        per_k = self.percentile_by_k(q)
        vals = list(per_k.values())
        return max(vals) / min(vals)

    def median_trend_tau(self) -> float:
        med = self.median_by_k()
        ks = sorted(med)
        tau, _ = sps.kendalltau(ks, [med[k] for k in ks])
        return float(tau)


def stability_scan(
    mode: str,
    model_name: str,
    kernel_name: str,
    c: float,
    ks: Sequence[int],
    replicates: int,
    seed: int,
    grid_points: int,
    h_cap: Optional[float] = None,
    gamma: float = 1.0,
    t_grid: Optional[np.ndarray] = None,
) -> StabilityScan:
    """Per-block normalized sup statistics over replicated samples.

    ``h_cap`` defaults to 1 for the density mode and to n^(-1/10) per
    block size for the ratio modes (a vanishing upper range)."""
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    grid = eval_grid(grid_points)
    out = StabilityScan()
    for k in ks:
        n = 2**k
        cap = h_cap if h_cap is not None else (1.0 if mode == "density" else n**-0.1)
        blocks = dev.dyadic_grid(c, k, cap, gamma=gamma)
        targets: dict = {}
        stats = np.empty(replicates)
        undefs = np.empty(replicates, dtype=np.int64)
        for rep in range(replicates):
            if mode == "density":
                source = lambda nn: sim.draw_density_sample(
                    model, nn, seed, _rep_key(k, rep))
            else:
                source = lambda nn: sim.draw_regression_sample(
                    model, nn, seed, _rep_key(k, rep))
            report = dev.ub_statistic(source, kern, c, blocks, grid, mode,
                                      model.oracle, t_grid=t_grid, targets=targets)
            stats[rep] = report.statistic
            undefs[rep] = sum(r.undefined_count for r in report.rows)
            if rep == 0:
                for j, row in enumerate(report.rows):
                    out.rows.append((k, row.n, row.h, j, row.sup_dev,
                                     row.normalized_stat, row.undefined_count))
        out.stats_by_k[k] = stats
        out.undefined_by_k[k] = undefs
    return out


# ---------------------------------------------------------------------------
# Rate and consistency curves.


@dataclass
class RateCurve:
    ns: list
    medians: list
    slope: float
    rows: list  # (n, h, sup_err) medians per bandwidth


def _fit_slope(ns, medians) -> float:
    coef = np.polyfit(np.log(ns), np.log(medians), 1)
    return float(coef[0])


def halfpower_rate(
    model_name: str,
    kernel_name: str,
    ks: Sequence[int],
    replicates: int,
    seed: int,
    grid_points: int,
    h_points: int = 5,
) -> RateCurve:
    """Median sup deviation over h in [n^-1/2, 2 n^-1/2] against n."""
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    grid = eval_grid(grid_points)
    ns, medians, rows = [], [], []
    for k in ks:
        n = 2**k
        a = n**-0.5
        hs = np.geomspace(a, 2.0 * a, h_points)
        targets = {h: None for h in hs}
        sups = np.empty((replicates, h_points))
        for rep in range(replicates):
            sample = sim.draw_density_sample(model, n, seed, _rep_key(k, rep))
            ss = SortedSample.from_sample(sample)
            for i, h in enumerate(hs):
                bw = BandwidthSpec(h=float(h))
                if targets[h] is None:
                    from .estimators import smoothed_density_grid

                    targets[h] = smoothed_density_grid(model.oracle, kern, bw, grid)
                est = density_grid(ss, kern, bw, grid)
                sups[rep, i] = np.max(np.abs(est - targets[h]))
        per_rep = sups.max(axis=1)
        ns.append(n)
        medians.append(float(np.median(per_rep)))
        for i, h in enumerate(hs):
            rows.append((n, float(h), float(np.median(sups[:, i]))))
    return RateCurve(ns=ns, medians=medians, slope=_fit_slope(ns, medians), rows=rows)


@dataclass
class ConsistencyCurve:
    ns: list
    medians: list  # per-n median of sup over h of the sup error
    rows: list  # (n, h, median sup_err) and for ratio modes +undefined
    undefined_by_n: dict


def consistency_curve(
    mode: str,
    model_name: str,
    kernel_name: str,
    ks: Sequence[int],
    replicates: int,
    seed: int,
    grid_points: int,
    a_coeff: float = 4.0,
    gamma: float = 1.0,
    h_points: int = 8,
    t_grid: Optional[np.ndarray] = None,
) -> ConsistencyCurve:
    """Sup error against the analytic truth over h in [a_n, b_n] with
    a_n = a_coeff (log n / n)^gamma and b_n = n^(-1/10)."""
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    grid = eval_grid(grid_points)
    oracle = model.oracle
    ns, medians, rows = [], [], []
    undefined_by_n = {}
    if mode == "density":
        truth = oracle.f(grid)
    elif mode == "regression":
        truth = oracle.m(grid)
    elif mode == "condcdf":
        truth = np.stack([oracle.cond_cdf(t, grid) for t in t_grid], axis=1)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    for k in ks:
        n = 2**k
        a_n = a_coeff * (math.log(n) / n) ** gamma
        b_n = n**-0.1
        if a_n >= b_n:
            raise ValueError(f"empty range [a_n, b_n] at n={n}")
        hs = np.geomspace(a_n, b_n, h_points)
        sups = np.empty((replicates, h_points))
        undefs = np.zeros(replicates, dtype=np.int64)
        for rep in range(replicates):
            if mode == "density":
                sample = sim.draw_density_sample(model, n, seed, _rep_key(k, rep))
            else:
                sample = sim.draw_regression_sample(model, n, seed, _rep_key(k, rep))
            ss = SortedSample.from_sample(sample)
            for i, h in enumerate(hs):
                bw = BandwidthSpec(h=float(h))
                if mode == "density":
                    est = density_grid(ss, kern, bw, grid)
                elif mode == "regression":
                    est = nw_grid(ss, kern, bw, grid)
                else:
                    from .estimators import cond_ecdf_grid

                    est = cond_ecdf_grid(ss, kern, bw, grid, t_grid)
                diff = np.abs(est - truth)
                finite = diff[np.isfinite(diff)]
                undefs[rep] += int(np.sum(~np.isfinite(diff)))
                sups[rep, i] = np.max(finite) if finite.size else np.nan
        per_rep = np.nanmax(sups, axis=1)
        ns.append(n)
        medians.append(float(np.median(per_rep)))
        undefined_by_n[n] = undefs
        for i, h in enumerate(hs):
            rows.append((n, float(h), float(np.median(sups[:, i])),
                         int(np.sum(undefs)) if i == 0 else 0))
    return ConsistencyCurve(ns=ns, medians=medians, rows=rows,
                            undefined_by_n=undefined_by_n)


# ---------------------------------------------------------------------------
# Symmetrized supremum scan and the complexity shape fit.


@dataclass
class SymmetrizeScan:
    rows: list  # (n, h, rademacher_sup, sigma0_sq, U)
    shape_r2: float
    coeffs: tuple


def symmetrize_scan(
    model_name: str,
    kernel_name: str,
    ks: Sequence[int],
    c: float,
    seed: int,
    draws: int = 256,
    x_points: int = 15,
    h_per_block: int = 3,
    h_cap: float = 1.0,
) -> SymmetrizeScan:
    """Measured symmetrized suprema across dyadic blocks and the fit to
    the scaling form c1 sqrt(n h log(1/h v e)) + c2 log n."""
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    xs = eval_grid(x_points)
    rows = []
    for k in ks:
        n = 2**k
        blocks = dev.dyadic_grid(c, k, h_cap)
        sample = sim.draw_density_sample(model, n, seed, _rep_key(k, 0))
        for j, h in enumerate(blocks.h_list):
            h_hi = min(2.0 * h, h_cap)
            hs = np.geomspace(h, h_hi, h_per_block) if h_hi > h else [h]
            cls = ep.kernel_class_grid(kern, xs, hs)
            rsup = ep.rademacher_sup(sample, cls, draws, seed + j)
            env = ep.variance_envelope(sample, cls)
            rows.append((n, float(h), rsup, env["sigma0_sq"], env["U"]))
    arr = np.asarray([(r[0], r[1], r[2]) for r in rows])
    f1 = np.sqrt(arr[:, 0] * arr[:, 1] * np.log(np.maximum(1.0 / arr[:, 1], math.e)))
    f2 = np.log(arr[:, 0])
    design = np.stack([f1, f2], axis=1)
    coeffs, *_ = np.linalg.lstsq(design, arr[:, 2], rcond=None)
    pred = design @ coeffs
    ss_res = float(np.sum((arr[:, 2] - pred) ** 2))
    ss_tot = float(np.sum((arr[:, 2] - arr[:, 2].mean()) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return SymmetrizeScan(rows=rows, shape_r2=r2, coeffs=tuple(float(v) for v in coeffs))


# ---------------------------------------------------------------------------
# Entropy curve.


@dataclass
class EntropyCurve:
    curve: list  # (epsilon, count)
    fit: dict


def entropy_experiment(
    kernel_name: str = "box",
    seed: int = 0,
    n_atoms: int = 256,
    x_points: int = 48,
    h_values: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
    eps_list: Sequence[float] = (0.5, 0.35, 0.25, 0.18, 0.125, 0.09),
) -> EntropyCurve:
    """Covering-number curve of a kernel translate class over one
    discrete atom measure, with its power-law fit."""
    kern = kernel(kernel_name, 1)
    model = sim.make_model("uniform")
    atoms = sim.draw_density_sample(model, n_atoms, seed).points[:, 0]
    weights = np.full(n_atoms, 1.0 / n_atoms)
    cls = ep.kernel_class_grid(kern, eval_grid(x_points), h_values)
    curve = [(float(e), ep.covering_number(cls, (atoms, weights), float(e)))
             for e in eps_list]
    return EntropyCurve(curve=curve, fit=ep.entropy_fit(curve))


# ---------------------------------------------------------------------------
# Bandwidth selection study.


@dataclass
class SelectStudy:
    rows: list  # (replicate, selected_h, clamped)
    lscv_hit_rate: float
    plugin_hit_rate: float
    error_ratio_median: float


def select_experiment(
    model_name: str,
    kernel_name: str,
    n: int,
    replicates: int,
    seed: int,
    c: float = 2.0,
    grid_points: int = 33,
    h_grid: Optional[Sequence[float]] = None,
    pilot_h: float = 0.2,
) -> SelectStudy:
    """LSCV and plug-in selections, pre-clamp range hit rates, and the
    variable-vs-best-fixed sup error comparison on the same samples."""
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    rng = bwsel.bandwidth_range(n, c)
    if h_grid is None:
        h_grid = np.geomspace(max(rng.a_n, 0.02), rng.b_n, 8)
    grid = eval_grid(grid_points)
    truth = model.oracle.f(grid)
    rows = []
    lscv_hits = 0
    plugin_hits = 0
    plugin_total = 0
    ratios = []
    for rep in range(replicates):
        sample = sim.draw_density_sample(model, n, seed, rep)
        ss = SortedSample.from_sample(sample)
        h_sel = bwsel.lscv_bandwidth(sample, kern, h_grid)
        _, was_clamped = bwsel.clamp_bandwidth(h_sel, rng)
        rows.append((rep, float(h_sel), was_clamped))
        if rng.a_n <= h_sel <= rng.b_n:
            lscv_hits += 1
        h_local = np.asarray(
            [bwsel.local_plugin_bandwidth(sample, kern, x, pilot_h) for x in grid]
        )
        plugin_hits += int(np.sum((h_local >= rng.a_n) & (h_local <= rng.b_n)))
        plugin_total += grid.shape[0]
        var_est = np.asarray([
            bwsel.variable_bandwidth_estimate(
                sample, kern, lambda xx, hl=h_local: hl[np.argmin(np.abs(grid - xx))],
                rng, x, "density")
            for x in grid
        ])
        var_err = float(np.max(np.abs(var_est - truth)))
        fixed_errs = [
            float(np.max(np.abs(density_grid(ss, kern, BandwidthSpec(h=float(h)), grid)
                                - truth)))
            for h in h_grid
        ]
        ratios.append(var_err / min(fixed_errs))
    return SelectStudy(
        rows=rows,
        lscv_hit_rate=lscv_hits / replicates,
        plugin_hit_rate=plugin_hits / plugin_total,
        error_ratio_median=float(np.median(ratios)),
    )


# ---------------------------------------------------------------------------
# Bias study.


def bias_experiment(
    model_name: str,
    kernel_name: str,
    h_list: Sequence[float] = (0.05, 0.1, 0.2, 0.4),
    grid_points: int = 129,
):
    model = sim.make_model(model_name)
    kern = kernel(kernel_name, model.d)
    return bias_mod.bias_rate_fit(model.oracle, kern, h_list, eval_grid(grid_points))
