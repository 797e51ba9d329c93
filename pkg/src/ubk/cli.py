"""Configuration-driven experiment runner with CSV reports.

Usage: ``ubk <command> --config <file> [--seed N] [--check] [--out DIR]``

Configs are flat ``key = value`` lines with ``#`` comments.  Exit codes:
0 success, 1 invalid config, 2 failed check in --check mode, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np

from . import experiments as xp
from .simulate import make_model
from .kernels import BUILTIN_NAMES

COMMANDS = ("density-rate", "consistency", "nw", "condcdf", "bias",
            "entropy", "symmetrize", "select")

# Pass/fail thresholds for the summary checks.  The consistency-style
# ceilings were frozen from pilot runs at the default seeds before the
# main build; the others restate fixed acceptance bands.
CHECKS = {
    "density-stability-ratio": 2.0,
    "density-stability-tau": 0.5,
    "halfpower-slope-lo": -0.33,
    "halfpower-slope-hi": -0.17,
    "density-consistency-final": 0.47,
    "nw-consistency-final": 0.22,
    "condcdf-consistency-final": 0.36,
    "bias-slope-triangular-lo": 0.95,
    "bias-slope-triangular-hi": 1.05,
    "bias-slope-bump-min": 1.8,
    "entropy-r2-min": 0.9,
    "entropy-nu-lo": 2.0,
    "entropy-nu-hi": 3.2,
    "symmetrize-r2-min": 0.8,
    "select-hit-rate-min": 0.99,
    "select-error-ratio-max": 1.5,
}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    command: str
    model: str
    kernel: str
    c: float = 2.0
    k_min: int = 10
    k_max: int = 15
    k_step: int = 1
    replicates: int = 100
    seed: int = 12345
    grid_points: int = 257
    p: Optional[float] = None
    h_cap: float = 1.0
    output_dir: str = "."


_INT_KEYS = {"k_step", "replicates", "seed", "grid_points"}
_FLOAT_KEYS = {"c", "p", "h_cap"}
_STR_KEYS = {"command", "model", "kernel", "output_dir"}
_ALL_KEYS = _INT_KEYS | _FLOAT_KEYS | _STR_KEYS | {"k_range"}


def parse_config(text: str, command: Optional[str] = None) -> ExperimentConfig:
    """Parse flat key=value config text; unknown or duplicate keys and
    type mismatches raise ConfigError naming the offending line."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        val = val.strip()
        if key not in _ALL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values or (key == "k_range" and ("k_min" in values)):
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key == "k_range":
                lo, _, hi = val.replace("..", ":").partition(":")
                values["k_min"] = int(lo)
                values["k_max"] = int(hi)
                values["k_range"] = True
            elif key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {val!r}") from exc
    values.pop("k_range", None)
    if command is not None:
        if "command" in values and values["command"] != command:
            raise ConfigError(
                f"config command {values['command']!r} does not match {command!r}")
        values["command"] = command
    for required in ("command", "model", "kernel"):
        if required not in values:
            raise ConfigError(f"missing required key {required!r}")
    cfg = ExperimentConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: ExperimentConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"unknown command {cfg.command!r}")
    try:
        make_model(cfg.model)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if cfg.kernel not in BUILTIN_NAMES:
        raise ConfigError(f"unknown kernel {cfg.kernel!r}")
    if cfg.k_min < 4:
        raise ConfigError("k_min must be >= 4")
    if cfg.k_max < cfg.k_min or cfg.k_step < 1:
        raise ConfigError("need k_max >= k_min and k_step >= 1")
    if cfg.replicates < 1:
        raise ConfigError("replicates must be >= 1")
    if cfg.grid_points < 2:
        raise ConfigError("grid_points must be >= 2")
    if not 0.0 < cfg.h_cap <= 2.0:
        raise ConfigError("h_cap must lie in (0, 2]")
    if cfg.p is not None and cfg.p <= 2:
        raise ConfigError("moment order p must exceed 2")
    if cfg.c <= 0:
        raise ConfigError("c must be positive")


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _summary_writer(out_dir: Path):
    entries = []

    def add(claim_id: str, measured, threshold: str, passed: bool) -> None:
        entries.append((claim_id, measured, threshold, passed))

    def flush() -> bool:
        _write_csv(out_dir / "summary.csv",
                   ["claim_id", "measured", "threshold", "pass"],
                   [(c, m, t, int(p)) for c, m, t, p in entries])
        for c, m, t, p in entries:
            print(f"{'PASS' if p else 'FAIL'}  {c}: measured={m} threshold={t}")
        return all(p for *_, p in entries)

    return add, flush


def _ks(cfg: ExperimentConfig) -> list[int]:
    return list(range(cfg.k_min, cfg.k_max + 1, cfg.k_step))


def _default_t_grid() -> np.ndarray:
    return np.linspace(-0.6, 0.85, 21)


def run_experiment(cfg: ExperimentConfig) -> int:
    """Run one command, write its CSVs and summary, and return the number
    of failed checks (0 when everything passed)."""
    out_dir = Path(cfg.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    add, flush = _summary_writer(out_dir)
    ks = _ks(cfg)

    if cfg.command == "density-rate":
        scan = xp.stability_scan("density", cfg.model, cfg.kernel, cfg.c, ks,
                                 cfg.replicates, cfg.seed, cfg.grid_points,
                                 h_cap=cfg.h_cap)
        _write_csv(out_dir / "density_rate.csv",
                   ["k", "n", "h", "j", "sup_dev", "normalized_stat"],
                   [(k, n, h, j, s, z) for k, n, h, j, s, z, _ in scan.rows])
        ratio = scan.stability_ratio()
        tau = scan.median_trend_tau()
        add("sup-stat-stability-ratio", ratio, f"< {CHECKS['density-stability-ratio']}",
            ratio < CHECKS["density-stability-ratio"])
        add("sup-stat-trend-tau", tau, f"<= {CHECKS['density-stability-tau']}",
            tau <= CHECKS["density-stability-tau"])
        rate = xp.halfpower_rate(cfg.model, cfg.kernel, ks, cfg.replicates,
                                 cfg.seed, cfg.grid_points)
        _write_csv(out_dir / "density_rate_halfpower.csv",
                   ["k", "n", "h", "j", "sup_dev", "normalized_stat"],
                   [(int(math.log2(n)), n, h, j, s, 0.0)
                    for j, (n, h, s) in enumerate(rate.rows)])
        lo, hi = CHECKS["halfpower-slope-lo"], CHECKS["halfpower-slope-hi"]
        add("halfpower-rate-slope", rate.slope, f"[{lo}, {hi}]", lo <= rate.slope <= hi)

    elif cfg.command == "consistency":
        curve = xp.consistency_curve("density", cfg.model, cfg.kernel, ks,
                                     cfg.replicates, cfg.seed, cfg.grid_points)
        _write_csv(out_dir / "consistency.csv", ["n", "h", "sup_err"],
                   [(n, h, s) for n, h, s, _ in curve.rows])
        decreasing = all(b < a for a, b in zip(curve.medians, curve.medians[1:]))
        add("consistency-monotone", curve.medians, "strictly decreasing", decreasing)
        thr = CHECKS["density-consistency-final"]
        add("consistency-final", curve.medians[-1], f"< {thr}", curve.medians[-1] < thr)

    elif cfg.command in ("nw", "condcdf"):
        gamma = 1.0 if cfg.p is None else 1.0 - 2.0 / cfg.p
        mode = "regression" if cfg.command == "nw" else "condcdf"
        t_grid = _default_t_grid() if mode == "condcdf" else None
        scan = xp.stability_scan(mode, cfg.model, cfg.kernel, cfg.c, ks,
                                 cfg.replicates, cfg.seed, cfg.grid_points,
                                 gamma=gamma, t_grid=t_grid)
        curve = xp.consistency_curve(mode, cfg.model, cfg.kernel, [max(ks)],
                                     cfg.replicates, cfg.seed, cfg.grid_points,
                                     gamma=gamma, t_grid=t_grid)
        _write_csv(out_dir / f"{cfg.command}.csv",
                   ["n", "h", "sup_err", "undefined_count"], curve.rows)
        ratio = scan.stability_ratio()
        tau = scan.median_trend_tau()
        add(f"{cfg.command}-stability-ratio", ratio,
            f"< {CHECKS['density-stability-ratio']}",
            ratio < CHECKS["density-stability-ratio"])
        add(f"{cfg.command}-trend-tau", tau, f"<= {CHECKS['density-stability-tau']}",
            tau <= CHECKS["density-stability-tau"])
        thr = CHECKS[f"{cfg.command}-consistency-final"]
        add(f"{cfg.command}-consistency-final", curve.medians[-1], f"< {thr}",
            curve.medians[-1] < thr)

    elif cfg.command == "bias":
        curve = xp.bias_experiment(cfg.model, cfg.kernel)
        _write_csv(out_dir / "bias.csv", ["h", "sup_bias"], curve.rows)
        slope = curve.slope_fit[0]
        if cfg.model == "bump":
            thr = CHECKS["bias-slope-bump-min"]
            add("bias-rate-slope", slope, f">= {thr}", slope >= thr)
        else:
            lo, hi = CHECKS["bias-slope-triangular-lo"], CHECKS["bias-slope-triangular-hi"]
            add("bias-rate-slope", slope, f"[{lo}, {hi}]", lo <= slope <= hi)

    elif cfg.command == "entropy":
        result = xp.entropy_experiment(cfg.kernel, cfg.seed)
        _write_csv(out_dir / "entropy.csv", ["epsilon", "count"], result.curve)
        counts = [c for _, c in result.curve]
        add("entropy-monotone", counts, "nondecreasing as epsilon shrinks",
            all(b >= a for a, b in zip(counts, counts[1:])))
        r2 = result.fit["r_squared"]
        add("entropy-fit-r2", r2, f"> {CHECKS['entropy-r2-min']}",
            isinstance(r2, float) and r2 > CHECKS["entropy-r2-min"])
        nu = result.fit["nu_hat"]
        lo, hi = CHECKS["entropy-nu-lo"], CHECKS["entropy-nu-hi"]
        add("entropy-nu-band", nu, f"[{lo}, {hi}]", lo <= nu <= hi)

    elif cfg.command == "symmetrize":
        scan = xp.symmetrize_scan(cfg.model, cfg.kernel, ks, cfg.c, cfg.seed,
                                  h_cap=cfg.h_cap)
        _write_csv(out_dir / "symmetrize.csv",
                   ["n", "h", "rademacher_sup", "sigma0_sq", "U"], scan.rows)
        add("symmetrize-shape-r2", scan.shape_r2, f"> {CHECKS['symmetrize-r2-min']}",
            scan.shape_r2 > CHECKS["symmetrize-r2-min"])

    elif cfg.command == "select":
        study = xp.select_experiment(cfg.model, cfg.kernel, 2**cfg.k_min,
                                     cfg.replicates, cfg.seed, c=cfg.c)
        _write_csv(out_dir / "select.csv", ["replicate", "selected_h", "clamped"],
                   [(r, h, int(cl)) for r, h, cl in study.rows])
        thr = CHECKS["select-hit-rate-min"]
        add("select-plugin-hit-rate", study.plugin_hit_rate, f">= {thr}",
            study.plugin_hit_rate >= thr)
        add("select-lscv-hit-rate", study.lscv_hit_rate, f">= {thr}",
            study.lscv_hit_rate >= thr)
        thr = CHECKS["select-error-ratio-max"]
        add("select-error-ratio", study.error_ratio_median, f"<= {thr}",
            study.error_ratio_median <= thr)

    ok = flush()
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="ubk", description=__doc__)
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--check", action="store_true")
    parser.add_argument("--out", default=None)
    args = parser.parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 3
    try:
        cfg = parse_config(text, command=args.command)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.out is not None:
        cfg = replace(cfg, output_dir=args.out)
    try:
        failures = run_experiment(cfg)
    except OSError as exc:
        print(f"error: I/O failure: {exc}", file=sys.stderr)
        return 3
    if args.check and failures:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
