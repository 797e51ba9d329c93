"""Synthetic models with analytic truth oracles and splittable randomness.

Random draws use counter-based Philox substreams keyed by
(master seed, replicate index), so replicates are reproducible
independently of execution order or worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .estimators import PairedSample, Sample

DEFAULT_INTERVAL = (-0.5, 0.5)  # evaluation interval I per axis
DEFAULT_J_MARGIN = 0.25


def substream(seed: int, *indices: int) -> np.random.Generator:
    """Deterministic Philox substream for (seed, *indices)."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(i) for i in indices))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class TruthOracle:
    f: Callable[[np.ndarray], np.ndarray]
    cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    inv_cdf: Optional[Callable[[np.ndarray], np.ndarray]] = None
    m: Optional[Callable[[np.ndarray], np.ndarray]] = None
    cond_cdf: Optional[Callable[[float, np.ndarray], np.ndarray]] = None
    J_margin: float = DEFAULT_J_MARGIN
    lipschitz_const: Optional[float] = None
    f_floor: float = 0.0  # min of f over J = I^margin
    support: tuple[float, float] = (-1.0, 1.0)


@dataclass(frozen=True)
class ResponseRegime:
    kind: str  # "none" | "bounded" | "moment"
    M: Optional[float] = None  # bound for the bounded regime
    noise_width: Optional[float] = None  # uniform noise half-width
    p: Optional[float] = None  # guaranteed moment order
    tail_index: Optional[float] = None  # Pareto tail (moments < tail_index)
    scale: Optional[float] = None


@dataclass(frozen=True)
class Model:
    name: str
    d: int
    oracle: TruthOracle
    response_regime: ResponseRegime = field(
        default_factory=lambda: ResponseRegime("none")
    )


# ---------------------------------------------------------------------------
# Shipped densities on [-1, 1].


def _uniform_oracle() -> TruthOracle:
    return TruthOracle(
        f=lambda x: np.where(np.abs(x) <= 1.0, 0.5, 0.0),
        cdf=lambda x: np.clip((np.asarray(x) + 1.0) / 2.0, 0.0, 1.0),
        inv_cdf=lambda u: 2.0 * np.asarray(u) - 1.0,
        lipschitz_const=0.0,
        f_floor=0.5,
    )


def _triangular_cdf(x):
    x = np.asarray(x, dtype=np.float64)
    left = 0.5 * (1.0 + x) ** 2
    right = 1.0 - 0.5 * (1.0 - x) ** 2
    return np.clip(np.where(x < 0.0, left, right), 0.0, 1.0)


def _triangular_inv(u):
    u = np.asarray(u, dtype=np.float64)
    return np.where(u < 0.5, np.sqrt(2.0 * u) - 1.0, 1.0 - np.sqrt(2.0 * (1.0 - u)))


def _triangular_oracle() -> TruthOracle:
    return TruthOracle(
        f=lambda x: np.maximum(1.0 - np.abs(x), 0.0),
        cdf=_triangular_cdf,
        inv_cdf=_triangular_inv,
        lipschitz_const=1.0,
        f_floor=0.25,
    )


def _bump_pdf(x):
    x = np.asarray(x, dtype=np.float64)
    q = 1.0 - x * x
    return np.where(np.abs(x) <= 1.0, 0.9375 * q * q, 0.0)


def _bump_cdf(x):
    x = np.clip(np.asarray(x, dtype=np.float64), -1.0, 1.0)
    # integral of 15/16 (1 - t^2)^2 from -1 to x
    return 0.9375 * (x - 2.0 * x**3 / 3.0 + x**5 / 5.0) + 0.5


def _bump_inv(u):
    u = np.asarray(u, dtype=np.float64)
    grid = np.linspace(-1.0, 1.0, 16385)
    x = np.interp(u, _bump_cdf(grid), grid)
    for _ in range(3):  # Newton refinement on the closed-form CDF
        fx = np.maximum(_bump_pdf(x), 1e-12)
        x = np.clip(x - (_bump_cdf(x) - u) / fx, -1.0, 1.0)
    return x


def _bump_oracle() -> TruthOracle:
    return TruthOracle(
        f=_bump_pdf,
        cdf=_bump_cdf,
        inv_cdf=_bump_inv,
        lipschitz_const=float(0.9375 * 8.0 / (3.0 * math.sqrt(3.0))),
        f_floor=float(_bump_pdf(0.75)),
    )


def _product_triangular_oracle() -> TruthOracle:
    tri = _triangular_oracle()

    def f(x):
        x = np.asarray(x, dtype=np.float64)
        return tri.f(x[..., 0]) * tri.f(x[..., 1])

    return TruthOracle(
        f=f,
        inv_cdf=tri.inv_cdf,  # per-axis inverse; axes are independent
        lipschitz_const=1.0,
        f_floor=0.25**2,
    )


def _with_regression(
    oracle: TruthOracle, m: Callable, regime: ResponseRegime
) -> TruthOracle:
    cond = None
    if regime.kind == "bounded" and regime.noise_width and regime.noise_width > 0:
        w = regime.noise_width

        def cond(t, x):
            return np.clip((t - m(np.asarray(x)) + w) / (2.0 * w), 0.0, 1.0)

    elif regime.kind == "bounded":

        def cond(t, x):
            return (m(np.asarray(x)) <= t).astype(np.float64)

    return TruthOracle(
        f=oracle.f,
        cdf=oracle.cdf,
        inv_cdf=oracle.inv_cdf,
        m=m,
        cond_cdf=cond,
        J_margin=oracle.J_margin,
        lipschitz_const=oracle.lipschitz_const,
        f_floor=oracle.f_floor,
        support=oracle.support,
    )


_DENSITY_ORACLES = {
    "uniform": (_uniform_oracle, 1),
    "triangular": (_triangular_oracle, 1),
    "bump": (_bump_oracle, 1),
    "triangular2d": (_product_triangular_oracle, 2),
}

_REGRESSIONS = {
    "square": lambda x: np.asarray(x) ** 2,
    "sin3": lambda x: np.sin(3.0 * np.asarray(x)),
}


def make_model(name: str) -> Model:
    """Model registry.

    Density-only models: uniform, triangular, bump, triangular2d.
    Regression models: "<density>-<m>-bounded" with uniform noise of
    half-width 0.5, and "<density>-<m>-heavy" with symmetrized Pareto
    noise (tail index 4, so third moments are finite, fourth are not).
    """
    if name in _DENSITY_ORACLES:
        factory, d = _DENSITY_ORACLES[name]
        return Model(name=name, d=d, oracle=factory())
    parts = name.split("-")
    if len(parts) == 3 and parts[0] in _DENSITY_ORACLES and parts[1] in _REGRESSIONS:
        factory, d = _DENSITY_ORACLES[parts[0]]
        if d != 1:
            raise ValueError("regression models are one-dimensional")
        m = _REGRESSIONS[parts[1]]
        if parts[2] == "bounded":
            width = 0.5
            m_bound = 1.0 + width  # sup |m| on [-1, 1] is <= 1 for both truths
            regime = ResponseRegime("bounded", M=m_bound, noise_width=width)
        elif parts[2] == "heavy":
            regime = ResponseRegime("moment", p=3.0, tail_index=4.0, scale=0.5)
        else:
            raise ValueError(f"unknown response regime {parts[2]!r}")
        return Model(name=name, d=d, oracle=_with_regression(factory(), m, regime),
                     response_regime=regime)
    raise ValueError(f"unknown model {name!r}")


def model_truth(model: Model) -> TruthOracle:
    return model.oracle


def draw_density_sample(model: Model, n: int, seed: int, replicate: int = 0) -> Sample:
    """n i.i.d. covariate draws by inverse CDF, deterministic per
    (seed, replicate)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if model.oracle.inv_cdf is None:
        raise ValueError(f"model {model.name!r} lacks an inverse CDF")
    gen = substream(seed, replicate)
    u = gen.random((n, model.d))
    pts = model.oracle.inv_cdf(u)
    return Sample(points=pts.reshape(n, model.d))


def _pareto_noise(gen: np.random.Generator, n: int, regime: ResponseRegime) -> np.ndarray:
    u = gen.random(n)
    mag = (1.0 - u) ** (-1.0 / regime.tail_index) - 1.0
    signs = np.where(gen.random(n) < 0.5, -1.0, 1.0)
    return regime.scale * signs * mag


def draw_regression_sample(
    model: Model, n: int, seed: int, replicate: int = 0
) -> PairedSample:
    """Draw X by inverse CDF then Y = m(X) + noise per the model regime."""
    regime = model.response_regime
    if regime.kind == "none":
        raise ValueError(f"model {model.name!r} has no response regime")
    sample = draw_density_sample(model, n, seed, replicate)
    gen = substream(seed, replicate, 1)
    x = sample.points[:, 0]
    if regime.kind == "bounded":
        noise = (2.0 * gen.random(n) - 1.0) * (regime.noise_width or 0.0)
    else:
        noise = _pareto_noise(gen, n, regime)
    return PairedSample(base=sample, responses=model.oracle.m(x) + noise)


def pareto_abs_moment(regime: ResponseRegime, q: float) -> float:
    """Closed-form E|noise|^q for the symmetrized Pareto regime (q integer
    below the tail index)."""
    a = regime.tail_index
    if q >= a:
        return math.inf
    # |noise|/scale ~ Lomax(a): E U^q = q! / prod_{i=1..q} (a - i)
    num = math.factorial(int(q))
    den = 1.0
    for i in range(1, int(q) + 1):
        den *= a - i
    return (regime.scale**q) * num / den
