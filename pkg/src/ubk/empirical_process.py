"""Monte Carlo symmetrized suprema and empirical covering numbers.

Function classes are finite grids of kernel-window functions; members are
callables ``g(x, y=None) -> values`` over arrays of data points.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .estimators import PairedSample, Sample, UNDEFINED
from .kernels import Kernel
from .simulate import substream


@dataclass(frozen=True)
class FunctionClassGrid:
    members: tuple[Callable, ...]
    envelope_bound: float

    def __post_init__(self):
        if not self.members:
            raise ValueError("function class must be nonempty")


def kernel_class_grid(
    kernel: Kernel,
    x_values: Sequence[float],
    h_values: Sequence[float],
    phi: Optional[Callable] = None,
    c_phi: Optional[Callable] = None,
    phi_bound: float = 1.0,
) -> FunctionClassGrid:
    """Finite grid {(u, v) -> c(x) phi(v) K((x - u)/h^(1/d))} over x and h."""
    if kernel.dimension != 1:
        raise ValueError("class grids are implemented for d = 1")
    members = []
    c_max = 0.0
    for x0 in x_values:
        c_val = float(c_phi(x0)) if c_phi is not None else 1.0
        c_max = max(c_max, abs(c_val))
        for h in h_values:
            scale = float(h)  # d = 1: per-axis scale equals h

            def member(x, y=None, _x0=float(x0), _c=c_val, _s=scale):
                x = np.asarray(x, dtype=np.float64)
                vals = np.asarray(kernel.evaluate((_x0 - x) / _s))
                if phi is not None:
                    if y is None:
                        raise ValueError("this member requires responses")
                    vals = vals * np.asarray(phi(np.asarray(y)))
                return _c * vals

            members.append(member)
    return FunctionClassGrid(
        members=tuple(members),
        envelope_bound=kernel.kappa * (c_max if c_phi is not None else 1.0) * phi_bound,
    )


def _data_arrays(sample) -> tuple[np.ndarray, Optional[np.ndarray]]:
    if isinstance(sample, PairedSample):
        return sample.base.points[:, 0], sample.responses
    if isinstance(sample, Sample):
        return sample.points[:, 0], None
    raise TypeError("expected Sample or PairedSample")


def member_matrix(sample, cls: FunctionClassGrid) -> np.ndarray:
    """(members, n) evaluations of every class member on the sample."""
    x, y = _data_arrays(sample)
    return np.stack([np.asarray(g(x, y), dtype=np.float64) for g in cls.members])


def rademacher_sup(sample, cls: FunctionClassGrid, draws: int, seed: int) -> float:
    """Average over sign draws of max_g |sum_i eps_i g(Z_i)|.

    Each draw uses its own counter-based substream, so the result is
    independent of evaluation order."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    G = member_matrix(sample, cls)
    n = G.shape[1]
    total = 0.0
    for j in range(draws):
        gen = substream(seed, j)
        eps = np.where(gen.random(n) < 0.5, -1.0, 1.0)
        total += float(np.max(np.abs(G @ eps)))
    return total / draws


def variance_envelope(sample, cls: FunctionClassGrid) -> dict:
    """Empirical second-moment summaries of the class on the sample."""
    G = member_matrix(sample, cls)
    return {
        "sigma0_sq": float(np.max(np.mean(G * G, axis=1))),
        "beta_sq": cls.envelope_bound**2,
        "U": float(np.max(np.abs(G))),
    }


def _atom_matrix(cls: FunctionClassGrid, q_atoms) -> tuple[np.ndarray, np.ndarray]:
    if len(q_atoms) == 3:
        pts, resp, weights = q_atoms
    else:
        pts, weights = q_atoms
        resp = None
    weights = np.asarray(weights, dtype=np.float64)
    if not np.isclose(weights.sum(), 1.0, atol=1e-9):
        raise ValueError("atom weights must sum to 1")
    pts = np.asarray(pts, dtype=np.float64)
    M = np.stack([np.asarray(g(pts, resp), dtype=np.float64) for g in cls.members])
    return M, weights


def covering_number(cls: FunctionClassGrid, q_atoms, epsilon: float) -> int:
    """Greedy (farthest-point) upper bound on the number of closed
    L2(Q)-balls of radius envelope*epsilon covering the class, for one
    discrete measure Q."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    M, w = _atom_matrix(cls, q_atoms)
    radius = cls.envelope_bound * epsilon
    diff = M[:, None, :] - M[None, :, :]
    dist = np.sqrt(np.einsum("ijk,k->ij", diff * diff, w))
    m = M.shape[0]
    centers = [0]
    min_dist = dist[0].copy()
    while np.max(min_dist) > radius:
        c = int(np.argmax(min_dist))
        centers.append(c)
        min_dist = np.minimum(min_dist, dist[c])
    return len(centers)


def entropy_fit(curve: Sequence[tuple[float, int]]) -> dict:
    """Least-squares power-law fit of covering counts against 1/epsilon."""
    curve = list(curve)
    if len(curve) < 4:
        raise ValueError("need at least 4 (epsilon, count) points")
    eps = np.asarray([e for e, _ in curve], dtype=np.float64)
    counts = np.asarray([c for _, c in curve], dtype=np.float64)
    if np.any((eps <= 0) | (eps >= 1)) or np.any(counts < 1):
        raise ValueError("epsilons must lie in (0, 1) and counts be >= 1")
    if np.all(counts == counts[0]):
        return {"C_hat": float(counts[0]), "nu_hat": 0.0, "r_squared": UNDEFINED}
    lx = np.log(1.0 / eps)
    ly = np.log(counts)
    nu, intercept = np.polyfit(lx, ly, 1)
    pred = nu * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    return {
        "C_hat": float(np.exp(intercept)),
        "nu_hat": float(nu),
        "r_squared": 1.0 - ss_res / ss_tot,
    }
