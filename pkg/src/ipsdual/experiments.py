"""Duality reports and scaling-limit convergence tables."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import streams
from .diffusion import (
    BracoParams,
    FellerParams,
    SdeRun,
    braco_generator,
    pure_death_solution,
    simulate_braco,
    simulate_logistic_feller,
    simulate_logistic_feller_pair,
    simulate_resem_pair,
)
from .exactmarkov import count_generator, count_mean_path, evolve_distribution
from .graphical import RateSpec

__all__ = [
    "DualityReport",
    "ConvergenceTable",
    "tv_distance",
    "moment_duality_report",
    "laplace_duality_report",
    "braco_scaling_table",
    "feller_scaling_table",
    "pure_death_scaling",
    "braco_truncation",
]


@dataclass(frozen=True)
class DualityReport:
    lhs_estimate: float
    rhs_estimate: float
    lhs_se: float
    rhs_se: float
    bias_allowance: float = 0.0
    metadata: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        return abs(self.lhs_estimate - self.rhs_estimate)

    @property
    def tolerance(self) -> float:
        """``3 * combined SE + discretization allowance``."""
        return 3.0 * math.hypot(self.lhs_se, self.rhs_se) + self.bias_allowance

    @property
    def passed(self) -> bool:
        return self.gap <= self.tolerance

    def row(self) -> dict:
        return {
            "lhs": self.lhs_estimate,
            "lhs_se": self.lhs_se,
            "rhs": self.rhs_estimate,
            "rhs_se": self.rhs_se,
            "gap": self.gap,
            "bias_allowance": self.bias_allowance,
            "tolerance": self.tolerance,
            "pass": int(self.passed),
        }


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[tuple[int, float, float], ...]

    def __post_init__(self):
        sizes = [r[0] for r in self.rows]
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError("N must be strictly increasing across rows")

    @property
    def sizes(self) -> list[int]:
        return [r[0] for r in self.rows]

    @property
    def distances(self) -> list[float]:
        return [r[1] for r in self.rows]

    @property
    def monotone(self) -> bool:
        d = self.distances
        return all(b <= a for a, b in zip(d, d[1:]))

    @property
    def improved(self) -> bool:
        d = self.distances
        return len(d) < 2 or d[-1] < d[0] or max(d) == 0.0


def tv_distance(p, q) -> float:
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    size = max(p.size, q.size)
    p = np.pad(p, (0, size - p.size))
    q = np.pad(q, (0, size - q.size))
    return 0.5 * float(np.abs(p - q).sum())


def _mean_se(values: np.ndarray) -> tuple[float, float]:
    n = values.size
    se = float(values.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(values.mean()), se


def _blocked(sampler, reps: int, seed: int, tag: int) -> np.ndarray:
    parts = [sampler(streams.stream(seed, tag, b), size) for b, size in streams.blocks(reps)]
    return np.concatenate(parts) if parts else np.empty(0)


def _blocked_pair(sampler, reps, seed, tag):
    parts = [sampler(streams.stream(seed, tag, b), size) for b, size in streams.blocks(reps)]
    return np.concatenate([c for c, _ in parts]), np.concatenate([f for _, f in parts])


def _discretized_side(pair_sampler, functional, reps, seed, tag):
    """Mean and SE at step ``dt`` plus a bias allowance of ``2 |m_dt - m_dt/2|``
    (weak order one), both runs sharing Brownian increments."""
    coarse, fine = _blocked_pair(pair_sampler, reps, seed, tag)
    vc, vf = functional(coarse), functional(fine)
    mean, se = _mean_se(vc)
    diff = float(np.mean(vc - vf))
    return mean, se, 2.0 * abs(diff)


def moment_duality_report(
    p: BracoParams,
    n: int,
    y: float,
    t: float,
    reps: int = 100_000,
    dt: float = 1e-3,
    seed: int = streams.DEFAULT_SEED,
) -> DualityReport:
    """Monte Carlo check of ``E^n[(1-y)^X_t] = E^y[(1-Y_t)^n]`` between the
    branching-coalescing count ``X`` and the resampling-selection ``Y``."""
    if n < 0 or not 0.0 <= y <= 1.0:
        raise ValueError("need n >= 0 and y in [0, 1]")
    meta = {"kind": "moment", "b": p.b, "c": p.c, "d": p.d, "n": n, "y": y, "t": t,
            "reps": reps, "dt": dt, "seed": seed}
    if n == 0 or y == 0.0:
        return DualityReport(1.0, 1.0, 0.0, 0.0, 0.0, meta)
    xs = _blocked(lambda g, s: simulate_braco(p, n, t, g, size=s), reps, seed, streams.BRACO)
    lhs, lhs_se = _mean_se((1.0 - y) ** xs)
    run = SdeRun(t, dt)
    rhs, rhs_se, bias = _discretized_side(
        lambda g, s: simulate_resem_pair(p, y, run, g, s),
        lambda v: (1.0 - v) ** n,
        reps, seed, streams.RESEM,
    )
    return DualityReport(lhs, rhs, lhs_se, rhs_se, bias, meta)


def laplace_duality_report(
    p: FellerParams,
    r: float,
    x: float,
    y: float,
    t: float,
    reps: int = 100_000,
    dt: float = 1e-3,
    seed: int = streams.DEFAULT_SEED,
) -> DualityReport:
    """Monte Carlo check of ``E^x[exp(-r X_t y)] = E^y[exp(-r x Y_t)]`` with
    X logistic Feller ``(alpha, gamma, beta)`` and Y ``(alpha, r beta, gamma/r)``.

    When ``alpha = gamma = 0`` the right side is deterministic and is taken
    from the pure-death closed form.
    """
    if r <= 0 or x < 0 or y < 0:
        raise ValueError("need r > 0 and x, y >= 0")
    meta = {"kind": "laplace", "alpha": p.alpha, "gamma": p.gamma, "beta": p.beta,
            "r": r, "x": x, "y": y, "t": t, "reps": reps, "dt": dt, "seed": seed}
    if x == 0.0 or y == 0.0:
        return DualityReport(1.0, 1.0, 0.0, 0.0, 0.0, meta)
    run = SdeRun(t, dt)
    lhs, lhs_se, lhs_bias = _discretized_side(
        lambda g, s: simulate_logistic_feller_pair(p, x, run, g, s),
        lambda v: np.exp(-r * v * y),
        reps, seed, streams.FELLER_X,
    )
    q = p.dual(r)
    if p.alpha == 0.0 and p.gamma == 0.0:
        rhs = math.exp(-r * x * pure_death_solution(y, q.gamma, t))
        return DualityReport(lhs, rhs, lhs_se, 0.0, lhs_bias, meta)
    rhs, rhs_se, rhs_bias = _discretized_side(
        lambda g, s: simulate_logistic_feller_pair(q, y, run, g, s),
        lambda v: np.exp(-r * x * v),
        reps, seed, streams.FELLER_Y,
    )
    return DualityReport(lhs, rhs, lhs_se, rhs_se, lhs_bias + rhs_bias, meta)


def braco_truncation(p: BracoParams, n: int, t: float, tail: float = 1e-10) -> int:
    """Smallest level ``K`` the dominating pure-birth process started at ``n``
    exceeds by time ``t`` with probability below ``tail``.

    The Yule count minus ``n`` is negative binomial with success
    probability ``exp(-b t)``.
    """
    if n == 0 or p.b == 0 or t == 0:
        return max(n, 1)
    extra = stats.nbinom.isf(tail, n, math.exp(-p.b * t))
    return int(n + extra + 1)


def braco_scaling_table(
    N_list, n: int, u: float, e: float, beta: float, c: float, t: float
) -> ConvergenceTable:
    """TV distance between the exact count law at ``N`` (coalescence rate
    ``gamma = cN``) and the exact braco law with ``b = u + beta``,
    ``d = e + beta``, coalescence ``c``."""
    N_list = sorted(N_list)
    if n > N_list[0]:
        raise ValueError("n must not exceed the smallest N")
    p = BracoParams(u + beta, c, e + beta)
    K = braco_truncation(p, n, t)
    start = np.zeros(K + 1)
    start[n] = 1.0
    ref = evolve_distribution(braco_generator(p, K), start, t, renormalize=False)
    rows = []
    for N in N_list:
        t0 = time.perf_counter()
        p0 = np.zeros(N + 1)
        p0[n] = 1.0
        law = evolve_distribution(count_generator(N, RateSpec(u, e, c * N, beta)), p0, t)
        rows.append((N, tv_distance(law, ref), time.perf_counter() - t0))
    return ConvergenceTable(tuple(rows))


def feller_scaling_table(
    N_list,
    x: float,
    alpha: float,
    gamma: float,
    beta: float,
    t: float,
    e0: float = 0.5,
    reference_reps: int = 200_000,
    dt: float = 1e-3,
    seed: int = streams.DEFAULT_SEED,
) -> ConvergenceTable:
    """Wasserstein-1 distance between ``|X_{t sqrt N}| / sqrt N`` and a Monte
    Carlo sample of the logistic Feller diffusion ``(alpha, gamma, beta)``.

    The chain uses ``e = e0 / sqrt N`` and ``u = e + alpha / sqrt N`` so that
    ``(u - e) sqrt N = alpha`` while both vanish.
    """
    N_list = sorted(N_list)
    if x < 0:
        raise ValueError("x must be >= 0")
    if x == 0.0:
        return ConvergenceTable(tuple((N, 0.0, 0.0) for N in N_list))
    ref = _blocked(
        lambda g, s: simulate_logistic_feller(
            FellerParams(alpha, gamma, beta), x, SdeRun(t, dt), g, size=s
        ),
        reference_reps, seed, streams.REFERENCE,
    )
    rows = []
    for N in N_list:
        t0 = time.perf_counter()
        root = math.sqrt(N)
        e = e0 / root
        u = e + alpha / root
        if u < 0:
            raise ValueError("alpha too negative for the chosen e0")
        n = int(math.floor(x * root))
        p0 = np.zeros(N + 1)
        p0[n] = 1.0
        law = evolve_distribution(count_generator(N, RateSpec(u, e, gamma, beta)), p0, t * root)
        support = np.arange(N + 1) / root
        d = stats.wasserstein_distance(support, ref, u_weights=law)
        rows.append((N, float(d), time.perf_counter() - t0))
    return ConvergenceTable(tuple(rows))


def pure_death_scaling(N_list, beta: float, y: float, t_grid) -> ConvergenceTable:
    """Sup over ``t_grid`` of ``|E|Y_{t sqrt N}| / sqrt N - y_t|`` for the pure
    death chain ``k -> k-1`` at rate ``beta k (k-1) / N``."""
    t_grid = sorted(float(s) for s in t_grid)
    rows = []
    for N in sorted(N_list):
        t0 = time.perf_counter()
        root = math.sqrt(N)
        k0 = int(math.floor(y * root))
        means = count_mean_path(N, RateSpec(gamma=beta), k0, [s * root for s in t_grid])
        exact = np.array([pure_death_solution(y, beta, s) for s in t_grid])
        rows.append((N, float(np.max(np.abs(means / root - exact))), time.perf_counter() - t0))
    return ConvergenceTable(tuple(rows))
