"""Limit processes: branching-coalescing counts, the resampling-selection
diffusion, the logistic Feller diffusion and the pure-death ODE.

Simulators are vectorized over replicates: pass ``size`` to get an array
of independent end states, or leave it ``None`` for a scalar.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "BracoParams",
    "FellerParams",
    "SdeRun",
    "simulate_braco",
    "simulate_resem",
    "simulate_logistic_feller",
    "simulate_resem_pair",
    "simulate_logistic_feller_pair",
    "pure_death_solution",
    "feller_laplace_closed_form",
    "braco_generator",
]


@dataclass(frozen=True)
class BracoParams:
    """Branching rate ``b``, coalescence rate ``c`` (per ordered pair) and
    death rate ``d``."""

    b: float
    c: float
    d: float

    def __post_init__(self):
        for name in ("b", "c", "d"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")


@dataclass(frozen=True)
class FellerParams:
    """``dX = alpha X dt - gamma X^2 dt + sqrt(2 beta X) dB``."""

    alpha: float
    gamma: float
    beta: float

    def __post_init__(self):
        if self.gamma < 0 or self.beta < 0:
            raise ValueError("gamma and beta must be >= 0")

    def dual(self, r: float = 1.0) -> "FellerParams":
        if r <= 0:
            raise ValueError("r must be > 0")
        return FellerParams(self.alpha, r * self.beta, self.gamma / r)


@dataclass(frozen=True)
class SdeRun:
    """Euler-Maruyama run: the step is ``horizon / round(horizon / dt)``."""

    horizon: float
    dt: float = 1e-3

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be > 0")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if 0 < self.horizon < self.dt:
            raise ValueError("dt must not exceed the horizon")

    @property
    def steps(self) -> int:
        return max(1, round(self.horizon / self.dt)) if self.horizon > 0 else 0


def braco_generator(p: BracoParams, n_max: int):
    """Generator on {0..n_max}; births out of ``n_max`` leak (rows sum < 0)."""
    k = np.arange(n_max + 1, dtype=float)
    up = p.b * k
    down = (p.d + p.c * (k - 1)) * k
    down[0] = 0.0
    return sp.diags(
        [down[1:], -(up + down), up[:-1]], offsets=[-1, 0, 1], shape=(n_max + 1,) * 2
    ).tocsr()


def simulate_braco(p: BracoParams, n0: int, T: float, rng: np.random.Generator, size=None):
    """Exact event-driven simulation of the particle count at time ``T``.

    From ``k`` particles the next event comes after Exp(``bk + dk + ck(k-1)``);
    it is a birth with probability ``b / (b + d + c(k-1))``.
    """
    if n0 < 0:
        raise ValueError("n0 must be >= 0")
    reps = 1 if size is None else int(size)
    k = np.full(reps, int(n0), dtype=np.int64)
    t = np.zeros(reps)
    active = np.nonzero(k > 0)[0]
    while active.size:
        ka = k[active]
        per = p.b + p.d + p.c * (ka - 1)
        total = per * ka
        live = total > 0
        active, ka, per, total = active[live], ka[live], per[live], total[live]
        if not active.size:
            break
        t_new = t[active] + rng.exponential(size=active.size) / total
        go = t_new <= T
        active, ka, per, t_new = active[go], ka[go], per[go], t_new[go]
        birth = rng.random(active.size) * per < p.b
        k[active] = ka + np.where(birth, 1, -1)
        t[active] = t_new
        active = active[k[active] > 0]
    return int(k[0]) if size is None else k


def _euler_pair(drift, diffusion, lo, hi, x0, run: SdeRun, rng, reps):
    """Coupled Euler runs at steps ``h`` and ``h/2`` on one Brownian path.

    Returns ``(coarse, fine)`` end states.
    """
    coarse = np.full(reps, float(x0))
    fine = coarse.copy()
    n = run.steps
    if n == 0:
        return coarse, fine
    h = run.horizon / n
    half = h / 2
    sq = math.sqrt(half)
    for _ in range(n):
        dw = rng.standard_normal((2, reps)) * sq
        for w in dw:
            fine += drift(fine) * half + diffusion(fine) * w
            np.clip(fine, lo, hi, out=fine)
        coarse += drift(coarse) * h + diffusion(coarse) * (dw[0] + dw[1])
        np.clip(coarse, lo, hi, out=coarse)
    return coarse, fine


def _euler(drift, diffusion, lo, hi, x0, run: SdeRun, rng, reps):
    x = np.full(reps, float(x0))
    n = run.steps
    if n == 0:
        return x
    h = run.horizon / n
    sq = math.sqrt(h)
    for _ in range(n):
        x += drift(x) * h + diffusion(x) * (rng.standard_normal(reps) * sq)
        np.clip(x, lo, hi, out=x)
    return x


def _resem_terms(p: BracoParams):
    def drift(y):
        return (p.b - p.d) * y - p.b * y * y

    def diffusion(y):
        return np.sqrt(2.0 * p.c * np.clip(y, 0.0, None) * np.clip(1.0 - y, 0.0, None))

    return drift, diffusion


def _feller_terms(p: FellerParams):
    def drift(x):
        return p.alpha * x - p.gamma * x * x

    def diffusion(x):
        return np.sqrt(2.0 * p.beta * np.clip(x, 0.0, None))

    return drift, diffusion


def simulate_resem(p: BracoParams, y0: float, run: SdeRun, rng, size=None):
    """Euler-Maruyama for ``dY = (b-d)Y - bY^2 + sqrt(2cY(1-Y)) dB``,
    projected onto [0, 1] after every step."""
    if not 0.0 <= y0 <= 1.0:
        raise ValueError("y0 must lie in [0, 1]")
    out = _euler(*_resem_terms(p), 0.0, 1.0, y0, run, rng, 1 if size is None else size)
    return float(out[0]) if size is None else out


def simulate_resem_pair(p: BracoParams, y0: float, run: SdeRun, rng, size: int):
    if not 0.0 <= y0 <= 1.0:
        raise ValueError("y0 must lie in [0, 1]")
    return _euler_pair(*_resem_terms(p), 0.0, 1.0, y0, run, rng, size)


def simulate_logistic_feller(p: FellerParams, x0: float, run: SdeRun, rng, size=None):
    """Euler-Maruyama for ``dX = aX - gX^2 + sqrt(2 beta X) dB``,
    projected onto [0, inf) after every step."""
    if x0 < 0:
        raise ValueError("x0 must be >= 0")
    out = _euler(*_feller_terms(p), 0.0, None, x0, run, rng, 1 if size is None else size)
    return float(out[0]) if size is None else out


def simulate_logistic_feller_pair(p: FellerParams, x0: float, run: SdeRun, rng, size: int):
    if x0 < 0:
        raise ValueError("x0 must be >= 0")
    return _euler_pair(*_feller_terms(p), 0.0, None, x0, run, rng, size)


def pure_death_solution(y0: float, beta: float, t: float) -> float:
    """Solution of ``y' = -beta y^2``."""
    if y0 < 0 or beta < 0 or t < 0:
        raise ValueError("arguments must be >= 0")
    return y0 / (1.0 + beta * t * y0)


def feller_laplace_closed_form(x: float, y: float, beta: float, t: float) -> float:
    """``E^x[exp(-F_t y)]`` for Feller's branching diffusion with noise ``beta``."""
    if x < 0:
        raise ValueError("x must be >= 0")
    return math.exp(-x * pure_death_solution(y, beta, t))
