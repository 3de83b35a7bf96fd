"""Exact laws of the finite particle systems.

Generators are returned as ``scipy.sparse.csr_matrix`` with rows indexed
by the current state.  For the full chain on {0,1}^N a configuration is the
integer whose bit ``i`` is the type of individual ``i``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy import stats
from scipy.special import gammaln

from .graphical import RateSpec, as_config, forward_mechanisms

__all__ = [
    "ScalingPlan",
    "full_generator",
    "count_generator",
    "check_generator",
    "evolve_distribution",
    "config_index",
    "index_config",
    "popcounts",
    "project_counts",
    "uniform_count_distribution",
    "wedge_duality_sides",
    "wedge_duality_gap",
    "hyp_zero",
    "binom_hyp_tv_bound_check",
    "sample_uniform_config",
    "power_of_complement",
    "prototype_duality_sides",
    "prototype_duality_gap",
    "count_mean_path",
    "FULL_CAP",
    "COUNT_CAP",
]

FULL_CAP = 14
COUNT_CAP = 20_000


@dataclass(frozen=True)
class ScalingPlan:
    """Time rescale ``T_N``, space rescale ``S_N`` and the growth constant
    ``s_N`` of the dominating submartingale."""

    time_scale: float
    space_scale: float
    growth: float = 0.0

    def __post_init__(self):
        if self.time_scale <= 0 or self.space_scale <= 0:
            raise ValueError("time and space scales must be positive")


def _per_pair_rates(n, rates, mechs):
    if isinstance(rates, RateSpec):
        per_pair = rates.per_pair(n)
        mechs = forward_mechanisms() if mechs is None else tuple(mechs)
    else:
        per_pair = tuple(float(r) for r in rates)
        if mechs is None:
            raise ValueError("explicit mechanisms required with a bare rate list")
        mechs = tuple(mechs)
    if len(per_pair) != len(mechs):
        raise ValueError("one rate per mechanism required")
    return per_pair, mechs


def full_generator(n: int, rates, mechs=None, max_n: int = FULL_CAP) -> sp.csr_matrix:
    """Rate matrix of the particle system on {0,1}^N.

    ``rates`` is either a :class:`RateSpec` (per-pair rate ``value / N``,
    default mechanisms pure birth, death/coalescent, coalescent,
    resampling) or a list of per-pair rates matching ``mechs``.
    """
    if n < 1:
        raise ValueError("population size must be >= 1")
    if n > max_n:
        raise MemoryError(f"full chain limited to N <= {max_n} (got {n})")
    per_pair, mechs = _per_pair_rates(n, rates, mechs)
    size = 1 << n
    states = np.arange(size, dtype=np.int64)
    rows, cols, vals = [], [], []
    for rate, mech in zip(per_pair, mechs):
        if rate == 0:
            continue
        table = np.array(mech.table, dtype=np.int64)
        for i in range(n):
            bi = (states >> i) & 1
            for j in range(n):
                if i == j:
                    continue
                bj = (states >> j) & 1
                out = table[2 * bi + bj]
                new = states & ~((1 << i) | (1 << j))
                new |= ((out >> 1) << i) | ((out & 1) << j)
                moved = new != states
                rows.append(states[moved])
                cols.append(new[moved])
                vals.append(np.full(int(moved.sum()), rate))
    if rows:
        r, c, v = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        r = c = np.empty(0, dtype=np.int64)
        v = np.empty(0)
    Q = sp.coo_matrix((v, (r, c)), shape=(size, size)).tocsr()
    Q.sum_duplicates()
    out = np.asarray(Q.sum(axis=1)).ravel()
    return (Q - sp.diags(out)).tocsr()


def count_generator(n: int, rates: RateSpec, max_n: int = COUNT_CAP) -> sp.csr_matrix:
    """Tridiagonal generator of the number of type-1 individuals.

    ``k -> k+1`` at ``(u+beta) k (N-k) / N``;
    ``k -> k-1`` at ``(e+beta) k (N-k) / N + (e+gamma) k (k-1) / N``.
    """
    if n < 1:
        raise ValueError("population size must be >= 1")
    if n > max_n:
        raise MemoryError(f"count chain limited to N <= {max_n} (got {n})")
    k = np.arange(n + 1, dtype=float)
    up = (rates.u + rates.beta) * k * (n - k) / n
    down = (rates.e + rates.beta) * k * (n - k) / n + (rates.e + rates.gamma) * k * (k - 1) / n
    Q = sp.diags(
        [down[1:], -(up + down), up[:-1]], offsets=[-1, 0, 1], shape=(n + 1, n + 1)
    )
    return Q.tocsr()


def check_generator(Q, rtol: float = 1e-12) -> None:
    """Raise ``ValueError`` unless ``Q`` is a valid rate matrix."""
    Q = sp.csr_matrix(Q)
    if Q.shape[0] != Q.shape[1] or Q.shape[0] < 1:
        raise ValueError("generator must be square and non-empty")
    if not np.all(np.isfinite(Q.data)):
        raise ValueError("generator has non-finite entries")
    off = Q - sp.diags(Q.diagonal())
    if off.nnz and off.data.min() < 0:
        raise ValueError("negative off-diagonal rate")
    sums = np.asarray(Q.sum(axis=1)).ravel()
    scale = max(1.0, float(np.abs(Q.diagonal()).max(initial=0.0)))
    if np.abs(sums).max() > rtol * scale:
        raise ValueError("generator rows do not sum to zero")


def evolve_distribution(
    Q, p0, t: float, tol: float = 1e-12, renormalize: bool = True
) -> np.ndarray:
    """``p0 @ expm(t Q)`` by uniformization.

    With ``L = max_i |Q_ii|`` and ``P = I + Q / L``, the result is the
    Poisson(``L t``)-weighted sum of ``p0 P^m``; the series is cut where the
    Poisson tail drops below ``tol``, which bounds the total-variation error.
    ``renormalize=False`` keeps mass lost through deliberately leaky rows.
    """
    Q = sp.csr_matrix(Q, dtype=float)
    p = np.asarray(p0, dtype=float).copy()
    if p.shape != (Q.shape[0],):
        raise ValueError(f"distribution of length {p.size} vs generator {Q.shape}")
    if not np.all(np.isfinite(Q.data)):
        raise ValueError("generator has non-finite entries")
    if t < 0:
        raise ValueError("time must be >= 0")
    lam = float(np.abs(Q.diagonal()).max(initial=0.0))
    if t == 0 or lam == 0:
        return p
    mean = lam * t
    PT = (sp.identity(Q.shape[0], format="csr") + Q / lam).T.tocsr()
    last = int(stats.poisson.isf(tol / 2, mean)) + 2
    first = max(0, int(stats.poisson.ppf(tol / 2, mean)) - 1)
    weights = stats.poisson.pmf(np.arange(first, last + 1), mean)
    result = np.zeros_like(p)
    term = p
    for _ in range(first):
        term = PT @ term
    for m, w in enumerate(weights):
        if m:
            term = PT @ term
        result += w * term
    np.clip(result, 0.0, None, out=result)
    if renormalize:
        result /= result.sum()
    return result


def config_index(x) -> int:
    x = as_config(x)
    return int(np.sum(x.astype(np.int64) << np.arange(x.size)))


def index_config(index: int, n: int) -> np.ndarray:
    return ((index >> np.arange(n)) & 1).astype(np.uint8)


def popcounts(n: int) -> np.ndarray:
    states = np.arange(1 << n, dtype=np.int64)
    return np.array([bin(s).count("1") for s in states.tolist()], dtype=np.int64)


def project_counts(p_full: np.ndarray, n: int) -> np.ndarray:
    """Law of the number of ones under a law on {0,1}^N."""
    return np.bincount(popcounts(n), weights=p_full, minlength=n + 1)


def uniform_count_distribution(n: int, ones: int) -> np.ndarray:
    """Uniform law on configurations with exactly ``ones`` ones."""
    pc = popcounts(n)
    p = (pc == ones).astype(float)
    return p / p.sum()


def _point_mass(size: int, at: int) -> np.ndarray:
    p = np.zeros(size)
    p[at] = 1.0
    return p


def wedge_duality_sides(n, rates: RateSpec, x, y, t, max_n: int = FULL_CAP):
    """``(P^x[X_t ^ y = 0], P^y[x ^ Y_t = 0])`` with Y at the dual rates."""
    xi, yi = config_index(as_config(x, n)), config_index(as_config(y, n))
    states = np.arange(1 << n)
    px = evolve_distribution(full_generator(n, rates, max_n=max_n), _point_mass(1 << n, xi), t)
    py = evolve_distribution(
        full_generator(n, rates.dual(), max_n=max_n), _point_mass(1 << n, yi), t
    )
    lhs = float(px[(states & yi) == 0].sum())
    rhs = float(py[(states & xi) == 0].sum())
    return lhs, rhs


def wedge_duality_gap(n, rates: RateSpec, x, y, t, max_n: int = FULL_CAP) -> float:
    lhs, rhs = wedge_duality_sides(n, rates, x, y, t, max_n=max_n)
    return abs(lhs - rhs)


def _log_choose(a, b):
    return gammaln(a + 1) - gammaln(b + 1) - gammaln(a - b + 1)


def hyp_zero(N: int, R: int, l: int) -> float:
    """Probability that ``l`` draws without replacement from an urn of
    ``N`` balls, ``R`` of them marked, contain no marked ball."""
    if not (0 <= R <= N and 0 <= l <= N):
        raise ValueError(f"need 0 <= R, l <= N; got N={N}, R={R}, l={l}")
    if l > N - R:
        return 0.0
    if l == 0 or R == 0:
        return 1.0
    return float(math.exp(_log_choose(N - R, l) - _log_choose(N, l)))


def binom_hyp_tv_bound_check(N: int, R: int, l: int) -> tuple[float, float]:
    """Exact TV distance between Binomial(l, R/N) and Hyp(N, R, l), and 4l/N."""
    if not (0 <= R <= N and 0 <= l <= N):
        raise ValueError(f"need 0 <= R, l <= N; got N={N}, R={R}, l={l}")
    if l == 0:
        return 0.0, 0.0
    j = np.arange(l + 1)
    binom = stats.binom.pmf(j, l, R / N)
    hyp = stats.hypergeom.pmf(j, N, R, l)
    tv = 0.5 * float(np.abs(binom - hyp).sum())
    bound = 4.0 * l / N
    if tv > bound + 1e-12:
        raise AssertionError(f"TV {tv} exceeds bound {bound} at N={N}, R={R}, l={l}")
    return tv, bound


def sample_uniform_config(N: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform configuration with exactly ``n`` ones (partial Fisher-Yates)."""
    if not 0 <= n <= N:
        raise ValueError(f"need 0 <= n <= N; got n={n}, N={N}")
    perm = list(range(N))
    for i in range(n):
        j = i + int(rng.integers(N - i))
        perm[i], perm[j] = perm[j], perm[i]
    x = np.zeros(N, dtype=np.uint8)
    x[perm[:n]] = 1
    return x


def power_of_complement(frac: float, exponent) -> np.ndarray:
    """``(1 - frac) ** exponent`` in log space, with ``0 ** 0 = 1``."""
    exponent = np.asarray(exponent, dtype=float)
    if frac >= 1.0:
        return np.where(exponent == 0, 1.0, 0.0)
    return np.exp(exponent * math.log1p(-frac))


def prototype_duality_sides(N, n, k, rates: RateSpec, t, tol=1e-12):
    """``E[(1 - k/N)^|X_t|]`` and ``E[(1 - |Y_t|/N)^n]`` from the count chains,
    X started at ``n`` with ``rates`` and Y at ``k`` with the dual rates."""
    if not (0 <= n <= N and 0 <= k <= N):
        raise ValueError("need 0 <= n, k <= N")
    m = np.arange(N + 1)
    px = evolve_distribution(count_generator(N, rates), _point_mass(N + 1, n), t, tol)
    py = evolve_distribution(count_generator(N, rates.dual()), _point_mass(N + 1, k), t, tol)
    lhs = float(px @ power_of_complement(k / N, m))
    rhs = float(sum(py[j] * power_of_complement(j / N, n) for j in range(N + 1)))
    return lhs, rhs


def prototype_duality_gap(N, n, k, rates: RateSpec, t) -> float:
    lhs, rhs = prototype_duality_sides(N, n, k, rates, t)
    return abs(lhs - rhs)


def count_mean_path(N: int, rates: RateSpec, start: int, times) -> np.ndarray:
    """Exact ``E[count]`` of the count chain at increasing ``times``."""
    Q = count_generator(N, rates)
    p = _point_mass(N + 1, start)
    m = np.arange(N + 1)
    out, prev = [], 0.0
    for t in times:
        if t < prev:
            raise ValueError("times must be nondecreasing")
        p = evolve_distribution(Q, p, t - prev)
        prev = t
        out.append(float(p @ m))
    return np.array(out)
