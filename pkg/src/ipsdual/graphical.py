"""Poisson graphical representation on the complete oriented graph.

Individuals are indexed ``0 .. N-1``.  An arrow ``source -> target`` of
mechanism ``k`` updates the ordered pair ``(x[source], x[target])`` with
``mechs[k]``.  The dual process runs the same arrows in downward time and
updates the reversed pair ``(y[target], y[source])`` with ``dual_mechs[k]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .mechanisms import BasicMechanism, canonical

__all__ = [
    "RateSpec",
    "EventLog",
    "as_config",
    "disjoint",
    "sample_event_log",
    "evolve_forward",
    "reverse_log",
    "evolve_dual_backward",
    "pathwise_duality_holds",
    "forward_mechanisms",
    "dual_mechanisms",
]


@dataclass(frozen=True)
class RateSpec:
    """Rates ``(u, e, gamma, beta)`` of pure birth, death/coalescent,
    coalescent and resampling mechanisms.  Each ordered pair fires
    mechanism ``k`` at rate ``value / N``."""

    u: float = 0.0
    e: float = 0.0
    gamma: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        for name in ("u", "e", "gamma", "beta"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0:
                raise ValueError(f"rate {name} must be finite and >= 0, got {v}")
            object.__setattr__(self, name, v)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.u, self.e, self.gamma, self.beta)

    def per_pair(self, n: int) -> tuple[float, ...]:
        return tuple(v / n for v in self.as_tuple())

    def dual(self) -> "RateSpec":
        """Rates of the dual process: coalescent and resampling swapped."""
        return RateSpec(self.u, self.e, self.beta, self.gamma)

    @classmethod
    def parse(cls, text: str) -> "RateSpec":
        parts = [p for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected u,e,gamma,beta; got {text!r}")
        return cls(*(float(p) for p in parts))


def forward_mechanisms() -> tuple[BasicMechanism, ...]:
    return tuple(
        canonical(n) for n in ("pure_birth", "death_coalescent", "coalescent", "resampling")
    )


def dual_mechanisms() -> tuple[BasicMechanism, ...]:
    return tuple(
        canonical(n) for n in ("pure_birth", "death_coalescent", "resampling", "coalescent")
    )


def as_config(bits, n: int | None = None) -> np.ndarray:
    """Validate a 0/1 configuration and return it as a ``uint8`` array."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("configuration must be a non-empty 1-d bit vector")
    if not np.all((arr == 0) | (arr == 1)):
        raise ValueError("configuration entries must be 0 or 1")
    if n is not None and arr.size != n:
        raise ValueError(f"configuration has size {arr.size}, expected {n}")
    return arr.astype(np.uint8)


def disjoint(x, y) -> bool:
    x, y = as_config(x), as_config(y)
    if x.size != y.size:
        raise ValueError(f"size mismatch: {x.size} vs {y.size}")
    return not np.any(x & y)


@dataclass(frozen=True, eq=False)
class EventLog:
    """Arrows on ``[0, horizon]``, sorted by time.

    Times are stored as fractions of the horizon.  Reflection ``u -> 1 - u``
    is exact for the dyadic fractions the sampler produces, so reversing a
    log twice gives back the identical log.
    """

    n: int
    horizon: float
    fractions: np.ndarray
    sources: np.ndarray
    targets: np.ndarray
    mechanisms: np.ndarray
    rates: tuple = field(default=())

    def __post_init__(self):
        m = len(self.fractions)
        if not (len(self.sources) == len(self.targets) == len(self.mechanisms) == m):
            raise ValueError("event arrays must have equal length")
        if self.horizon < 0:
            raise ValueError("horizon must be >= 0")
        if m:
            if np.any(self.sources == self.targets):
                raise ValueError("an arrow needs two distinct individuals")
            lo = min(self.sources.min(), self.targets.min())
            hi = max(self.sources.max(), self.targets.max())
            if lo < 0 or hi >= self.n:
                raise ValueError("individual index out of range")
            if self.fractions.min() < 0 or self.fractions.max() > 1:
                raise ValueError("event times outside [0, horizon]")
        for a in (self.fractions, self.sources, self.targets, self.mechanisms):
            a.setflags(write=False)

    @classmethod
    def from_events(cls, n: int, horizon: float, events, rates=()) -> "EventLog":
        """Build from ``(time, source, target, mechanism)`` tuples."""
        events = list(events)
        if events and horizon <= 0:
            raise ValueError("events require a positive horizon")
        t = np.array([e[0] for e in events], dtype=float)
        frac = t / horizon if events else t
        return _sorted_log(
            n,
            horizon,
            frac,
            np.array([e[1] for e in events], dtype=np.int64),
            np.array([e[2] for e in events], dtype=np.int64),
            np.array([e[3] for e in events], dtype=np.int64),
            tuple(rates),
        )

    @property
    def times(self) -> np.ndarray:
        return self.fractions * self.horizon

    def __len__(self) -> int:
        return len(self.fractions)

    def __iter__(self):
        for t, i, j, k in zip(
            self.times.tolist(),
            self.sources.tolist(),
            self.targets.tolist(),
            self.mechanisms.tolist(),
        ):
            yield t, i, j, k

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventLog):
            return NotImplemented
        return (
            self.n == other.n
            and self.horizon == other.horizon
            and self.rates == other.rates
            and np.array_equal(self.fractions, other.fractions)
            and np.array_equal(self.sources, other.sources)
            and np.array_equal(self.targets, other.targets)
            and np.array_equal(self.mechanisms, other.mechanisms)
        )

    def to_bytes(self) -> bytes:
        return b"".join(
            a.tobytes()
            for a in (self.fractions, self.sources, self.targets, self.mechanisms)
        )


def _sorted_log(n, horizon, frac, src, tgt, mech, rates) -> EventLog:
    # ties: time, then mechanism index, then (source, target)
    order = np.lexsort((tgt, src, mech, frac))
    return EventLog(n, float(horizon), frac[order], src[order], tgt[order], mech[order], rates)


def sample_event_log(
    n: int, rates: Sequence[float], horizon: float, rng: np.random.Generator
) -> EventLog:
    """Sample all arrows on ``[0, horizon]``.

    ``rates[k]`` is the per-ordered-pair rate of mechanism ``k``.  The count
    for each mechanism is Poisson with mean ``rates[k] * N * (N-1) * T``;
    given the count, times are uniform and pairs uniform over ordered pairs.
    """
    rates = tuple(float(r) for r in rates)
    if horizon < 0:
        raise ValueError("horizon must be >= 0")
    if any(r < 0 or not np.isfinite(r) for r in rates):
        raise ValueError("rates must be finite and >= 0")
    if n < 1:
        raise ValueError("population size must be >= 1")
    if n < 2 and any(r > 0 for r in rates):
        raise ValueError("positive rates need at least two individuals")
    npairs = n * (n - 1)
    frac, src, tgt, mech = [], [], [], []
    for k, r in enumerate(rates):
        count = rng.poisson(r * npairs * horizon) if r > 0 and horizon > 0 else 0
        if count == 0:
            continue
        frac.append(rng.random(count))
        idx = rng.integers(npairs, size=count)
        s = idx // (n - 1)
        o = idx % (n - 1)
        src.append(s)
        tgt.append(o + (o >= s))
        mech.append(np.full(count, k, dtype=np.int64))
    if frac:
        cat = np.concatenate
        return _sorted_log(n, horizon, cat(frac), cat(src), cat(tgt), cat(mech), rates)
    e = np.empty(0, dtype=np.int64)
    return EventLog(n, float(horizon), np.empty(0), e, e.copy(), e.copy(), rates)


def _check_mechs(log: EventLog, mechs) -> list[tuple[int, ...]]:
    tables = [m.table for m in mechs]
    if len(log) and int(log.mechanisms.max()) >= len(tables):
        raise IndexError(
            f"event refers to mechanism {int(log.mechanisms.max())}, "
            f"only {len(tables)} given"
        )
    return tables


def evolve_forward(x0, log: EventLog, mechs, record_path: bool = False):
    """State at the horizon after applying every arrow in time order.

    With ``record_path=True`` also return the jump path as a list of
    ``(time, configuration)`` starting with ``(0.0, x0)``.
    """
    x = as_config(x0, log.n).tolist()
    tables = _check_mechs(log, mechs)
    path = [(0.0, np.array(x, dtype=np.uint8))] if record_path else None
    for t, i, j, k in log:
        out = tables[k][2 * x[i] + x[j]]
        x[i], x[j] = out >> 1, out & 1
        if record_path:
            path.append((t, np.array(x, dtype=np.uint8)))
    final = np.array(x, dtype=np.uint8)
    return (final, path) if record_path else final


def reverse_log(log: EventLog) -> EventLog:
    """Reflect event times ``t -> T - t``; arrow payloads are unchanged."""
    return _sorted_log(
        log.n,
        log.horizon,
        1.0 - log.fractions,
        log.sources.copy(),
        log.targets.copy(),
        log.mechanisms.copy(),
        log.rates,
    )


def evolve_dual_backward(y_top, log: EventLog, dual_mechs):
    """Run the dual from forward time ``T`` down to 0 through ``log``.

    At a forward arrow ``i -> j`` the dual mechanism acts on ``(y[j], y[i])``.
    """
    y = as_config(y_top, log.n).tolist()
    tables = _check_mechs(log, dual_mechs)
    for _, i, j, k in reverse_log(log):
        out = tables[k][2 * y[j] + y[i]]
        y[j], y[i] = out >> 1, out & 1
    return np.array(y, dtype=np.uint8)


def pathwise_duality_holds(x0, y0, log: EventLog, mechs, dual_mechs) -> bool:
    """``x0 ^ Yhat_T == 0`` iff ``X_T ^ y0 == 0`` for this realization."""
    x_end = evolve_forward(x0, log, mechs)
    y_end = evolve_dual_backward(y0, log, dual_mechs)
    return disjoint(x0, y_end) == disjoint(x_end, y0)
