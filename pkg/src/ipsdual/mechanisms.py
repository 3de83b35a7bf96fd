"""Basic mechanisms: maps {0,1}^2 -> {0,1}^2 acting on an ordered pair.

A pair state ``(a, b)`` is encoded as the integer ``2*a + b`` so that the
component-wise minimum of two pair states is a bitwise AND and the empty
pair is 0.  A mechanism is stored as its 4-entry truth table over these
codes, which makes all 256 maps enumerable as single bytes.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, NamedTuple

import numpy as np

__all__ = [
    "PairState",
    "BasicMechanism",
    "DualityCatalog",
    "apply",
    "transform",
    "is_dual",
    "classify_all",
    "canonical",
    "count_effect",
    "CANONICAL_NAMES",
    "REFERENCE_PAIRS",
]


class PairState(NamedTuple):
    first: int
    second: int

    @property
    def code(self) -> int:
        return 2 * self.first + self.second

    @classmethod
    def from_code(cls, code: int) -> "PairState":
        return cls(code >> 1, code & 1)


PAIR_STATES = tuple(PairState.from_code(c) for c in range(4))


def _swap(code: int) -> int:
    return ((code & 1) << 1) | (code >> 1)


def _popcount(code: int) -> int:
    return (code >> 1) + (code & 1)


@dataclass(frozen=True, order=True)
class BasicMechanism:
    """Truth table of a basic mechanism, indexed by input pair code."""

    table: tuple[int, int, int, int]

    def __post_init__(self):
        if len(self.table) != 4 or any(v not in (0, 1, 2, 3) for v in self.table):
            raise ValueError(f"invalid truth table {self.table!r}")
        object.__setattr__(self, "table", tuple(int(v) for v in self.table))

    @classmethod
    def from_pairs(cls, mapping) -> "BasicMechanism":
        """Build from a mapping ``{(a, b): (c, d)}`` covering all four inputs."""
        table = [None] * 4
        for x, y in dict(mapping).items():
            table[PairState(*x).code] = PairState(*y).code
        if any(v is None for v in table):
            raise ValueError("mapping must cover all four pair states")
        return cls(tuple(table))

    @classmethod
    def from_code(cls, code: int) -> "BasicMechanism":
        """Inverse of :attr:`code`; ``code`` in ``range(256)``."""
        if not 0 <= code < 256:
            raise ValueError(f"mechanism code out of range: {code}")
        return cls(tuple((code >> (2 * i)) & 3 for i in range(4)))

    @property
    def code(self) -> int:
        return sum(v << (2 * i) for i, v in enumerate(self.table))

    def __call__(self, first: int, second: int) -> PairState:
        return PairState.from_code(self.table[2 * first + second])

    def as_string(self) -> str:
        """Outputs for inputs (0,0),(0,1),(1,0),(1,1), e.g. ``00|00|11|11``."""
        return "|".join(f"{v >> 1}{v & 1}" for v in self.table)

    def __repr__(self) -> str:
        return f"BasicMechanism({self.as_string()})"


def apply(mech: BasicMechanism, x) -> PairState:
    return mech(*x)


def transform(mech: BasicMechanism, sym: str) -> BasicMechanism:
    """Apply one of the swap symmetries.

    ``dagger``: x -> f(x')' ; ``hat``: x -> f(x') ; ``hat_dagger``: x -> f(x)',
    where ' swaps the two components.
    """
    t = mech.table
    if sym == "dagger":
        table = tuple(_swap(t[_swap(c)]) for c in range(4))
    elif sym == "hat":
        table = tuple(t[_swap(c)] for c in range(4))
    elif sym == "hat_dagger":
        table = tuple(_swap(t[c]) for c in range(4))
    else:
        raise ValueError(f"unknown symmetry {sym!r}")
    return BasicMechanism(table)


def _dual_by_definition(f: tuple, g: tuple) -> bool:
    # Both disjointness-preservation implications, over all 16 (x, y).
    for x in range(4):
        for y in range(4):
            if y & _swap(f[x]) == 0 and g[y] & _swap(x) != 0:
                return False
            if x & _swap(g[y]) == 0 and f[x] & _swap(y) != 0:
                return False
    return True


def _dual_by_characterization(f: tuple, g: tuple) -> bool:
    # y & f(x) == 0  <=>  g_dagger(y) & x == 0
    g_dag = tuple(_swap(g[_swap(c)]) for c in range(4))
    return all(
        (y & f[x] == 0) == (g_dag[y] & x == 0) for x in range(4) for y in range(4)
    )


def is_dual(f: BasicMechanism, g: BasicMechanism) -> bool:
    """Whether ``f`` and ``g`` are dual basic mechanisms.

    Evaluates the two defining implications and the equivalent single
    biconditional, and raises ``AssertionError`` if they ever disagree.
    """
    by_def = _dual_by_definition(f.table, g.table)
    by_char = _dual_by_characterization(f.table, g.table)
    if by_def != by_char:
        raise AssertionError(f"duality forms disagree for {f!r}, {g!r}")
    return by_def


def count_effect(mech: BasicMechanism) -> dict[PairState, int]:
    """Change in the number of type-1 individuals for each input pair."""
    return {
        PairState.from_code(c): _popcount(mech.table[c]) - _popcount(c)
        for c in range(4)
    }


def _m(*outputs: str) -> BasicMechanism:
    return BasicMechanism(tuple(int(o, 2) for o in outputs))


_CANONICAL = {
    "resampling": _m("00", "00", "11", "11"),
    "coalescent": _m("00", "01", "01", "01"),
    "pure_birth": _m("00", "01", "11", "11"),
    "death_coalescent": _m("00", "00", "01", "01"),
    "identity": _m("00", "01", "10", "11"),
    "constant_zero": _m("00", "00", "00", "00"),
    "all_to_ones": _m("00", "11", "11", "11"),
}
CANONICAL_NAMES = tuple(_CANONICAL)


def canonical(name: str) -> BasicMechanism:
    try:
        return _CANONICAL[name]
    except KeyError:
        raise ValueError(
            f"unknown mechanism {name!r}; expected one of {', '.join(CANONICAL_NAMES)}"
        ) from None


# The six reference dual pairs, as (f, g).
REFERENCE_PAIRS = (
    (canonical("resampling"), canonical("coalescent")),
    (canonical("pure_birth"), canonical("pure_birth")),
    (canonical("death_coalescent"), canonical("death_coalescent")),
    (canonical("identity"), canonical("identity")),
    (canonical("constant_zero"), canonical("constant_zero")),
    (canonical("all_to_ones"), canonical("all_to_ones")),
)


@dataclass(frozen=True)
class DualityCatalog:
    entries: tuple[tuple[BasicMechanism, BasicMechanism], ...]

    @property
    def with_dual_count(self) -> int:
        return len({f for f, _ in self.entries})

    @property
    def self_dual_count(self) -> int:
        return sum(f == g for f, g in self.entries)

    def dual_of(self, f: BasicMechanism) -> BasicMechanism | None:
        for a, b in self.entries:
            if a == f:
                return b
        return None

    def __contains__(self, pair) -> bool:
        return tuple(pair) in set(self.entries)

    def rows(self) -> list[dict]:
        return [
            {"f": f.as_string(), "g": g.as_string(), "self_dual": int(f == g)}
            for f, g in self.entries
        ]


def _all_tables() -> np.ndarray:
    codes = np.arange(256)
    return np.stack([(codes >> (2 * i)) & 3 for i in range(4)], axis=1)


def _duality_matrices() -> tuple[np.ndarray, np.ndarray]:
    """Boolean 256x256 duality matrices from both forms of the criterion."""
    swap = np.array([_swap(c) for c in range(4)])
    F = _all_tables()  # F[m, x] = f_m(x)
    x = np.arange(4)[:, None]
    y = np.arange(4)[None, :]

    # indices: [f, g, x, y]
    fx = F[:, None, :, None]
    gy = F[None, :, None, :]
    cond1 = ((y & swap[fx]) != 0) | ((gy & swap[x]) == 0)
    cond2 = ((x & swap[gy]) != 0) | ((fx & swap[y]) == 0)
    by_def = (cond1 & cond2).all(axis=(2, 3))

    G_dag = swap[F[:, swap]]  # G_dag[m, y] = swap(g_m(swap(y)))
    lhs = (y & F[:, None, :, None]) == 0
    rhs = (G_dag[None, :, None, :] & x) == 0
    by_char = (lhs == rhs).all(axis=(2, 3))
    return by_def, by_char


def classify_all() -> DualityCatalog:
    """Brute-force search over all 256 x 256 ordered pairs of mechanisms."""
    by_def, by_char = _duality_matrices()
    if not np.array_equal(by_def, by_char):
        raise AssertionError("duality forms disagree in brute-force search")
    entries = []
    for fc in range(256):
        (gs,) = np.nonzero(by_def[fc])
        if len(gs) == 0:
            continue
        if len(gs) > 1:
            raise AssertionError(f"mechanism {fc} has {len(gs)} duals")
        entries.append(
            (BasicMechanism.from_code(fc), BasicMechanism.from_code(int(gs[0])))
        )
    entries.sort(key=lambda p: (p[0].table, p[1].table))
    return DualityCatalog(tuple(entries))


def symmetry_images(
    f: BasicMechanism, g: BasicMechanism
) -> Iterable[tuple[BasicMechanism, BasicMechanism]]:
    """Pairs obtained from a dual pair by the swap symmetries."""
    yield transform(f, "dagger"), transform(g, "dagger")
    yield transform(f, "hat"), transform(g, "hat_dagger")
    yield transform(f, "hat_dagger"), transform(g, "hat")


def is_monotone(mech: BasicMechanism) -> bool:
    t = mech.table
    return all(
        t[a] & t[b] == t[a] for a in range(4) for b in range(4) if a & b == a
    )
