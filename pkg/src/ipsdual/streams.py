"""Counter-based random streams.

Every stream is a Philox generator keyed by an integer tuple such as
``(seed, purpose, block)``, so a replicate's draws do not depend on how
replicates are batched or scheduled.
"""
from __future__ import annotations

import numpy as np

DEFAULT_SEED = 20070222
BLOCK = 1 << 14

# purpose tags
PATHWISE = 1
BRACO = 2
RESEM = 3
FELLER_X = 4
FELLER_Y = 5
REFERENCE = 6
EXACT = 7


def stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def blocks(reps: int, block: int = BLOCK):
    """Yield ``(index, size)`` for consecutive replicate blocks."""
    for b, start in enumerate(range(0, reps, block)):
        yield b, min(block, reps - start)
