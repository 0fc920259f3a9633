"""Counter-based random substreams.

Every stochastic step draws from a Philox generator whose key is derived
from ``(seed, stream)`` and whose counter starts at a block reserved for one
replicate or trial. A replicate's draws therefore depend only on its own
index, never on how work is split between threads.
"""

import numpy as np

# stream tags; keep stable, changing one changes every seeded result
PERMUTATION = 1
TTEST = 2
TRIAL = 3


def _key(seed, stream):
    seed = int(seed)
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.SeedSequence([seed, int(stream)]).generate_state(
        2, np.uint64)


def substream(seed, stream, index):
    """Generator for replicate ``index`` of ``stream`` under master ``seed``."""
    return np.random.Generator(np.random.Philox(
        key=_key(seed, stream), counter=[0, 0, int(index), 0]))


def subseed(seed, stream, index):
    """A derived 64-bit integer seed, for handing to nested seeded calls."""
    return int(substream(seed, stream, index).integers(0, 2**63))
