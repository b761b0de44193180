"""Counter-based random stream derivation.

Every random draw in a run comes from a generator keyed by
``(master_seed, node, iteration, purpose)``. Streams never depend on the
order in which nodes are processed, so a round can be evaluated in any
order (or in parallel) and still reproduce bit-for-bit.
"""

from __future__ import annotations

import numpy as np

NOISE = 0
QUANTIZE = 1
SUBSAMPLE = 2
INIT = 3
DATA = 4

PURPOSES = {"noise": NOISE, "quantize": QUANTIZE, "subsample": SUBSAMPLE, "init": INIT, "data": DATA}


def stream(seed: int, node: int, iteration: int, purpose: int) -> np.random.Generator:
    """Return an independent Philox generator for one (node, iteration, purpose) cell."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(node), int(iteration), int(purpose)))
    return np.random.Generator(np.random.Philox(ss))
