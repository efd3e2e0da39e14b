"""Named, seedable random streams.

Every stochastic stage of a run draws from its own child stream of the run
seed, so the stages never interfere: changing the number of random features
consumes only the BANK stream and leaves the node-processing order and the
train/test split untouched. Streams are derived with ``SeedSequence`` spawn
keys on top of PCG64, which is reproducible across platforms.
"""

import numpy as np

from .errors import ArgumentError

BANK = 0
ORDER = 1
SPLIT = 2
GRAPH = 10
VALUES = 11


def stream(seed: int, channel: int) -> np.random.Generator:
    """Return the generator for one named channel of a run seed."""
    if not isinstance(seed, (int, np.integer)) or seed < 0:
        raise ArgumentError(f"seed must be a nonnegative integer, got {seed!r}")
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(channel),)))
