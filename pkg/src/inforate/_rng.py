"""Counter-based random streams keyed by (seed, stream).

Philox is counter-based, so independent streams derived from the same
seed are reproducible regardless of how work is distributed across
workers.
"""

import numpy as np


def make_rng(seed, stream=0):
    """Return a Generator for the given (seed, stream) pair."""
    ss = np.random.SeedSequence(seed, spawn_key=(stream,))
    return np.random.Generator(np.random.Philox(ss))
