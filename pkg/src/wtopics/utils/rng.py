"""Counter-based random streams derived from a master seed."""

import numpy as np


def make_rng(seed: int, *stream: int) -> np.random.Generator:
    """
    Independent Philox stream for (seed, *stream).

    Chains, replicates and population draws each ask for their own stream key
    so results do not depend on worker scheduling.
    """
    entropy = [int(seed), *(int(s) for s in stream)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))
