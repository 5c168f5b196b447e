"""Seeded stream derivation.

Every random draw in the simulator comes from a Philox4x64 counter-based
generator keyed by ``SeedSequence([base_seed, replication, stream_tag])``.
Philox is a fixed, named algorithm (Random123 family), so any implementation
that follows the same derivation reproduces identical streams bit for bit.

Stream tags:
    0  environment reward draws (one Bernoulli per arm per round)
    1  collision winner selection
    2  prior generation
    3  policy randomness (adversary coins, tie-break salt)

The hiding baseline runs the selfish dynamics on independently derived
collision/policy streams (tag + HIDING_SALT); the reward stream is never
salted, so the environment's sample path is identical across policies.
"""

from __future__ import annotations

import numpy as np

STREAM_REWARDS = 0
STREAM_COLLISIONS = 1
STREAM_PRIORS = 2
STREAM_POLICY = 3

HIDING_SALT = 10


def stream(base_seed: int, replication: int, tag: int) -> np.random.Generator:
    """Derive one independent generator from (base_seed, replication, tag)."""
    ss = np.random.SeedSequence(entropy=[int(base_seed), int(replication), int(tag)])
    return np.random.Generator(np.random.Philox(ss))
