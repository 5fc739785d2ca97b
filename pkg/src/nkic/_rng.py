"""Counter-based random streams.

Every random draw in the package comes from a Philox generator whose key is
derived from ``(seed, tag, *unit)``.  A unit of work (a trial, a block of
trials) therefore owns its stream outright, and the order in which units are
executed never changes what they draw.
"""

import numpy as np

from .errors import ConfigError

# Domain tags keep streams for different purposes disjoint under one seed.
NETWORK = 1
PATHLOSS = 2
TAIL = 3
SCALING = 4
SELECT = 5
EXCHANGE = 6
RATE = 7

_SEED_LIMIT = 2**64


def check_seed(seed):
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise ConfigError(f"seed: expected an integer, got {seed!r}")
    if not 0 <= int(seed) < _SEED_LIMIT:
        raise ConfigError(f"seed: must lie in [0, 2**64), got {seed}")
    return int(seed)


def stream(seed, tag, *unit):
    """Return the generator owned by work unit ``unit`` under ``(seed, tag)``."""
    key = (int(tag),) + tuple(int(k) for k in unit)
    if any(k < 0 for k in key):
        raise ConfigError(f"stream key must be non-negative, got {key}")
    ss = np.random.SeedSequence(check_seed(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(ss))


def complex_normal(rng, shape):
    """CN(0, 1) draws: independent N(0, 1/2) real and imaginary parts."""
    z = rng.standard_normal(tuple(shape) + (2,))
    return (z[..., 0] + 1j * z[..., 1]) * np.sqrt(0.5)
