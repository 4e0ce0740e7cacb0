"""Labelled seed derivation.

Every random choice a mechanism makes is a pure function of
``(seed, label, index)`` computed with the SplitMix64 finaliser, so the coin
of bidder ``i`` never depends on any bid or on the number of bidders. The
scalar and numpy paths produce bit-identical streams; the Monte Carlo
engine relies on that to vectorise runs over many seeds.

``derive(seed, k1, k2, ...)`` folds keys as
``h = mix(seed); h = mix(h ^ k1); h = mix(h ^ k2); ...`` and a coin is the
top bit of the result.
"""
from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB

# stream labels
PARTITION = 0x50415254  # membership coin per bidder
HYBRID_COIN = 0x48594252  # the branch coin Y
SUBAUCTION = 0x53554241  # seed handed to the uniform-price subauction
RSOP_SPLIT = 0x52534F50  # RSOP's half assignment per bidder
TRIAL = 0x5452494C  # per-trial seeds from a master seed
INSTANCE = 0x494E5354  # per-instance seeds in experiments


def mix64(x: int) -> int:
    z = (x + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive(seed: int, *keys: int) -> int:
    h = mix64(seed & MASK64)
    for k in keys:
        h = mix64(h ^ (k & MASK64))
    return h


def coin(seed: int, *keys: int) -> int:
    return derive(seed, *keys) >> 63


def trial_seed(master: int, t: int) -> int:
    return derive(master, TRIAL, t)


# -- numpy twins ------------------------------------------------------------

def mix64_array(x: np.ndarray) -> np.ndarray:
    z = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = z + np.uint64(_GAMMA)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def derive_array(seeds, *keys) -> np.ndarray:
    """Vectorised :func:`derive`; keys broadcast against ``seeds``."""
    h = mix64_array(np.asarray(seeds, dtype=np.uint64))
    for k in keys:
        if isinstance(k, (int, np.integer)):
            k = np.uint64(int(k) & MASK64)
        else:
            k = np.asarray(k, dtype=np.uint64)
        h = mix64_array(h ^ k)
    return h


def coins_array(seeds, *keys) -> np.ndarray:
    return (derive_array(seeds, *keys) >> np.uint64(63)).astype(bool)


def trial_seeds(master: int, trials: int, start: int = 0) -> np.ndarray:
    t = np.arange(start, start + trials, dtype=np.uint64)
    return derive_array(np.full(trials, master & MASK64, dtype=np.uint64), TRIAL, t)
