"""Executable checks for the revenue analysis of the Hybrid Auction.

Levels, triples, winning sets, the balanced/large predicates, the events
E1 and E2, the per-level decomposition of Rev(P_A) and the bounds proved
about them. Everything except :func:`chernoff_tail` is integer arithmetic.

Level *l* uses the power-of-two price ``q_l`` with
``m2 / 2**(l+1) < q_l <= m2 / 2**l``; in integer money it exists only
while ``2**l <= m2``. Since levels from 24 up are the only ones E2 and the
bad-level bound look at, both are vacuous below ``m2 = 2**24``;
:func:`synthetic_level_profile` builds instances that reach those levels.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator

import numpy as np

from . import seeding
from .batch import discretized_ladders, partition_masks
from .benchmarks import m2_exact
from .core import BidProfile, PriceVector, revenue
from .mechanisms import Partition


class InvariantViolation(AssertionError):
    """A proved bound failed on a concrete input."""


@dataclass(frozen=True)
class BoundConstants:
    level_floor: int = 24
    large_factor: int = 288
    balance_low: Fraction = Fraction(1, 3)
    balance_high: Fraction = Fraction(2, 3)
    e1_fraction: Fraction = Fraction(1, 6)
    e1_prob: Fraction = Fraction(1, 16)
    e2_prob: Fraction = Fraction(31, 32)
    joint_prob: Fraction = Fraction(1, 32)
    bad_level_fraction: Fraction = Fraction(1, 18)
    case_split: int = 432
    case1_ratio: Fraction = Fraction(1, 2700)
    case2_ratio: Fraction = Fraction(1, 2304)
    extension_half: Fraction = Fraction(1, 2)
    rev_b_fraction: Fraction = Fraction(1, 36)


CONSTANTS = BoundConstants()


@dataclass(frozen=True)
class Triple:
    i: int
    j: int
    level: int
    q: int


class LevelClass(str, Enum):
    GOOD = "good"
    BAD = "bad"


# -- levels -------------------------------------------------------------------

def level_price(m2: int, level: int) -> int | None:
    """The power of two in ``(m2 / 2**(level+1), m2 / 2**level]``, if >= 1."""
    if m2 < 0 or level < 0:
        raise ValueError("m2 and level must be nonnegative")
    top = m2.bit_length() - 1  # floor(log2 m2)
    if m2 == 0 or top < level:
        return None
    return 1 << (top - level)


def level_of_price(m2: int, q: int) -> int | None:
    """Level whose price is ``q`` (a power of two), or None if ``q > m2``."""
    if q <= 0 or q & (q - 1):
        raise ValueError(f"{q} is not a positive power of two")
    if q > m2:
        return None
    return (m2 // q).bit_length() - 1


def levels(m2: int) -> range:
    """All levels with an integer price."""
    return range(m2.bit_length()) if m2 > 0 else range(0)


# -- triples ------------------------------------------------------------------

def winning_set(profile: BidProfile, i: int, j: int, q: int) -> tuple[int, ...]:
    if i > j:
        raise ValueError("winning set needs i <= j")
    return tuple(k for k in range(i, j + 1) if profile[k] >= q)


def count_triples(profile: BidProfile, m2: int, level: int) -> int:
    """Number of level-``level`` triples; raises if it exceeds ``2**(2l+2)``.

    The bound presumes ``m2`` is the benchmark of ``profile`` itself.
    """
    q = level_price(m2, level)
    if q is None:
        return 0
    k = sum(1 for b in profile if b >= q)
    count = k * (k - 1) // 2
    if count > 1 << (2 * level + 2):
        raise InvariantViolation(
            f"{count} level-{level} triples exceed the bound {1 << (2 * level + 2)}"
        )
    return count


def enumerate_triples(profile: BidProfile, m2: int, level: int) -> Iterator[Triple]:
    """Lazily yield every level-``level`` triple ``(i, j, q_l)`` with ``i < j``.

    The count bound is checked before the first triple is produced. Large
    synthetic instances carry millions of triples, hence the iterator.
    """
    count_triples(profile, m2, level)
    q = level_price(m2, level)
    if q is None:
        return iter(())
    winners = [k for k, b in enumerate(profile) if b >= q]

    def gen():
        for a, i in enumerate(winners):
            for j in winners[a + 1:]:
                yield Triple(i, j, level, q)

    return gen()


def is_balanced(w: Iterable[int], partition: Partition) -> bool:
    w = set(w)
    in_a = len(w & set(partition.A))
    return 3 * in_a >= len(w) and 3 * in_a <= 2 * len(w)


def is_large(w_size: int | Iterable[int], level: int) -> bool:
    size = w_size if isinstance(w_size, int) else len(tuple(w_size))
    return size >= CONSTANTS.large_factor * level


# -- events -------------------------------------------------------------------

def event_e1(rev_pa: int, m2: int) -> bool:
    return 6 * rev_pa >= m2


def _balanced_rows(winners_in_a: np.ndarray, min_size: int) -> np.ndarray:
    """Row-wise: every winner run of at least ``min_size`` is balanced.

    ``winners_in_a[r, k]`` marks whether the k-th winner (in index order) is
    in A under partition r; the winning set of triple (a-th winner, b-th
    winner) is winners a..b.
    """
    rows, k = winners_in_a.shape
    m = max(2, min_size)
    if k < m:
        return np.ones(rows, dtype=bool)
    # with P the prefix count, run x..y-1 is balanced iff
    # 3P[y] - y >= 3P[x] - x and 3P[y] - 2y <= 3P[x] - 2x; only y - x >= m matter
    prefix = np.zeros((rows, k + 1), dtype=np.int64)
    np.cumsum(winners_in_a, axis=1, dtype=np.int64, out=prefix[:, 1:])
    pos = np.arange(k + 1, dtype=np.int64)
    low = 3 * prefix - pos
    ok = np.all(low[:, m:] >= np.maximum.accumulate(low, axis=1)[:, : k + 1 - m], axis=1)
    high = low - pos
    ok &= np.all(high[:, m:] <= np.minimum.accumulate(high, axis=1)[:, : k + 1 - m], axis=1)
    return ok


def _level_balanced(winners_in_a: np.ndarray, min_size: int) -> bool:
    return bool(_balanced_rows(np.asarray(winners_in_a, dtype=np.int64)[None, :], min_size)[0])


def event_e2_level(profile: BidProfile, m2: int, partition: Partition, level: int) -> bool:
    """Every large level-``level`` triple is balanced."""
    q = level_price(m2, level)
    if q is None:
        return True
    count_triples(profile, m2, level)
    mask = partition.mask()
    winners_in_a = np.array([mask[k] for k, b in enumerate(profile) if b >= q], dtype=np.int64)
    return _level_balanced(winners_in_a, CONSTANTS.large_factor * level)


def e2_is_vacuous(m2: int) -> bool:
    return level_price(m2, CONSTANTS.level_floor) is None


def event_e2(profile: BidProfile, m2: int, partition: Partition) -> bool:
    if e2_is_vacuous(m2):
        return True
    return all(
        event_e2_level(profile, m2, partition, lv)
        for lv in levels(m2)
        if lv >= CONSTANTS.level_floor
    )


_E2_CELL_BUDGET = 2_000_000


def event_e2_batch(profile: BidProfile, m2: int, masks: np.ndarray) -> np.ndarray:
    """``event_e2`` for every row of a boolean ``(trials, n)`` membership matrix."""
    masks = np.asarray(masks, dtype=bool)
    ok = np.ones(masks.shape[0], dtype=bool)
    if e2_is_vacuous(m2):
        return ok
    bids = np.array(profile.bids, dtype=object)
    rows = max(1, _E2_CELL_BUDGET // max(profile.n, 1))
    for lv in levels(m2):
        if lv < CONSTANTS.level_floor:
            continue
        count_triples(profile, m2, lv)
        winners = np.flatnonzero(bids >= level_price(m2, lv))
        for lo in range(0, masks.shape[0], rows):
            chunk = masks[lo : lo + rows, winners].astype(np.int64)
            ok[lo : lo + rows] &= _balanced_rows(chunk, CONSTANTS.large_factor * lv)
    return ok


# -- level decomposition ------------------------------------------------------

def level_members(pa: PriceVector, profile: BidProfile, m2: int, level: int) -> list[int]:
    """A_l: members of A buying at exactly the level price.

    Also checks that A_l is contiguous among A members bidding at least q_l.
    """
    q = level_price(m2, level)
    if q is None:
        return []
    members = [i for i, p in pa.items() if p == q and profile[i] >= p]
    if members:
        first, last = members[0], members[-1]
        inside = [i for i in pa.subset if first <= i <= last and profile[i] >= q]
        if inside != members:
            raise InvariantViolation(f"level-{level} buyers are not contiguous in A")
    return members


def level_revenue(pa: PriceVector, profile: BidProfile, m2: int, level: int) -> tuple[int, int]:
    members = level_members(pa, profile, m2, level)
    q = level_price(m2, level) or 0
    return len(members), len(members) * q


def level_decomposition(pa: PriceVector, profile: BidProfile, m2: int) -> dict[int, tuple[int, int]]:
    """Nonempty levels of ``pa`` mapped to ``(|A_l|, Rev(P_A, l))``.

    Raises if the levels do not add back up to ``revenue(pa)``.
    """
    out = {}
    for lv in levels(m2):
        count, money = level_revenue(pa, profile, m2, lv)
        if count:
            out[lv] = (count, money)
    total = sum(money for _, money in out.values())
    if total != revenue(pa, profile):
        raise InvariantViolation(f"levels sum to {total}, revenue is {revenue(pa, profile)}")
    return out


def classify_level(level: int, a_l_count: int) -> LevelClass:
    if level >= CONSTANTS.level_floor and a_l_count >= CONSTANTS.large_factor * level:
        return LevelClass.GOOD
    return LevelClass.BAD


def bad_level_revenue(pa: PriceVector, profile: BidProfile, m2: int) -> int:
    return sum(
        money
        for lv, (count, money) in level_decomposition(pa, profile, m2).items()
        if lv >= CONSTANTS.level_floor and classify_level(lv, count) is LevelClass.BAD
    )


def bad_level_bound_check(pa: PriceVector, profile: BidProfile, m2: int) -> bool:
    """Bad levels from 24 up earn at most ``m2 / 18``."""
    return 18 * bad_level_revenue(pa, profile, m2) <= m2


# -- concentration ------------------------------------------------------------

def chernoff_tail(mu: float, delta: float) -> float:
    """Two-sided failure bound ``2 exp(-mu delta^2 / 4)``."""
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if mu <= 0:
        raise ValueError("mu must be positive")
    return 2.0 * math.exp(-mu * delta * delta / 4.0)


def out_of_band_frequency(m: int, draws: int, seed: int) -> float:
    """Share of Binomial(m, 1/2) draws outside ``[m/3, 2m/3]``."""
    rng = np.random.default_rng(seed)
    t = rng.binomial(m, 0.5, size=draws)
    outside = (3 * t < m) | (3 * t > 2 * m)
    return float(outside.mean())


# -- synthetic instances ------------------------------------------------------

def synthetic_level_profile(level: int) -> BidProfile:
    """Instance whose level-``level`` triples are as large as the level allows.

    ``n`` equal bids of ``2**level`` make every bidder a level winner as long
    as ``n < 2**(level+1)``. We take ``n = max(288*level, 2)`` where that fits,
    which yields large triples from level 12 up; below that large triples
    cannot exist and the instance falls back to ``n = 2**level`` (at least 2).
    """
    if level < 0:
        raise ValueError("level must be nonnegative")
    n = max(CONSTANTS.large_factor * level, 2)
    if n >= 1 << (level + 1):
        n = max(1 << level, 2)
    return BidProfile((1 << level,) * n)


# -- Monte Carlo event frequencies ---------------------------------------------

def _quantiles(x: np.ndarray) -> dict:
    if len(x) == 0:
        return {}
    qs = np.quantile(x, [0.0, 0.1, 0.5, 0.9, 1.0])
    return {
        "min": float(qs[0]),
        "p10": float(qs[1]),
        "median": float(qs[2]),
        "p90": float(qs[3]),
        "max": float(qs[4]),
        "mean": float(x.mean()),
    }


def three_sigma(p: float, trials: int) -> float:
    return 3.0 * math.sqrt(p * (1.0 - p) / trials)


def estimate_event_frequencies(profile: BidProfile, trials: int, seed: int, m2: int | None = None) -> dict:
    """Empirical frequencies of E1, E2 and E1∩E2 over seeded partitions.

    Partition ``t`` is the one the hybrid mechanism would draw with
    ``seeding.trial_seed(seed, t)``.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if m2 is None:
        m2 = m2_exact(profile).value
    seeds = seeding.trial_seeds(seed, trials)
    masks = partition_masks(seeds, profile.n)
    rev_pa = discretized_ladders(profile, masks).rev_pa
    e1 = 6 * rev_pa >= m2
    vacuous = e2_is_vacuous(m2)
    if vacuous:
        e2 = np.ones(trials, dtype=bool)
    else:
        e2 = event_e2_batch(profile, m2, masks)
    joint = e1 & e2
    ratio = rev_pa / m2 if m2 > 0 else np.ones(trials)
    f1, f2, fj = float(e1.mean()), float(e2.mean()), float(joint.mean())
    floors = {
        "e1": float(CONSTANTS.e1_prob) - three_sigma(float(CONSTANTS.e1_prob), trials),
        "e2": float(CONSTANTS.e2_prob) - three_sigma(float(CONSTANTS.e2_prob), trials),
        "joint": float(CONSTANTS.joint_prob) - three_sigma(float(CONSTANTS.joint_prob), trials),
    }
    return {
        "n": profile.n,
        "m2": m2,
        "trials": trials,
        "seed": seed,
        "freq_e1": f1,
        "freq_e2": f2,
        "freq_joint": fj,
        "e2_vacuous": vacuous,
        "e2_note": (
            "E2 holds vacuously: m2 < 2**24, so no level >= 24 has an integer price"
            if vacuous
            else "E2 evaluated on every level >= 24"
        ),
        "floors": floors,
        "pass": {
            "e1": f1 >= floors["e1"],
            "e2": f2 >= floors["e2"],
            "joint": fj >= floors["joint"],
        },
        "rev_pa_over_m2": _quantiles(np.asarray(ratio, dtype=float)),
    }
