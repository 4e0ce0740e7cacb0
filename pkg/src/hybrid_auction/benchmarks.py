"""Revenue benchmarks F2 and M2 and the discretized ladder optimiser.

Both monotone benchmarks run through one dynamic program over a candidate
price grid (:func:`ladder_dp`). :func:`brute_force_ladder` enumerates every
nondecreasing ladder on the same grid and serves as its oracle.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations_with_replacement
from typing import Iterable

from .core import BidProfile, PriceVector, _check_subset, second_highest

BRUTE_FORCE_MAX_MEMBERS = 10
BRUTE_FORCE_MAX_GRID = 8


class GridError(ValueError):
    """Raised for price grids that are unsorted, lack 0, or exceed the cap."""


@dataclass(frozen=True)
class PriceGrid:
    """Sorted candidate prices, always starting with 0."""

    candidates: tuple[int, ...]
    kind: str = "custom"

    def __post_init__(self):
        c = tuple(int(x) for x in self.candidates)
        if not c or c[0] != 0:
            raise GridError("price grid must contain 0 as its first entry")
        if any(a >= b for a, b in zip(c, c[1:])):
            raise GridError(f"price grid must be strictly increasing: {c}")
        object.__setattr__(self, "candidates", c)

    @classmethod
    def bid_values(cls, profile: BidProfile, subset: Iterable[int] | None = None) -> "PriceGrid":
        """Distinct bids of ``subset`` that do not exceed its second-highest bid."""
        members = profile.indices if subset is None else _check_subset(profile, subset)
        cap = second_highest(profile, members)
        if cap is None:
            return cls((0,), "bid-values")
        values = {profile[i] for i in members if profile[i] <= cap}
        values.add(0)
        return cls(tuple(sorted(values)), "bid-values")

    @classmethod
    def powers_of_two(cls, cap: int | None) -> "PriceGrid":
        """0 plus every power of two ``2**t <= cap`` with ``t >= 0``."""
        values = [0]
        if cap is not None:
            q = 1
            while q <= cap:
                values.append(q)
                q <<= 1
        return cls(tuple(values), "powers-of-two")

    def __len__(self) -> int:
        return len(self.candidates)

    @property
    def top(self) -> int:
        return self.candidates[-1]


@dataclass(frozen=True)
class LadderSolution:
    vector: PriceVector
    value: int

    def to_dict(self) -> dict:
        return {"value": self.value, **self.vector.to_dict()}


def _validate_grid(profile: BidProfile, members: list[int], grid: PriceGrid) -> None:
    cap = second_highest(profile, members)
    if cap is None:
        if grid.top != 0:
            raise GridError("fewer than two bidders: only the zero grid is allowed")
    elif grid.top > cap:
        raise GridError(f"grid entry {grid.top} exceeds the second-highest bid {cap}")


def ladder_dp(profile: BidProfile, subset: Iterable[int], grid: PriceGrid) -> LadderSolution:
    """Best nondecreasing ladder over ``subset`` with prices from ``grid``.

    The table is filled over suffixes: ``best[k][g]`` is the largest revenue
    obtainable from members ``k..`` when member ``k`` must be priced at least
    ``grid[g]``. Reading it front to back and always taking the smallest
    price that stays optimal yields the lexicographically smallest optimal
    ladder. Cost is O(|subset| * |grid|).
    """
    members = _check_subset(profile, subset)
    _validate_grid(profile, members, grid)
    c = grid.candidates
    G = len(c)
    bids = [profile[i] for i in members]
    K = len(bids)

    best: list[list[int]] = [[0] * G for _ in range(K + 1)]
    for k in range(K - 1, -1, -1):
        b = bids[k]
        after = best[k + 1]
        row = best[k]
        run = -1
        for g in range(G - 1, -1, -1):
            p = c[g]
            v = after[g] + (p if b >= p else 0)
            if v > run:
                run = v
            row[g] = run

    prices = []
    g = 0
    for k in range(K):
        b = bids[k]
        target = best[k][g]
        after = best[k + 1]
        h = g
        while after[h] + (c[h] if b >= c[h] else 0) != target:
            h += 1
        prices.append(c[h])
        g = h
    return LadderSolution(PriceVector(tuple(members), tuple(prices)), best[0][0])


def brute_force_ladder(profile: BidProfile, subset: Iterable[int], grid: PriceGrid) -> LadderSolution:
    """Exhaustive search over nondecreasing grid ladders (small inputs only)."""
    members = _check_subset(profile, subset)
    if len(members) > BRUTE_FORCE_MAX_MEMBERS or len(grid) > BRUTE_FORCE_MAX_GRID:
        raise ValueError(
            f"brute force limited to {BRUTE_FORCE_MAX_MEMBERS} bidders and "
            f"{BRUTE_FORCE_MAX_GRID} grid prices"
        )
    _validate_grid(profile, members, grid)
    bids = [profile[i] for i in members]
    best_value, best_ladder = -1, ()
    # tuples arrive in lexicographic order, so strict improvement keeps the
    # lexicographically smallest optimum
    for ladder in combinations_with_replacement(grid.candidates, len(members)):
        value = sum(p for p, b in zip(ladder, bids) if b >= p)
        if value > best_value:
            best_value, best_ladder = value, ladder
    return LadderSolution(PriceVector(tuple(members), best_ladder), best_value)


def f2(profile: BidProfile, subset: Iterable[int] | None = None) -> int:
    """Best revenue of a single price capped at the second-highest bid."""
    members = list(profile.indices) if subset is None else _check_subset(profile, subset)
    cap = second_highest(profile, members)
    if cap is None:
        return 0
    bids = sorted((profile[i] for i in members), reverse=True)
    best = 0
    # at the last occurrence of q in descending order, k + 1 bids are >= q
    for k, q in enumerate(bids):
        if q <= cap and (k + 1 == len(bids) or bids[k + 1] != q):
            best = max(best, q * (k + 1))
    return best


def m2_exact(profile: BidProfile, subset: Iterable[int] | None = None) -> LadderSolution:
    members = list(profile.indices) if subset is None else _check_subset(profile, subset)
    return ladder_dp(profile, members, PriceGrid.bid_values(profile, members))


def m2_discretized(profile: BidProfile, subset: Iterable[int] | None = None) -> LadderSolution:
    """Best monotone ladder whose nonzero prices are powers of two."""
    members = list(profile.indices) if subset is None else _check_subset(profile, subset)
    cap = second_highest(profile, members)
    return ladder_dp(profile, members, PriceGrid.powers_of_two(cap))


def m2(profile: BidProfile, subset: Iterable[int] | None = None) -> int:
    return m2_exact(profile, subset).value


def benchmark_summary(profile: BidProfile) -> dict:
    exact = m2_exact(profile)
    disc = m2_discretized(profile)
    return {
        "n": profile.n,
        "f2": f2(profile),
        "m2": exact.value,
        "m2_discretized": disc.value,
        "ladder": list(exact.vector.prices),
        "ladder_discretized": list(disc.vector.prices),
    }
