"""Domain types and deterministic pricing primitives.

Bidders are identified by their 0-based position in a :class:`BidProfile`;
position order is the known reserve-price order, so a price ladder must be
nondecreasing in index. All money is integral.
"""
from __future__ import annotations

import heapq
import json
import numbers
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence


def _as_money(value, what: str = "value") -> int:
    if type(value) is int and value >= 0:
        return value
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ValueError(f"{what} must be a nonnegative integer, got {value!r}")
    value = int(value)
    if value < 0:
        raise ValueError(f"{what} must be a nonnegative integer, got {value}")
    return value


@dataclass(frozen=True)
class BidProfile:
    """Ordered vector of nonnegative integer bids."""

    bids: tuple[int, ...]

    def __post_init__(self):
        bids = tuple(_as_money(b, f"bid {i}") for i, b in enumerate(self.bids))
        object.__setattr__(self, "bids", bids)

    @property
    def n(self) -> int:
        return len(self.bids)

    def __len__(self) -> int:
        return len(self.bids)

    def __getitem__(self, i: int) -> int:
        return self.bids[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.bids)

    @property
    def indices(self) -> range:
        return range(len(self.bids))

    def with_bid(self, i: int, bid: int) -> "BidProfile":
        """Copy of the profile with bidder ``i`` reporting ``bid`` instead."""
        bids = list(self.bids)
        bids[i] = bid
        return BidProfile(tuple(bids))

    # -- serialization -------------------------------------------------

    def to_json(self) -> str:
        return json.dumps(list(self.bids))

    @classmethod
    def parse(cls, text: str) -> "BidProfile":
        """Parse a JSON array or newline-delimited integers."""
        stripped = text.strip()
        if stripped.startswith("["):
            data = json.loads(stripped)
            if not isinstance(data, list):
                raise ValueError("bid file must hold a JSON array")
            return cls(tuple(data))
        bids = []
        for lineno, line in enumerate(stripped.splitlines(), 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                bids.append(int(line))
            except ValueError:
                raise ValueError(f"line {lineno}: not an integer bid: {line!r}") from None
        return cls(tuple(bids))

    @classmethod
    def load(cls, path: str | Path) -> "BidProfile":
        return cls.parse(Path(path).read_text())


@dataclass(frozen=True)
class PriceVector:
    """Prices offered to an ordered subset of bidders.

    ``subset`` is kept strictly increasing; ``prices[k]`` is offered to
    bidder ``subset[k]``.
    """

    subset: tuple[int, ...]
    prices: tuple[int, ...]
    _lookup: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        subset = tuple(int(i) for i in self.subset)
        prices = tuple(_as_money(p, "price") for p in self.prices)
        if len(subset) != len(prices):
            raise ValueError("subset and prices differ in length")
        if any(a >= b for a, b in zip(subset, subset[1:])):
            raise ValueError("subset must be strictly increasing")
        if subset and subset[0] < 0:
            raise ValueError("negative bidder index")
        object.__setattr__(self, "subset", subset)
        object.__setattr__(self, "prices", prices)
        object.__setattr__(self, "_lookup", dict(zip(subset, prices)))

    @classmethod
    def from_mapping(cls, mapping: Mapping[int, int]) -> "PriceVector":
        items = sorted(mapping.items())
        return cls(tuple(i for i, _ in items), tuple(p for _, p in items))

    @classmethod
    def zeros(cls, subset: Iterable[int]) -> "PriceVector":
        subset = tuple(sorted(subset))
        return cls(subset, (0,) * len(subset))

    def price(self, i: int) -> int:
        return self._lookup[i]

    def __contains__(self, i: int) -> bool:
        return i in self._lookup

    def __len__(self) -> int:
        return len(self.subset)

    def items(self) -> Iterator[tuple[int, int]]:
        return zip(self.subset, self.prices)

    def restrict(self, indices: Iterable[int]) -> "PriceVector":
        keep = set(indices)
        return PriceVector.from_mapping({i: p for i, p in self.items() if i in keep})

    def to_dict(self) -> dict:
        return {"subset": list(self.subset), "prices": list(self.prices)}


@dataclass(frozen=True)
class Outcome:
    """Allocation bit and payment per bidder."""

    allocations: tuple[int, ...]
    payments: tuple[int, ...]

    def __post_init__(self):
        allocations = tuple(int(x) for x in self.allocations)
        payments = tuple(_as_money(p, "payment") for p in self.payments)
        if len(allocations) != len(payments):
            raise ValueError("allocations and payments differ in length")
        for i, (x, p) in enumerate(zip(allocations, payments)):
            if x not in (0, 1):
                raise ValueError(f"allocation of bidder {i} must be 0 or 1")
            if x == 0 and p != 0:
                raise ValueError(f"bidder {i} pays {p} without receiving the item")
        object.__setattr__(self, "allocations", allocations)
        object.__setattr__(self, "payments", payments)

    @classmethod
    def empty(cls, n: int) -> "Outcome":
        return cls((0,) * n, (0,) * n)

    @property
    def n(self) -> int:
        return len(self.allocations)

    @property
    def revenue(self) -> int:
        return sum(self.payments)

    def is_individually_rational(self, profile: BidProfile) -> bool:
        """True iff no winner pays more than her reported bid."""
        return all(
            p <= b for x, p, b in zip(self.allocations, self.payments, profile.bids) if x
        )

    def to_dict(self) -> dict:
        return {
            "allocations": list(self.allocations),
            "payments": list(self.payments),
            "revenue": self.revenue,
        }


def _check_subset(profile: BidProfile, subset: Iterable[int]) -> list[int]:
    members = sorted(set(subset))
    if members and (members[0] < 0 or members[-1] >= profile.n):
        raise IndexError(f"subset {members} out of range for {profile.n} bidders")
    return members


def second_highest(profile: BidProfile, subset: Iterable[int] | None = None) -> int | None:
    """Second-largest bid in ``subset`` with multiset semantics.

    Returns None when fewer than two bidders are present; callers treat the
    corresponding benchmark as 0.
    """
    members = profile.indices if subset is None else _check_subset(profile, subset)
    top = heapq.nlargest(2, (profile[i] for i in members))
    if len(top) < 2:
        return None
    return top[1]


def revenue(pv: PriceVector, profile: BidProfile) -> int:
    _check_subset(profile, pv.subset)
    return sum(p for i, p in pv.items() if profile[i] >= p)


def _within_cap(pv: PriceVector, profile: BidProfile) -> bool:
    if not pv.prices:
        return True
    cap = second_highest(profile, pv.subset)
    top = max(pv.prices)
    if cap is None:
        return top == 0
    return top <= cap


def is_uniform(pv: PriceVector, profile: BidProfile) -> bool:
    if len(set(pv.prices)) > 1:
        return False
    return _within_cap(pv, profile)


def is_monotone(pv: PriceVector, profile: BidProfile) -> bool:
    if any(a > b for a, b in zip(pv.prices, pv.prices[1:])):
        return False
    return _within_cap(pv, profile)


def extend(pa: PriceVector, n: int) -> PriceVector:
    """Extend ``pa`` to the complement of its subset within ``range(n)``.

    Each outside bidder gets the largest price of an earlier-indexed member
    of ``pa``, or 0 when there is none.
    """
    if pa.subset and pa.subset[-1] >= n:
        raise IndexError("price vector refers to bidders beyond n")
    out_idx, out_prices = [], []
    running = 0
    for i in range(n):
        if i in pa:
            running = max(running, pa.price(i))
        else:
            out_idx.append(i)
            out_prices.append(running)
    return PriceVector(tuple(out_idx), tuple(out_prices))


def utility(outcome: Outcome, i: int, true_value: int) -> int:
    return true_value * outcome.allocations[i] - outcome.payments[i]


def total_bids(profile: BidProfile, subset: Sequence[int] | None = None) -> int:
    if subset is None:
        return sum(profile.bids)
    return sum(profile[i] for i in subset)
