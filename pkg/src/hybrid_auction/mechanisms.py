"""Truthful digital-goods auctions.

All mechanisms are deterministic functions of ``(profile, seed)``. The
randomness a bidder faces (partition membership, the branch coin, RSOP's
split) comes from labelled streams in :mod:`hybrid_auction.seeding` and
never reads a bid.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Mapping, Sequence

from . import seeding
from .benchmarks import LadderSolution, m2_discretized
from .core import BidProfile, Outcome, PriceVector, extend

SubAuction = Callable[[BidProfile, int], Outcome]


@dataclass(frozen=True)
class Partition:
    """Split of the bidders into a sample set ``A`` and offer set ``B``."""

    A: tuple[int, ...]
    B: tuple[int, ...]

    def __post_init__(self):
        if set(self.A) & set(self.B):
            raise ValueError("A and B must be disjoint")

    @classmethod
    def from_mask(cls, in_a: Sequence[bool]) -> "Partition":
        a = tuple(i for i, x in enumerate(in_a) if x)
        b = tuple(i for i, x in enumerate(in_a) if not x)
        return cls(a, b)

    @property
    def n(self) -> int:
        return len(self.A) + len(self.B)

    def mask(self) -> list[bool]:
        m = [False] * self.n
        for i in self.A:
            m[i] = True
        return m


@lru_cache(maxsize=4096)
def _coin_row(seed: int, label: int, n: int) -> tuple[bool, ...]:
    return tuple(bool(seeding.coin(seed, label, i)) for i in range(n))


@dataclass(frozen=True)
class Randomness:
    """Coins of one mechanism run, all derived from ``seed``."""

    seed: int

    def in_sample(self, i: int) -> bool:
        return bool(seeding.coin(self.seed, seeding.PARTITION, i))

    def partition(self, n: int) -> Partition:
        return Partition.from_mask(_coin_row(self.seed, seeding.PARTITION, n))

    @property
    def y(self) -> int:
        return seeding.coin(self.seed, seeding.HYBRID_COIN)

    @property
    def subauction_seed(self) -> int:
        return seeding.derive(self.seed, seeding.SUBAUCTION)


def fixed_price_offer(profile: BidProfile, pv: PriceVector, n: int | None = None) -> Outcome:
    """Post ``pv`` to its subset; everyone else gets nothing."""
    n = profile.n if n is None else n
    alloc = [0] * n
    pay = [0] * n
    for i, p in pv.items():
        if profile[i] >= p:
            alloc[i] = 1
            pay[i] = p
    return Outcome(tuple(alloc), tuple(pay))


def optimal_single_price(bids: Sequence[int]) -> int:
    """Revenue-maximising price among the bid values, lowest on ties.

    Uncapped, as RSOP uses it. Returns 0 for an empty or all-zero sample.
    """
    ordered = sorted(bids, reverse=True)
    best_price, best_rev = 0, 0
    for k, q in enumerate(ordered):
        if k + 1 < len(ordered) and ordered[k + 1] == q:
            continue
        rev = q * (k + 1)
        if rev >= best_rev and rev > 0:
            best_price, best_rev = q, rev
    return best_price


def rsop_with_split(profile: BidProfile, in_s: Sequence[bool]) -> Outcome:
    """RSOP on a given split: each half is offered the other half's optimal price."""
    s = [i for i in profile.indices if in_s[i]]
    t = [i for i in profile.indices if not in_s[i]]
    price_s = optimal_single_price([profile[i] for i in s])
    price_t = optimal_single_price([profile[i] for i in t])
    posted = {i: price_s for i in t}
    posted.update({i: price_t for i in s})
    return fixed_price_offer(profile, PriceVector.from_mapping(posted))


def rsop_offers(profile: BidProfile, seed: int) -> list[int]:
    in_s = _coin_row(seed, seeding.RSOP_SPLIT, profile.n)
    price_s = optimal_single_price([b for b, x in zip(profile, in_s) if x])
    price_t = optimal_single_price([b for b, x in zip(profile, in_s) if not x])
    return [price_t if x else price_s for x in in_s]


def rsop(profile: BidProfile, seed: int) -> Outcome:
    """Random sampling optimal price auction."""
    return rsop_with_split(profile, _coin_row(seed, seeding.RSOP_SPLIT, profile.n))


SUBAUCTIONS: dict[str, SubAuction] = {"rsop": rsop}


@dataclass(frozen=True)
class HybridTrace:
    """Everything one hybrid run decided, for analysis and tests."""

    partition: Partition
    y: int
    pa: LadderSolution
    pb: PriceVector
    outcome: Outcome


def general_scheme(profile: BidProfile, partition: Partition) -> tuple[LadderSolution, PriceVector, Outcome]:
    """The Y = 0 branch on a fixed partition.

    P_A is the best discretized monotone ladder over A (cap included), P_B
    its extension; only B is served, A gets nothing.
    """
    pa = m2_discretized(profile, partition.A)
    pb = extend(pa.vector, profile.n)
    return pa, pb, fixed_price_offer(profile, pb)


def hybrid_trace(profile: BidProfile, seed: int, subauction: SubAuction = rsop) -> HybridTrace:
    rnd = Randomness(seed)
    partition = rnd.partition(profile.n)
    pa, pb, posted = general_scheme(profile, partition)
    y = rnd.y
    outcome = subauction(profile, rnd.subauction_seed) if y == 1 else posted
    return HybridTrace(partition, y, pa, pb, outcome)


def hybrid_auction(profile: BidProfile, seed: int, subauction: SubAuction = rsop) -> Outcome:
    rnd = Randomness(seed)
    if rnd.y == 1:
        return subauction(profile, rnd.subauction_seed)
    _, _, outcome = general_scheme(profile, rnd.partition(profile.n))
    return outcome


@dataclass(frozen=True)
class MechanismDescriptor:
    """Names a mechanism and its parameters.

    ``hybrid`` (param ``subauction``, default ``rsop``), ``rsop``,
    ``fixed`` (param ``price``) and ``posted`` (param ``prices``, one per
    bidder). String forms: ``hybrid``, ``rsop``, ``fixed:<price>``.
    """

    name: str
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in ("hybrid", "rsop", "fixed", "posted"):
            raise ValueError(f"unknown mechanism {self.name!r}")
        params = dict(self.params)
        if self.name == "fixed":
            if "price" not in params:
                raise ValueError("fixed mechanism needs a price")
            params["price"] = int(params["price"])
            if params["price"] < 0:
                raise ValueError("fixed price must be nonnegative")
        elif self.name == "posted":
            params["prices"] = tuple(int(p) for p in params.get("prices", ()))
            if any(p < 0 for p in params["prices"]):
                raise ValueError("posted prices must be nonnegative")
        elif self.name == "hybrid":
            params.setdefault("subauction", "rsop")
            if params["subauction"] not in SUBAUCTIONS:
                raise ValueError(f"unknown subauction {params['subauction']!r}")
        object.__setattr__(self, "params", params)

    @classmethod
    def parse(cls, text: str) -> "MechanismDescriptor":
        name, _, arg = text.partition(":")
        if name == "fixed":
            try:
                return cls("fixed", {"price": int(arg)})
            except ValueError:
                raise ValueError(f"bad fixed price in {text!r}") from None
        if name == "hybrid" and arg:
            return cls("hybrid", {"subauction": arg})
        if arg:
            raise ValueError(f"mechanism {name!r} takes no argument")
        return cls(name)

    @classmethod
    def from_config(cls, cfg) -> "MechanismDescriptor":
        if isinstance(cfg, str):
            return cls.parse(cfg)
        cfg = dict(cfg)
        return cls(cfg.pop("name"), cfg.pop("params", cfg))

    def to_config(self) -> dict:
        params = {k: list(v) if isinstance(v, tuple) else v for k, v in self.params.items()}
        return {"name": self.name, "params": params}

    def __str__(self) -> str:
        if self.name == "fixed":
            return f"fixed:{self.params['price']}"
        if self.name == "hybrid" and self.params["subauction"] != "rsop":
            return f"hybrid:{self.params['subauction']}"
        return self.name


def run_auction(mech: MechanismDescriptor, profile: BidProfile, seed: int) -> Outcome:
    if profile.n == 0:
        return Outcome.empty(0)
    if mech.name == "hybrid":
        return hybrid_auction(profile, seed, SUBAUCTIONS[mech.params["subauction"]])
    if mech.name == "rsop":
        return rsop(profile, seed)
    if mech.name == "fixed":
        return fixed_price_offer(profile, PriceVector(tuple(profile.indices), (mech.params["price"],) * profile.n))
    prices = mech.params["prices"]
    if len(prices) != profile.n:
        raise ValueError(f"posted mechanism has {len(prices)} prices for {profile.n} bidders")
    return fixed_price_offer(profile, PriceVector(tuple(profile.indices), prices))


def offered_prices(mech: MechanismDescriptor, profile: BidProfile, seed: int) -> list[int | None]:
    """Price each bidder is offered in one run; None where she is offered nothing.

    For every shipped mechanism, entry ``i`` does not depend on ``profile[i]``.
    """
    if mech.name == "fixed":
        return [mech.params["price"]] * profile.n
    if mech.name == "posted":
        return list(mech.params["prices"])
    if mech.name == "rsop":
        return rsop_offers(profile, seed)
    rnd = Randomness(seed)
    if rnd.y == 1:
        if mech.params["subauction"] != "rsop":
            raise NotImplementedError("offers are only exposed for the rsop subauction")
        return rsop_offers(profile, rnd.subauction_seed)
    _, pb, _ = general_scheme(profile, rnd.partition(profile.n))
    return [pb.price(i) if i in pb else None for i in profile.indices]
