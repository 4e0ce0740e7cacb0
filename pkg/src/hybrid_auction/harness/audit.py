"""Exhaustive truthfulness audit at fixed seeds."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from ..core import BidProfile, Outcome, utility
from ..mechanisms import MechanismDescriptor, run_auction

Runner = Callable[[BidProfile, int], Outcome]


@dataclass(frozen=True)
class Violation:
    seed: int
    bidder: int
    true_value: int
    deviation: int
    truthful_utility: int
    deviation_utility: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def shaded_bid_auction(profile: BidProfile, seed: int) -> Outcome:
    """Deliberately untruthful canary: everyone buys at one below her own bid."""
    pay = tuple(max(b - 1, 0) for b in profile)
    return Outcome((1,) * profile.n, pay)


def _runner(mech: MechanismDescriptor | Runner) -> Runner:
    if isinstance(mech, MechanismDescriptor):
        return lambda profile, seed: run_auction(mech, profile, seed)
    return mech


def audit_truthfulness(
    mech: MechanismDescriptor | Runner,
    profile: BidProfile,
    bidder: int | Iterable[int] | None,
    value_grid: Sequence[int],
    seeds: Iterable[int],
) -> list[Violation]:
    """Every (seed, bidder, true value, deviation) where lying pays.

    For each seed the mechanism is rerun once per grid bid of the audited
    bidder, others fixed; a case is reported when the deviation's utility
    beats the truthful one or the truthful utility is negative.
    ``bidder=None`` audits everyone.
    """
    grid = sorted(set(int(v) for v in value_grid))
    if not grid:
        raise ValueError("value grid must be nonempty")
    if bidder is None:
        bidders = list(profile.indices)
    elif isinstance(bidder, int):
        bidders = [bidder]
    else:
        bidders = list(bidder)
    run = _runner(mech)
    found = []
    for seed in seeds:
        for i in bidders:
            outcomes = {b: run(profile.with_bid(i, b), seed) for b in grid}
            for v in grid:
                honest = utility(outcomes[v], i, v)
                for b, out in outcomes.items():
                    lied = utility(out, i, v)
                    if lied > honest or (b == v and honest < 0):
                        found.append(Violation(seed, i, v, b, honest, lied))
    return found
