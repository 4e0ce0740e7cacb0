"""Hybrid Auction for prior-free digital goods with ordered bidders."""
from .benchmarks import LadderSolution, PriceGrid, f2, m2_discretized, m2_exact
from .core import BidProfile, Outcome, PriceVector, extend, revenue, second_highest
from .mechanisms import MechanismDescriptor, hybrid_auction, rsop, run_auction

__version__ = "0.1.0"

__all__ = [
    "BidProfile",
    "LadderSolution",
    "MechanismDescriptor",
    "Outcome",
    "PriceGrid",
    "PriceVector",
    "extend",
    "f2",
    "hybrid_auction",
    "m2_discretized",
    "m2_exact",
    "revenue",
    "rsop",
    "run_auction",
    "second_highest",
]
