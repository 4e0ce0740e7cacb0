"""Seeded instance families.

None of these come from the literature the mechanism was analysed in;
they are test-bench choices and reports label them by family name.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import reduce
from typing import Mapping

import numpy as np

from .. import seeding
from ..analysis import synthetic_level_profile
from ..core import BidProfile

FAMILIES = (
    "iid-uniform",
    "iid-geometric",
    "ordered-reserves",
    "equal-revenue",
    "adversarial-spike",
    "synthetic-level-l",
)

_DEFAULTS = {
    "iid-uniform": {"n": 16, "low": 1, "high": 64},
    "iid-geometric": {"n": 16, "p": 0.25, "scale": 4},
    "ordered-reserves": {"n": 16, "low": 2, "high": 128},
    "equal-revenue": {"n": 8, "ascending": False, "scale": None},
    "adversarial-spike": {"n": 16, "base": 1, "spike": 1024, "spikes": 2},
    "synthetic-level-l": {"level": 24},
}


@dataclass(frozen=True)
class InstanceGenerator:
    family: str
    params: Mapping = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}; choose from {', '.join(FAMILIES)}")
        unknown = set(self.params) - set(_DEFAULTS[self.family])
        if unknown:
            raise ValueError(f"{self.family}: unknown parameters {sorted(unknown)}")
        merged = {**_DEFAULTS[self.family], **self.params}
        _validate(self.family, merged)
        object.__setattr__(self, "params", merged)

    def to_config(self) -> dict:
        return {"family": self.family, "params": dict(self.params), "seed": self.seed}

    @classmethod
    def from_config(cls, cfg: Mapping) -> "InstanceGenerator":
        return cls(cfg["family"], dict(cfg.get("params", {})), int(cfg.get("seed", 0)))


def _validate(family: str, p: dict) -> None:
    def need(cond, msg):
        if not cond:
            raise ValueError(f"{family}: {msg}")

    if "n" in p:
        need(isinstance(p["n"], int) and p["n"] >= 0, "n must be a nonnegative integer")
    if family in ("iid-uniform", "ordered-reserves"):
        need(0 <= p["low"] <= p["high"], "need 0 <= low <= high")
    elif family == "iid-geometric":
        need(0 < p["p"] <= 1, "p must lie in (0, 1]")
        need(p["scale"] >= 1, "scale must be >= 1")
    elif family == "equal-revenue":
        need(p["scale"] is None or p["scale"] >= 1, "scale must be >= 1")
    elif family == "adversarial-spike":
        need(0 <= p["spikes"] <= p["n"], "spikes must lie in [0, n]")
        need(0 <= p["base"] <= p["spike"], "need 0 <= base <= spike")
    elif family == "synthetic-level-l":
        need(isinstance(p["level"], int) and 0 <= p["level"] <= 30, "level must be in [0, 30]")


def ordered_reserve_caps(n: int, low: int, high: int, rng: np.random.Generator) -> np.ndarray:
    """Nondecreasing upper ends ``h_i`` of the per-bidder value ranges.

    Bidder i values uniformly on ``{0..h_i}``, whose revenue-maximising
    posted price grows with ``h_i``, so reserves follow index order.
    """
    caps = np.sort(rng.integers(low, high, size=n, endpoint=True))
    if np.any(np.diff(caps) < 0):
        raise AssertionError("reserve prices must be nondecreasing in bidder index")
    return caps


# lcm(1..n) outgrows int64 arithmetic quickly; fall back to rounded bids
_EQUAL_REVENUE_MAX_SCALE = 10**12


def equal_revenue_bids(n: int, ascending: bool = False, scale: int | None = None) -> list[int]:
    """``scale // k`` for k = 1..n.

    With ``scale = lcm(1..n)`` (the default while it stays below 10**12)
    every bid-value price earns exactly ``scale``; otherwise only up to
    rounding.
    """
    if scale is None:
        scale = reduce(math.lcm, range(1, n + 1), 1)
        if scale > _EQUAL_REVENUE_MAX_SCALE:
            scale = _EQUAL_REVENUE_MAX_SCALE
    bids = [scale // k for k in range(1, n + 1)]
    return bids[::-1] if ascending else bids


def generate_instance(gen: InstanceGenerator, index: int = 0) -> BidProfile:
    """The ``index``-th instance of ``gen``; deterministic in ``(gen, index)``."""
    p = gen.params
    rng = np.random.default_rng(seeding.derive(gen.seed, seeding.INSTANCE, index))
    fam = gen.family
    if fam == "iid-uniform":
        bids = rng.integers(p["low"], p["high"], size=p["n"], endpoint=True)
    elif fam == "iid-geometric":
        bids = rng.geometric(p["p"], size=p["n"]) * p["scale"]
    elif fam == "ordered-reserves":
        caps = ordered_reserve_caps(p["n"], p["low"], p["high"], rng)
        bids = rng.integers(0, caps, endpoint=True) if p["n"] else np.zeros(0, dtype=np.int64)
    elif fam == "equal-revenue":
        bids = equal_revenue_bids(p["n"], p["ascending"], p["scale"])
    elif fam == "adversarial-spike":
        bids = np.full(p["n"], p["base"], dtype=np.int64)
        if p["spikes"]:
            where = rng.choice(p["n"], size=p["spikes"], replace=False)
            bids[where] = p["spike"]
    else:
        return synthetic_level_profile(p["level"])
    return BidProfile(tuple(int(b) for b in bids))
