"""Vectorised mechanism runs over many seeds at once.

The Monte Carlo harness needs 10^5-trial runs; the scalar mechanisms are
exact but slow in a Python loop. The functions here evaluate the same
mechanisms for an array of seeds with numpy and reproduce the scalar
results exactly (same coins, same ladder tie-breaking); the test-suite
checks that equivalence trial by trial.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import seeding
from .benchmarks import PriceGrid
from .core import BidProfile, second_highest
from .mechanisms import MechanismDescriptor

_NEG = np.int64(-(1 << 62))
# cells per chunk of the ladder DP table (keeps memory bounded)
_CELL_BUDGET = 16_000_000


def partition_masks(seeds: np.ndarray, n: int) -> np.ndarray:
    """``masks[t, i]`` is True iff bidder i lands in A under ``seeds[t]``."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    idx = np.arange(n, dtype=np.uint64)
    return seeding.coins_array(seeds[:, None], seeding.PARTITION, idx[None, :])


def _second_highest_rows(bids: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Second-highest bid among each row's members, 0 when undefined."""
    T, n = masks.shape
    if n < 2:
        return np.zeros(T, dtype=np.int64)
    masked = np.where(masks, bids[None, :], -1)
    top2 = np.partition(masked, n - 2, axis=1)[:, n - 2]
    return np.maximum(top2, 0)


@dataclass
class LadderBatch:
    """Per-trial results of the discretized ladder on A and its extension."""

    rev_pa: np.ndarray  # Rev(P_A)
    rev_pb: np.ndarray  # revenue of the extension posted to B
    pa_prices: np.ndarray | None  # (T, n) price of each A member, -1 outside A


def discretized_ladders(profile: BidProfile, masks: np.ndarray, keep_prices: bool = False) -> LadderBatch:
    """Best discretized monotone ladder over each row's A, plus its extension.

    Same suffix DP and smallest-optimal-price reconstruction as
    :func:`hybrid_auction.benchmarks.ladder_dp`, vectorised across rows.
    """
    bids = np.asarray(profile.bids, dtype=np.int64)
    masks = np.asarray(masks, dtype=bool)
    T, n = masks.shape
    grid = np.asarray(PriceGrid.powers_of_two(second_highest(profile)).candidates, dtype=np.int64)
    G = len(grid)
    chunk = max(1, _CELL_BUDGET // max(1, (n + 1) * G))
    rev_pa = np.zeros(T, dtype=np.int64)
    rev_pb = np.zeros(T, dtype=np.int64)
    pa_prices = np.full((T, n), -1, dtype=np.int64) if keep_prices else None
    contrib = np.where(bids[:, None] >= grid[None, :], grid[None, :], 0)  # (n, G)
    for lo in range(0, T, chunk):
        hi = min(T, lo + chunk)
        out = _ladder_chunk(bids, masks[lo:hi], grid, contrib, keep_prices)
        rev_pa[lo:hi], rev_pb[lo:hi] = out[0], out[1]
        if keep_prices:
            pa_prices[lo:hi] = out[2]
    return LadderBatch(rev_pa, rev_pb, pa_prices)


def _ladder_chunk(bids, masks, grid, contrib, keep_prices):
    T, n = masks.shape
    G = len(grid)
    cap = _second_highest_rows(bids, masks)
    invalid = grid[None, :] > cap[:, None]  # (T, G); grid[0] == 0 is always valid

    layers = np.empty((n + 1, T, G), dtype=np.int64)
    layers[n] = 0
    best = layers[n]
    for k in range(n - 1, -1, -1):
        h = best + contrib[k][None, :]
        h[invalid] = _NEG
        s = np.maximum.accumulate(h[:, ::-1], axis=1)[:, ::-1]
        best = np.where(masks[:, k, None], s, best)
        layers[k] = best
    rev_pa = layers[0][:, 0].copy()

    rows = np.arange(T)
    cols = np.arange(G)[None, :]
    lb = np.zeros(T, dtype=np.int64)
    running = np.zeros(T, dtype=np.int64)
    rev_pb = np.zeros(T, dtype=np.int64)
    prices = np.full((T, n), -1, dtype=np.int64) if keep_prices else None
    for k in range(n):
        in_a = masks[:, k]
        rev_pb += np.where(~in_a & (bids[k] >= running), running, 0)
        val = layers[k + 1] + contrib[k][None, :]
        val[invalid | (cols < lb[:, None])] = _NEG
        target = layers[k][rows, lb]
        choice = np.argmax(val == target[:, None], axis=1)
        lb = np.where(in_a, choice, lb)
        running = np.where(in_a, grid[choice], running)
        if keep_prices:
            prices[:, k] = np.where(in_a, grid[choice], -1)
    return rev_pa, rev_pb, prices


def _best_price_columns(bids: np.ndarray, halves: np.ndarray, candidates: np.ndarray):
    """Revenue matrix ``rev[t, p]`` of each half at each candidate price."""
    at_least = (bids[:, None] >= candidates[None, :]).astype(np.int64)  # (n, P)
    counts = halves.astype(np.int64) @ at_least
    return counts * candidates[None, :]


def rsop_revenues(profile: BidProfile, seeds: np.ndarray) -> np.ndarray:
    bids = np.asarray(profile.bids, dtype=np.int64)
    seeds = np.asarray(seeds, dtype=np.uint64)
    T, n = len(seeds), profile.n
    if n == 0:
        return np.zeros(T, dtype=np.int64)
    idx = np.arange(n, dtype=np.uint64)
    in_s = seeding.coins_array(seeds[:, None], seeding.RSOP_SPLIT, idx[None, :])
    candidates = np.unique(bids)
    rev_s = _best_price_columns(bids, in_s, candidates)
    rev_t = _best_price_columns(bids, ~in_s, candidates)
    # the first maximum is the lowest price; a zero maximum means price 0
    best_s = np.argmax(rev_s, axis=1)
    best_t = np.argmax(rev_t, axis=1)
    rows = np.arange(T)
    from_t = np.where(rev_s[rows, best_s] > 0, rev_t[rows, best_s], 0)  # T pays S's price
    from_s = np.where(rev_t[rows, best_t] > 0, rev_s[rows, best_t], 0)
    return from_t + from_s


@dataclass
class HybridBatch:
    revenue: np.ndarray
    y: np.ndarray
    rev_pa: np.ndarray
    rev_pb: np.ndarray


def hybrid_batch(profile: BidProfile, seeds: np.ndarray) -> HybridBatch:
    """Hybrid runs for every seed; P_A is evaluated whatever Y turns out to be."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    T = len(seeds)
    y = seeding.coins_array(seeds, seeding.HYBRID_COIN).astype(np.int64)
    ladders = discretized_ladders(profile, partition_masks(seeds, profile.n))
    revenue = ladders.rev_pb.copy()
    hit = y == 1
    if hit.any():
        sub_seeds = seeding.derive_array(seeds[hit], seeding.SUBAUCTION)
        revenue[hit] = rsop_revenues(profile, sub_seeds)
    if T == 0:
        revenue = np.zeros(0, dtype=np.int64)
    return HybridBatch(revenue, y, ladders.rev_pa, ladders.rev_pb)


def mechanism_revenues(mech: MechanismDescriptor, profile: BidProfile, seeds: np.ndarray) -> np.ndarray:
    """Revenue of ``mech`` on ``profile`` for each seed."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    T = len(seeds)
    bids = np.asarray(profile.bids, dtype=np.int64)
    if profile.n == 0:
        return np.zeros(T, dtype=np.int64)
    if mech.name == "hybrid":
        if mech.params["subauction"] != "rsop":
            raise NotImplementedError(f"no batch path for subauction {mech.params['subauction']!r}")
        return hybrid_batch(profile, seeds).revenue
    if mech.name == "rsop":
        return rsop_revenues(profile, seeds)
    if mech.name == "fixed":
        p = mech.params["price"]
        prices = np.full(profile.n, p, dtype=np.int64)
    else:
        prices = np.asarray(mech.params["prices"], dtype=np.int64)
        if len(prices) != profile.n:
            raise ValueError(f"posted mechanism has {len(prices)} prices for {profile.n} bidders")
    value = int(np.where(bids >= prices, prices, 0).sum())
    return np.full(T, value, dtype=np.int64)
