from itertools import combinations_with_replacement

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hybrid_auction.benchmarks import (
    GridError,
    PriceGrid,
    benchmark_summary,
    brute_force_ladder,
    f2,
    ladder_dp,
    m2_discretized,
    m2_exact,
)
from hybrid_auction.core import BidProfile, PriceVector, is_monotone, is_uniform, revenue, second_highest

small_profiles = st.lists(st.integers(0, 6), max_size=5).map(lambda b: BidProfile(tuple(b)))


# -- oracles straight from the definitions ---------------------------------------
# Search every integer price (not just a grid) and keep vectors that pass
# is_uniform / is_monotone. Independent of PriceGrid and ladder_dp.

def f2_by_definition(profile):
    idx = tuple(profile.indices)
    best = 0
    for q in range(max(profile.bids, default=0) + 1):
        pv = PriceVector(idx, (q,) * len(idx))
        if is_uniform(pv, profile):
            best = max(best, revenue(pv, profile))
    return best


def m2_by_definition(profile, allowed=None):
    idx = tuple(profile.indices)
    top = max(profile.bids, default=0)
    prices = range(top + 1) if allowed is None else [p for p in allowed if p <= top]
    best = 0
    for ladder in combinations_with_replacement(prices, len(idx)):
        pv = PriceVector(idx, ladder)
        if is_monotone(pv, profile):
            best = max(best, revenue(pv, profile))
    return best


POWERS = [0] + [1 << t for t in range(8)]


@pytest.mark.parametrize("bids, expected", [((1, 3, 5), 6), ((1, 1, 4, 4), 8), ((7,), 0), ((), 0), ((5, 5), 10)])
def test_f2_examples(bids, expected):
    p = BidProfile(bids)
    assert f2_by_definition(p) == expected
    assert f2(p) == expected


@pytest.mark.parametrize(
    "bids, value, ladder",
    [((1, 1, 4, 4), 10, (1, 1, 4, 4)), ((5, 1, 3), 6, (3, 3, 3)), ((0, 0, 0), 0, (0, 0, 0))],
)
def test_m2_exact_examples(bids, value, ladder):
    p = BidProfile(bids)
    assert m2_by_definition(p) == value
    sol = m2_exact(p)
    assert sol.value == value
    assert sol.vector.prices == ladder


@pytest.mark.parametrize(
    "bids, value, ladder",
    [((1, 1, 4, 4), 10, (1, 1, 4, 4)), ((3, 3), 4, (2, 2)), ((), 0, ())],
)
def test_m2_discretized_examples(bids, value, ladder):
    p = BidProfile(bids)
    assert m2_by_definition(p, POWERS) == value
    sol = m2_discretized(p)
    assert sol.value == value
    assert sol.vector.prices == ladder


def test_ladder_dp_examples():
    p = BidProfile((2, 2))
    grid = PriceGrid((0, 1, 2))
    # six nondecreasing ladders over {0,1,2}: best is (2, 2)
    values = {lad: sum(x for x in lad) for lad in combinations_with_replacement((0, 1, 2), 2)}
    assert max(values.values()) == 4
    assert ladder_dp(p, [0, 1], grid).value == 4
    assert ladder_dp(BidProfile((3, 8, 1)), [0, 1, 2], PriceGrid((0,))).value == 0
    assert ladder_dp(BidProfile((9,)), [0], PriceGrid((0,))).value == 0


def test_ladder_dp_prefers_lexicographically_smallest():
    # (1,1,2) and (2,2,2) both earn 4
    p = BidProfile((2, 1, 2))
    assert ladder_dp(p, [0, 1, 2], PriceGrid((0, 1, 2))).vector.prices == (1, 1, 2)


def test_ladder_dp_on_subset_respects_order():
    p = BidProfile((9, 1, 9, 2, 9))
    sol = ladder_dp(p, [3, 0, 4], PriceGrid.bid_values(p, [0, 3, 4]))
    assert sol.vector.subset == (0, 3, 4)
    assert sol.value == revenue(sol.vector, p)


def test_grid_validation():
    with pytest.raises(GridError):
        PriceGrid((1, 2))
    with pytest.raises(GridError):
        PriceGrid((0, 2, 1))
    p = BidProfile((1, 3, 5))
    with pytest.raises(GridError):
        ladder_dp(p, [0, 1, 2], PriceGrid((0, 4)))  # cap 3
    with pytest.raises(GridError):
        ladder_dp(BidProfile((9,)), [0], PriceGrid((0, 1)))


def test_grids():
    assert PriceGrid.powers_of_two(9).candidates == (0, 1, 2, 4, 8)
    assert PriceGrid.powers_of_two(0).candidates == (0,)
    assert PriceGrid.powers_of_two(None).candidates == (0,)
    assert PriceGrid.bid_values(BidProfile((1, 3, 5))).candidates == (0, 1, 3)
    assert PriceGrid.bid_values(BidProfile((5,))).candidates == (0,)


def test_brute_force_examples_and_guard():
    assert brute_force_ladder(BidProfile((1, 1, 4, 4)), range(4), PriceGrid.bid_values(BidProfile((1, 1, 4, 4)))).value == 10
    p = BidProfile((5, 1, 3))
    assert brute_force_ladder(p, range(3), PriceGrid.bid_values(p)).value == 6
    assert brute_force_ladder(BidProfile(()), [], PriceGrid((0,))).value == 0
    with pytest.raises(ValueError):
        brute_force_ladder(BidProfile((1,) * 11), range(11), PriceGrid((0, 1)))
    with pytest.raises(ValueError):
        brute_force_ladder(BidProfile((300, 300)), range(2), PriceGrid.powers_of_two(300))


@settings(max_examples=200)
@given(small_profiles)
def test_benchmarks_match_definitions(p):
    assert f2(p) == f2_by_definition(p)
    assert m2_exact(p).value == m2_by_definition(p)
    assert m2_discretized(p).value == m2_by_definition(p, POWERS)


@given(st.lists(st.integers(0, 40), max_size=7))
def test_ladder_dp_equals_brute_force(bids):
    p = BidProfile(tuple(bids))
    for grid in (PriceGrid.bid_values(p), PriceGrid.powers_of_two(second_highest(p))):
        if len(grid) > 8:
            continue
        assert ladder_dp(p, p.indices, grid) == brute_force_ladder(p, p.indices, grid)


@given(st.lists(st.integers(0, 200), max_size=30))
def test_solution_invariants_and_sandwich(bids):
    p = BidProfile(tuple(bids))
    exact = m2_exact(p)
    disc = m2_discretized(p)
    for sol in (exact, disc):
        assert is_monotone(sol.vector, p)
        assert sol.value == revenue(sol.vector, p)
    assert all(x == 0 or x & (x - 1) == 0 for x in disc.vector.prices)
    assert f2(p) <= exact.value
    assert exact.value <= 2 * disc.value
    assert disc.value <= exact.value


@given(st.lists(st.integers(0, 30), min_size=2, max_size=8), st.data())
def test_off_grid_monotone_ladders_never_beat_m2(bids, data):
    p = BidProfile(tuple(bids))
    cap = sorted(bids)[-2]
    ladder = sorted(data.draw(st.lists(st.integers(0, cap), min_size=len(bids), max_size=len(bids))))
    pv = PriceVector(tuple(p.indices), tuple(ladder))
    assert is_monotone(pv, p)
    assert revenue(pv, p) <= m2_exact(p).value


@given(st.lists(st.integers(0, 100), max_size=20))
def test_scale_covariance(bids):
    p = BidProfile(tuple(bids))
    doubled = BidProfile(tuple(2 * b for b in bids))
    assert f2(doubled) == 2 * f2(p)
    assert m2_exact(doubled).value == 2 * m2_exact(p).value
    assert m2_discretized(doubled).value == 2 * m2_discretized(p).value


def test_benchmark_summary():
    s = benchmark_summary(BidProfile((1, 1, 4, 4)))
    assert s["f2"] == 8 and s["m2"] == 10 and s["m2_discretized"] == 10
    assert s["ladder"] == [1, 1, 4, 4]
