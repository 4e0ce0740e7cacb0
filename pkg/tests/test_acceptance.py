"""Acceptance gate: one test per criterion, summarised at the end of the run."""
import math
import time

import numpy as np
import pytest

from hybrid_auction.analysis import (
    CONSTANTS,
    bad_level_bound_check,
    bad_level_revenue,
    chernoff_tail,
    enumerate_triples,
    estimate_event_frequencies,
    out_of_band_frequency,
    synthetic_level_profile,
)
from hybrid_auction.benchmarks import PriceGrid, brute_force_ladder, f2, ladder_dp, m2_discretized, m2_exact
from hybrid_auction.core import BidProfile, second_highest
from hybrid_auction.harness import (
    ExperimentConfig,
    InstanceGenerator,
    audit_truthfulness,
    generate_instance,
    run_experiment,
    shaded_bid_auction,
)
from hybrid_auction.harness.experiment import evaluate_instance, report_json
from hybrid_auction.mechanisms import MechanismDescriptor, hybrid_trace

DESK_FAMILIES = ("iid-uniform", "iid-geometric", "ordered-reserves", "equal-revenue", "adversarial-spike")


def sigma3(p, trials):
    return 3 * math.sqrt(p * (1 - p) / trials)


def desk_instances(per_family, seed=2024):
    """``per_family`` instances of every desk family with n growing from 4."""
    out = []
    for k in range(per_family):
        for family in DESK_FAMILIES:
            gen = InstanceGenerator(family, {"n": 4 + 3 * k}, seed=seed)
            out.append((family, generate_instance(gen, k)))
    return out


@pytest.mark.criterion(1, "ladder_dp equals brute force (1000 instances, both grids, < 60 s)")
def test_criterion_1_oracle_equivalence(detail):
    rng = np.random.default_rng(1)
    start = time.perf_counter()
    mismatches = 0
    for _ in range(1000):
        n = int(rng.integers(0, 8))
        p = BidProfile(tuple(int(b) for b in rng.integers(0, 17, n)))
        for grid in (PriceGrid.bid_values(p), PriceGrid.powers_of_two(second_highest(p))):
            mismatches += ladder_dp(p, p.indices, grid) != brute_force_ladder(p, p.indices, grid)
    elapsed = time.perf_counter() - start
    detail(f"{mismatches} mismatches in {elapsed:.1f}s")
    assert mismatches == 0
    assert elapsed < 60


@pytest.mark.criterion(2, "f2 <= m2 <= 2 m2_discretized on 10000 instances (n <= 64)")
def test_criterion_2_benchmark_sandwich(detail):
    rng = np.random.default_rng(2)
    failures = 0
    for k in range(10_000):
        n = int(rng.integers(0, 65))
        if k % 3 == 0:
            bids = rng.integers(0, 1001, n)
        elif k % 3 == 1:
            bids = rng.geometric(0.1, n) * int(rng.integers(1, 50))
        else:
            bids = rng.integers(0, 2**40, n)
        p = BidProfile(tuple(int(b) for b in bids))
        exact = m2_exact(p).value
        failures += not (f2(p) <= exact <= 2 * m2_discretized(p).value)
    detail(f"{failures} failures")
    assert failures == 0


@pytest.mark.criterion(3, "zero truthfulness violations on 200 profiles, canary caught")
def test_criterion_3_truthfulness(detail):
    rng = np.random.default_rng(3)
    grid = range(17)
    seeds = range(32)
    profiles = []
    for _ in range(200):
        n = int(rng.integers(1, 9))
        profiles.append(BidProfile(tuple(int(b) for b in rng.integers(0, 17, n))))
    counts = {}
    for text in ("hybrid", "rsop", "fixed:5"):
        mech = MechanismDescriptor.parse(text)
        counts[text] = sum(len(audit_truthfulness(mech, p, None, grid, seeds)) for p in profiles)
    canary = sum(len(audit_truthfulness(shaded_bid_auction, p, None, grid, [0])) for p in profiles)
    detail(", ".join(f"{k}: {v}" for k, v in counts.items()) + f", canary: {canary}")
    assert all(v == 0 for v in counts.values())
    assert canary >= 1


@pytest.fixture(scope="module")
def event_reports():
    return [(fam, p, estimate_event_frequencies(p, 100_000, seed=40 + i)) for i, (fam, p) in enumerate(desk_instances(10))]


@pytest.mark.criterion(4, "freq(E1) >= 1/16 - 3 sigma on 50 instances, 1e5 partitions each")
def test_criterion_4_e1_floor(event_reports, detail):
    assert len(event_reports) == 50
    floor = float(CONSTANTS.e1_prob) - sigma3(0.0625, 100_000)
    assert floor == pytest.approx(0.0625 - 0.0023, abs=1e-4)
    freqs = [r["freq_e1"] for _, _, r in event_reports]
    detail(f"min freq {min(freqs):.4f} vs floor {floor:.4f}")
    assert all(f >= floor for f in freqs)


@pytest.mark.criterion(5, "freq(E1 and E2) >= 1/32 - 3 sigma, vacuity of E2 stated")
def test_criterion_5_joint_floor(event_reports, detail):
    floor = float(CONSTANTS.joint_prob) - sigma3(1 / 32, 100_000)
    vacuous = 0
    for _, p, r in event_reports:
        # the report must say whether E2 had any content
        assert r["e2_vacuous"] == (r["m2"] < 2**24)
        if r["e2_vacuous"]:
            vacuous += 1
            assert "vacuously" in r["e2_note"]
            assert r["freq_e2"] == 1.0 and r["freq_joint"] == r["freq_e1"]
        assert r["freq_joint"] >= floor
    detail(
        f"min joint {min(r['freq_joint'] for _, _, r in event_reports):.4f} vs floor {floor:.4f}; "
        f"E2 vacuous on {vacuous} of {len(event_reports)} instances"
    )


@pytest.mark.criterion(5, "freq(E1 and E2) >= 1/32 - 3 sigma, vacuity of E2 stated")
def test_criterion_5_joint_floor_nonvacuous_instance(detail):
    # a level-24 instance where E2 has real content; fewer partitions, same 3 sigma rule
    trials = 2000
    p = synthetic_level_profile(24)
    r = estimate_event_frequencies(p, trials, seed=5)
    assert not r["e2_vacuous"]
    assert r["freq_joint"] >= float(CONSTANTS.joint_prob) - sigma3(1 / 32, trials)
    detail(f"level-24 instance: joint {r['freq_joint']:.4f} over {trials} partitions")


@pytest.mark.criterion(6, "hybrid mean revenue >= m2/2304 - 3 sigma on every family")
def test_criterion_6_competitive_floor(detail):
    mech = MechanismDescriptor.parse("hybrid")
    worst = {}
    for i, (family, p) in enumerate(desk_instances(3, seed=6)):
        row = evaluate_instance(p, mech, 100_000, seed=600 + i)
        assert row["floor_pass"], (family, row["mean_revenue"], row["floor"])
        if row["ratio"] is not None:
            worst[family] = min(worst.get(family, math.inf), row["ratio"])
    detail("min realized ratio " + ", ".join(f"{f} {r:.3f}" for f, r in worst.items()) + f" (floor {1 / 2304:.5f})")


@pytest.mark.criterion(7, "triple count never exceeds 2^(2l+2), incl. synthetic l in {0, 1, 24}")
def test_criterion_7_triple_count(detail):
    checked = 0
    for level in (0, 1, 24):
        p = synthetic_level_profile(level)
        m2 = m2_exact(p).value
        for lv in range(m2.bit_length()):
            first = next(enumerate_triples(p, m2, lv), None)
            checked += first is not None
    rng = np.random.default_rng(7)
    for _ in range(500):
        n = int(rng.integers(2, 40))
        p = BidProfile(tuple(int(b) for b in rng.integers(0, 2**int(rng.integers(1, 30)), n)))
        m2 = m2_exact(p).value
        for lv in range(m2.bit_length()):
            checked += sum(1 for _ in enumerate_triples(p, m2, lv)) > 0
    detail(f"{checked} nonempty levels checked")


@pytest.mark.criterion(8, "bad-level bound holds on every realized P_A over 1e4 hybrid runs")
def test_criterion_8_bad_level_bound(detail):
    instances = [p for _, p in desk_instances(1, seed=8)] + [
        BidProfile((1, 1, 1, 2**40, 2**40, 3, 2**41)),
        generate_instance(InstanceGenerator("adversarial-spike", {"n": 12, "spike": 2**45, "spikes": 3}, seed=8)),
        generate_instance(InstanceGenerator("equal-revenue", {"n": 40})),
        generate_instance(InstanceGenerator("equal-revenue", {"n": 40, "ascending": True})),
        generate_instance(InstanceGenerator("iid-geometric", {"n": 20, "scale": 2**30}, seed=8)),
    ]
    runs = failures = nonvacuous = 0
    per = 10_000 // len(instances)
    for k, p in enumerate(instances):
        m2 = m2_exact(p).value
        for s in range(per):
            pa = hybrid_trace(p, k * per + s).pa.vector
            runs += 1
            failures += not bad_level_bound_check(pa, p, m2)
            nonvacuous += bad_level_revenue(pa, p, m2) > 0
    detail(f"{failures} failures in {runs} runs, {nonvacuous} with revenue on bad levels >= 24")
    assert runs == 10_000
    assert failures == 0


@pytest.mark.criterion(9, "out-of-band frequency <= chernoff_tail(m/2, 1/3) + 3 sigma")
@pytest.mark.parametrize("m", [144, 1024, 6912])
def test_criterion_9_chernoff(m, detail):
    draws = 1_000_000
    bound = chernoff_tail(m / 2, 1 / 3)
    freq = out_of_band_frequency(m, draws, seed=m)
    slack = sigma3(min(bound, 1.0), draws)
    detail(f"m={m}: {freq:.3g} <= {bound:.3g}")
    assert freq <= bound + slack


@pytest.mark.criterion(10, "two simulate runs give byte-identical reports")
def test_criterion_10_determinism(tmp_path, detail):
    from hybrid_auction.cli import main

    cfg = ExperimentConfig(
        InstanceGenerator("iid-uniform", {"n": 12}, seed=10),
        MechanismDescriptor.parse("hybrid"),
        trials=20_000,
        seed=10,
        instances=3,
    )
    path = tmp_path / "cfg.json"
    path.write_text(report_json(cfg.to_dict()))
    outs = [tmp_path / "a.json", tmp_path / "b.json"]
    for out in outs:
        assert main(["simulate", "--config", str(path), "--output", str(out)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes()
    assert report_json(run_experiment(cfg)) == outs[0].read_text()
    detail(f"{outs[0].stat().st_size} bytes, identical")
