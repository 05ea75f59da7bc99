"""Two-level benchmark search and the posted-price profit benchmarks."""

import math

import numpy as np
import pytest

from platform_auctions import (
    DomainError,
    PROFIT,
    RESIDUAL_SURPLUS,
    ValuationProfile,
    benchmark,
    benchmark_n2_closed_form,
    best_one_level_lottery,
    objective_value,
    optimal_lottery_price,
    profit_benchmarks,
    run_two_level_lottery,
    truncate_profile,
)
from platform_auctions.benchmarks import BenchmarkResult


def test_benchmark_oracles():
    res = benchmark(ValuationProfile([1.0, 1.0, 0.0, 0.0]), 1, RESIDUAL_SURPLUS)
    assert res.value == pytest.approx(1.0)
    assert (res.argmax_p, res.argmax_q) == (0.0, 0.0)
    res = benchmark(ValuationProfile([10.0, 1.0]), 1, RESIDUAL_SURPLUS)
    assert res.value == pytest.approx(9.5)
    assert (res.argmax_p, res.argmax_q) == (1.0, 0.0)
    res = benchmark(ValuationProfile([2.0, 1.0]), 1, RESIDUAL_SURPLUS)
    assert res.value == pytest.approx(1.5)


def test_benchmark_value_is_attained():
    rng = np.random.default_rng(13)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, n + 1))
        profile = ValuationProfile(
            np.exp(rng.uniform(-3.0, 3.0, n)).tolist())
        res = benchmark(profile, k, RESIDUAL_SURPLUS)
        out = run_two_level_lottery(profile, k, res.argmax_p, res.argmax_q)
        assert objective_value(out, profile, RESIDUAL_SURPLUS) == pytest.approx(
            res.value, abs=1e-12)


def test_benchmark_tie_break_smallest_pair():
    # everyone served free at (0, 0); later ties must not displace it
    res = benchmark(ValuationProfile([1.0, 1.0]), 2, RESIDUAL_SURPLUS)
    assert res.value == pytest.approx(2.0)
    assert (res.argmax_p, res.argmax_q) == (0.0, 0.0)


def test_benchmark_profit_objective():
    # thresholds are strict at p, so price 2 sells to nobody; the best the
    # family can do on (2, 1) is serve the top agent at the runner-up value
    res = benchmark(ValuationProfile([2.0, 1.0]), 1, PROFIT)
    assert res.value == pytest.approx(1.0)
    assert (res.argmax_p, res.argmax_q) == (1.0, 1.0)


def test_benchmark_json_spells_infinity():
    res = benchmark(ValuationProfile([1.0]), 1, RESIDUAL_SURPLUS)
    data = res.to_json()
    assert data["value"] == pytest.approx(1.0)
    assert data["argmax_p"] == 0.0
    built = BenchmarkResult(0.0, math.inf, 1.0, RESIDUAL_SURPLUS)
    assert built.to_json()["argmax_p"] == "inf"


def test_closed_form_matches_search():
    assert benchmark_n2_closed_form(3.0, 1.0) == pytest.approx(2.5)
    with pytest.raises(DomainError):
        benchmark_n2_closed_form(-1.0, 2.0)
    rng = np.random.default_rng(17)
    for _ in range(300):
        v1, v2 = rng.uniform(0.0, 4.0, 2)
        want = benchmark_n2_closed_form(v1, v2)
        got = benchmark(ValuationProfile([v1, v2]), 1, RESIDUAL_SURPLUS).value
        assert got == pytest.approx(want, abs=1e-12)


def test_best_one_level_lottery():
    p, val = best_one_level_lottery(ValuationProfile([10.0, 1.0]), 1, RESIDUAL_SURPLUS)
    assert (p, val) == (1.0, 9.0)
    assert best_one_level_lottery(
        ValuationProfile([4.0, 2.0]), 1, RESIDUAL_SURPLUS)[1] == 3.0
    # never better than the two-level search, never worse than half of it
    rng = np.random.default_rng(19)
    for _ in range(200):
        n = int(rng.integers(1, 8))
        k = int(rng.integers(1, n + 1))
        profile = ValuationProfile(np.exp(rng.uniform(-2.0, 4.0, n)).tolist())
        bench = benchmark(profile, k, RESIDUAL_SURPLUS).value
        one = best_one_level_lottery(profile, k, RESIDUAL_SURPLUS)[1]
        assert one <= bench + 1e-9
        assert bench <= 2.0 * one + 1e-9


def test_profit_benchmarks_oracles():
    marks = profit_benchmarks(ValuationProfile([3.0, 2.0, 2.0]), 2)
    assert marks["bm"] == 6.0    # all three at price 2
    assert marks["bm2"] == 6.0
    assert marks["ofs"] == 4.0   # supply 2 caps it at two winners
    marks = profit_benchmarks(ValuationProfile([10.0, 1.0]), 2)
    assert marks["bm"] == 10.0
    assert marks["bm2"] == 2.0
    marks = profit_benchmarks(ValuationProfile([5.0, 4.0, 3.0, 2.0]), 2)
    assert marks["bm"] == 9.0
    assert marks["bm2"] == 9.0
    assert marks["ofs"] == 8.0   # two winners at the second price


def test_profit_benchmark_errors():
    with pytest.raises(DomainError):
        profit_benchmarks(ValuationProfile([1.0]), 2)    # bm2 needs 2 agents
    with pytest.raises(DomainError):
        profit_benchmarks(ValuationProfile([1.0, 1.0]), 1)  # ofs needs k >= 2


def test_truncate_profile():
    tr = truncate_profile(ValuationProfile([4.0, 2.0, 1.0]))
    assert list(tr.values) == [2.0, 2.0, 1.0]
    tr = truncate_profile(ValuationProfile([1.0, 5.0]))
    assert list(tr.values) == [1.0, 1.0]
    with pytest.raises(DomainError):
        truncate_profile(ValuationProfile([1.0]))


def test_bm2_equals_bm_of_truncation():
    rng = np.random.default_rng(23)
    for _ in range(300):
        n = int(rng.integers(2, 9))
        profile = ValuationProfile(np.exp(rng.uniform(-2.0, 4.0, n)).tolist())
        marks = profit_benchmarks(profile, 2)
        tr_marks = profit_benchmarks(truncate_profile(profile), 2)
        assert marks["bm2"] == pytest.approx(tr_marks["bm"], abs=1e-12)


def test_optimal_lottery_price_agrees_with_exhaustive():
    rng = np.random.default_rng(29)
    for _ in range(200):
        n = int(rng.integers(1, 7))
        k = int(rng.integers(1, n + 1))
        values = np.exp(rng.uniform(-2.0, 2.0, n)).tolist()
        p_star, v_star = optimal_lottery_price(values, k)
        best = 0.0
        for p in sorted({0.0, *values}):
            served = [v for v in values if v > p]
            if served:
                alloc = min(1.0, k / len(served))
                best = max(best, sum(v - p for v in served) * alloc)
        assert v_star == pytest.approx(best, abs=1e-12)
