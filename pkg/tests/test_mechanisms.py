"""Single-profile mechanism outcomes against hand-enumerated oracles."""

import math

import numpy as np
import pytest

from platform_auctions import (
    ConstructionError,
    DomainError,
    MechanismSpec,
    RESIDUAL_SURPLUS,
    SURPLUS,
    ValuationProfile,
    exponential,
    expected_posting_revenue,
    iron,
    monopoly_price_cdf,
    objective_value,
    optimal_lottery_price,
    piecewise_exponential,
    rsol_exact,
    run_ironed_maximizer,
    run_lottery,
    run_mechanism,
    run_mixture,
    run_one_level_lottery,
    run_ratio_auction,
    run_rsol_partition,
    run_two_level_lottery,
    run_vickrey,
    sample_monopoly_prices,
    worst_case_platform,
)


def resid(outcome, profile):
    return objective_value(outcome, profile, RESIDUAL_SURPLUS)


def test_profile_validation():
    p = ValuationProfile([3.0, 1.0, 2.0])
    assert p.n == 3
    assert list(p.sorted_desc()) == [3.0, 2.0, 1.0]
    with pytest.raises(ConstructionError):
        ValuationProfile([])
    with pytest.raises(ConstructionError):
        ValuationProfile([1.0, -0.5])
    with pytest.raises(ConstructionError):
        ValuationProfile([1.0, math.inf])


def test_lottery_share():
    p = ValuationProfile([4.0, 2.0, 1.0])
    out = run_lottery(p, 2)
    assert np.allclose(out.alloc, 2.0 / 3.0)
    assert np.allclose(out.payment, 0.0)
    out = run_lottery(p, 5)
    assert np.allclose(out.alloc, 1.0)


def test_two_level_oracles():
    # supply-constrained top tier: both pay p * k/s
    p = ValuationProfile([4.0, 2.0])
    assert resid(run_two_level_lottery(p, 1, 2.0, 0.0), p) == pytest.approx(3.0)
    # mixed tiers with s < k < s+t
    p = ValuationProfile([5.0, 3.0, 1.0])
    out = run_two_level_lottery(p, 2, 3.0, 1.0)
    assert resid(out, p) == pytest.approx(6.0)
    # boundary s = k, t > 0: top pays the blended price, tier T gets nothing
    p = ValuationProfile([5.0, 3.0])
    out = run_two_level_lottery(p, 2, 3.0, 1.0)
    assert resid(out, p) == pytest.approx(6.0)
    assert out.alloc[1] == pytest.approx(1.0)
    # everyone above q and supply short: uniform lottery at price q
    p = ValuationProfile([1.0, 1.0])
    assert resid(run_two_level_lottery(p, 1, 0.0, 0.0), p) == pytest.approx(1.0)


def test_two_level_blended_payment():
    # (5,4,3,2,1), k=2, p=3, q=1: S={5,4} pays 3 - 2*(1)/3 = 7/3
    p = ValuationProfile([5.0, 4.0, 3.0, 2.0, 1.0])
    out = run_two_level_lottery(p, 2, 3.0, 1.0)
    assert out.alloc[:2] == pytest.approx([1.0, 1.0])
    assert out.payment[:2] == pytest.approx([7.0 / 3.0] * 2)
    assert out.alloc[2:] == pytest.approx([0.0, 0.0, 0.0])


def test_two_level_rejects_bad_prices():
    p = ValuationProfile([1.0])
    with pytest.raises(DomainError):
        run_two_level_lottery(p, 1, 1.0, 2.0)     # q > p
    with pytest.raises(DomainError):
        run_two_level_lottery(p, 1, math.nan, 0.0)
    with pytest.raises(DomainError):
        run_two_level_lottery(p, 1, 1.0, -0.5)
    with pytest.raises(DomainError):
        run_two_level_lottery(p, 0, 1.0, 0.0)


def test_one_level_equals_two_level_same_price():
    p = ValuationProfile([4.0, 2.0, 1.0])
    a = run_one_level_lottery(p, 1, 2.0)
    b = run_two_level_lottery(p, 1, 2.0, 2.0)
    assert np.allclose(a.alloc, b.alloc)
    assert np.allclose(a.payment, b.payment)


def test_vickrey_ties_split():
    p = ValuationProfile([3.0, 1.0])
    out = run_vickrey(p, 1)
    assert out.alloc == pytest.approx([1.0, 0.0])
    assert out.payment == pytest.approx([1.0, 0.0])
    # three-way tie at the k-th price
    p = ValuationProfile([2.0, 2.0, 2.0])
    out = run_vickrey(p, 2)
    assert out.alloc == pytest.approx([2.0 / 3.0] * 3)
    assert out.payment == pytest.approx([2.0 * 2.0 / 3.0] * 3)
    # supply beyond demand is free
    p = ValuationProfile([5.0, 1.0])
    out = run_vickrey(p, 2)
    assert out.alloc == pytest.approx([1.0, 1.0])
    assert out.payment == pytest.approx([0.0, 0.0])


def test_ratio_auction_oracles():
    # closed form at (r=2, b=3/4): 0.75 * max(mean, hi - lo/2)
    cases = [((3.0, 1.0), 1.875), ((1.0, 1.0), 0.75), ((1.0, 0.0), 0.75)]
    for (v1, v2), want in cases:
        p = ValuationProfile([v1, v2])
        out = run_ratio_auction(p, 2.0, 0.75)
        assert resid(out, p) == pytest.approx(want, abs=1e-12)
    with pytest.raises(DomainError):
        run_ratio_auction(ValuationProfile([1.0, 2.0, 3.0]), 2.0, 0.75)
    with pytest.raises(DomainError):
        run_ratio_auction(ValuationProfile([1.0, 2.0]), 1.0, 0.75)
    with pytest.raises(DomainError):
        run_ratio_auction(ValuationProfile([1.0, 2.0]), 2.0, 0.4)


def test_ratio_auction_feasible_outcome():
    rng = np.random.default_rng(3)
    for _ in range(50):
        p = ValuationProfile(rng.uniform(0.0, 4.0, 2).tolist())
        out = run_ratio_auction(p, 2.0, 0.75)
        out.validate(p, 1)


def test_optimal_lottery_price():
    assert optimal_lottery_price([10.0, 1.0], 1) == (1.0, 9.0)
    assert optimal_lottery_price([4.0, 2.0], 1) == (0.0, 3.0)
    assert optimal_lottery_price([1.0, 1.0], 1) == (0.0, 1.0)
    # smallest optimal price wins ties
    p, v = optimal_lottery_price([2.0, 2.0], 2)
    assert (p, v) == (0.0, 4.0)


def test_rsol_exact_oracles():
    p = ValuationProfile([1.0, 1.0])
    assert resid(rsol_exact(p, 1), p) == pytest.approx(0.75)
    p = ValuationProfile([1.0, 1.0, 0.0, 0.0])
    assert resid(rsol_exact(p, 1), p) == pytest.approx(0.75)
    with pytest.raises(DomainError):
        rsol_exact(ValuationProfile([1.0] * 21), 1)


def test_rsol_partition_single_split():
    p = ValuationProfile([4.0, 2.0, 1.0])
    out = run_rsol_partition(p, 1, [True, False, False])
    # sample {4}: optimal price 0 (price 4 serves nobody), market lottery at 0
    assert out.alloc == pytest.approx([0.0, 0.5, 0.5])
    assert out.payment == pytest.approx([0.0, 0.0, 0.0])


def test_mixture_oracle():
    p = ValuationProfile([1.0, 1.0, 0.0, 0.0])
    out = run_mixture(p, worst_case_platform(1).params["components"])
    assert resid(out, p) == pytest.approx(107.0 / 108.0 * 0.75)
    with pytest.raises(DomainError):
        run_mixture(p, [(0.5, MechanismSpec("lottery", {"k": 1}))])


def test_run_mechanism_dispatch():
    p = ValuationProfile([2.0, 1.0])
    for spec, want in [
        (MechanismSpec("lottery", {"k": 1}), 1.5),
        (MechanismSpec("one_level_lottery", {"k": 1, "p": 1.0}), 1.0),
        # at q = 0 the runner-up threat blends the winner's price down to 1/2
        (MechanismSpec("two_level_lottery", {"k": 1, "p": 1.0, "q": 0.0}), 1.5),
        (MechanismSpec("vickrey", {"k": 1}), 1.0),
        (MechanismSpec("ratio_auction", {"r": 2.0, "b": 0.75}), 1.125),
    ]:
        assert resid(run_mechanism(spec, p), p) == pytest.approx(want)
    with pytest.raises(DomainError):
        run_mechanism(MechanismSpec("nope", {}), p)


def test_mechanism_spec_json_round_trip():
    spec = worst_case_platform(2)
    clone = MechanismSpec.from_json(spec.to_json())
    assert clone.type == "mixture"
    weights = [w for w, _ in clone.params["components"]]
    assert weights == pytest.approx([107.0 / 108.0, 1.0 / 108.0])
    nested = MechanismSpec("ironed_maximizer", {
        "k": 1, "distribution": exponential(1.0),
        "objective": RESIDUAL_SURPLUS})
    clone = MechanismSpec.from_json(nested.to_json())
    assert clone.params["objective"] == RESIDUAL_SURPLUS
    assert clone.params["distribution"].cdf(1.0) == pytest.approx(
        1.0 - math.exp(-1.0))


def test_ironed_maximizer_lottery_regime():
    # anti-MHR piece structure with non-increasing virtual value irons flat,
    # so everyone is served while supply lasts and nobody pays
    d = exponential(1.0)
    p = ValuationProfile([2.0, 1.0, 0.5])
    out = run_ironed_maximizer(d, RESIDUAL_SURPLUS, p, 3)
    assert out.alloc == pytest.approx([1.0, 1.0, 1.0])
    assert out.payment == pytest.approx([0.0, 0.0, 0.0])
    # k = 1: lottery among all three at price 0
    out = run_ironed_maximizer(d, RESIDUAL_SURPLUS, p, 1)
    assert out.alloc == pytest.approx([1.0 / 3.0] * 3)
    assert out.payment == pytest.approx([0.0, 0.0, 0.0])


def test_ironed_maximizer_two_level_regime():
    # bumped middle piece: ironed slopes (1, 2 - e^{-1/2}); with k = 1 and
    # values straddling the bump the winner set is price-restricted
    d = piecewise_exponential([(0.0, 1.0), (1.0, 0.5), (2.0, 1.0)])
    fn = iron(d, RESIDUAL_SURPLUS)
    p = ValuationProfile([3.0, 1.5, 0.5])
    out = run_ironed_maximizer(d, RESIDUAL_SURPLUS, p, 1, ironed=fn)
    out.validate(p, 1)
    assert resid(out, p) > 0
    lifted = piecewise_exponential([(1.0, 1.0)])
    with pytest.raises(DomainError):
        run_ironed_maximizer(lifted, RESIDUAL_SURPLUS,
                             ValuationProfile([0.5]), 1)  # below the support
    # surplus objective serves greedily regardless of the distribution
    out = run_ironed_maximizer(d, SURPLUS, ValuationProfile([3.0, 1.5]), 1)
    assert out.alloc == pytest.approx([1.0, 0.0])


def test_outcome_validate_catches_violations():
    p = ValuationProfile([1.0, 1.0])
    out = run_lottery(p, 1)
    out.validate(p, 1)
    bad = type(out)(np.array([1.0, 1.0]), np.array([0.0, 0.0]))
    with pytest.raises(DomainError):
        bad.validate(p, 1)    # alloc sums past supply


def test_monopoly_price_distribution():
    c = 1.0 + math.log(10.0)
    assert monopoly_price_cdf(1.0, 10.0) == pytest.approx(1.0 / c)
    assert monopoly_price_cdf(10.0, 10.0) == pytest.approx(1.0)
    rng = np.random.default_rng(5)
    draws = sample_monopoly_prices(10.0, rng, 100_000)
    assert draws.min() >= 1.0 and draws.max() <= 10.0
    # atom at 1 has mass 1/c
    assert np.mean(draws == 1.0) == pytest.approx(1.0 / c, abs=5e-3)
    for z in (2.0, 5.0):
        assert np.mean(draws <= z) == pytest.approx(monopoly_price_cdf(z, 10.0),
                                                    abs=5e-3)


def test_expected_posting_revenue_oracles():
    assert expected_posting_revenue(5.0, 10.0) == pytest.approx(
        5.0 / (1.0 + math.log(10.0)))
    assert expected_posting_revenue(math.e, math.e) == pytest.approx(math.e / 2.0)
    with pytest.raises(DomainError):
        expected_posting_revenue(0.5, 10.0)
    with pytest.raises(DomainError):
        expected_posting_revenue(2.0, 1.0)
