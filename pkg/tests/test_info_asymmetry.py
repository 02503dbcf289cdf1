from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from royaltylab.benchmark_model import MarketParams, PricingPolicy, TradeRegion
from royaltylab.errors import DomainError
from royaltylab.info_asymmetry import (
    creator_objective,
    creator_objective_unsimplified,
    exponential_asym_utilities,
    foc_residuals,
    purchase_threshold,
    solve_asym,
    trade_region_asym,
)
from royaltylab.valuation import Exponential, NormalNonNeg, TwoPoint, Uniform

CONTINUOUS = [Exponential(1.0), Exponential(2.5), Uniform(0.0, 2.0), Uniform(0.5, 1.0), NormalNonNeg(1.0, 1.0)]


def test_threshold_edges():
    assert float(purchase_threshold(0.0, 1.0)) == 0.0
    assert math.isinf(float(purchase_threshold(1.0, 1.0)))
    assert float(purchase_threshold(1.0, 0.5)) == pytest.approx(2.0)


def test_free_mint_earns_the_mean():
    m = MarketParams(Exponential(2.0), cost=0.1)
    assert creator_objective(PricingPolicy(0.0, 1.0), m).value == pytest.approx(0.4)


def test_full_royalty_with_positive_price_earns_posted_revenue():
    m = MarketParams(Exponential(1.0))
    s = creator_objective(PricingPolicy(1.0, 1.0), m)
    assert s.term_royalty == 0.0
    assert s.value == pytest.approx(math.exp(-1))


@settings(max_examples=80, deadline=None)
@given(p0=st.floats(0.0, 3.0), r=st.floats(0.0, 0.99), kind=st.sampled_from(CONTINUOUS + [TwoPoint(1.0, 3.0)]))
def test_simplified_objective_matches_event_form(p0, r, kind):
    m = MarketParams(kind, 0.05)
    pol = PricingPolicy(p0, r)
    assert creator_objective(pol, m).value == pytest.approx(creator_objective_unsimplified(pol, m), abs=1e-10)


@pytest.mark.parametrize("d", CONTINUOUS, ids=lambda d: d.kind)
def test_foc_matches_finite_differences(d):
    rng = np.random.default_rng(3)
    m = MarketParams(d)
    h = 1e-6
    lo, hi = (d.a, d.b) if isinstance(d, Uniform) else (0.05, float(d.quantile(0.95)))
    for _ in range(10):
        # interior points where both p0 and p0 / (1 - r) avoid density kinks
        while True:
            p0 = float(rng.uniform(lo, hi))
            r = float(rng.uniform(0.05, 0.9))
            t = p0 / (1 - r)
            if lo + 1e-3 < p0 and t < hi - 1e-3 and p0 > 1e-3:
                break

        def f(p, q):
            return creator_objective(PricingPolicy(p, q), m).value

        g_p = (f(p0 + h, r) - f(p0 - h, r)) / (2 * h)
        g_r = (f(p0, r + h) - f(p0, r - h)) / (2 * h)
        res_p, res_r = foc_residuals(PricingPolicy(p0, r), m)
        assert res_p == pytest.approx(g_p, abs=1e-4)
        assert res_r == pytest.approx(g_r, abs=1e-4)


def test_foc_price_term_carries_royalty_factor():
    # Dropping r from the p0 condition's last term visibly disagrees with the
    # derivative; the implemented residual keeps it.
    d = Exponential(1.0)
    m = MarketParams(d)
    p0, r, h = 0.6, 0.3, 1e-6
    fd = (creator_objective(PricingPolicy(p0 + h, r), m).value
          - creator_objective(PricingPolicy(p0 - h, r), m).value) / (2 * h)
    t = p0 / (1 - r)
    without_r = float(d.survival(p0) - p0 * d.pdf(p0) - p0 * d.pdf(t) / (1 - r) ** 2)
    assert abs(without_r - fd) > 1e-2
    assert foc_residuals(PricingPolicy(p0, r), m)[0] == pytest.approx(fd, abs=1e-6)


def test_foc_domain():
    with pytest.raises(DomainError):
        foc_residuals(PricingPolicy(1.0, 0.5), MarketParams(TwoPoint(1.0, 3.0)))
    with pytest.raises(DomainError):
        foc_residuals(PricingPolicy(0.0, 0.5), MarketParams(Exponential(1.0)))
    with pytest.raises(DomainError):
        foc_residuals(PricingPolicy(1.0, 1.0), MarketParams(Exponential(1.0)))


@pytest.mark.parametrize("d", CONTINUOUS + [TwoPoint(1.0, 3.0), TwoPoint(0.5, 2.0, 0.3)], ids=lambda d: d.kind)
@pytest.mark.parametrize("c", [0.0, 0.2])
def test_free_mint_is_optimal(d, c):
    res = solve_asym(MarketParams(d, c))
    assert (res.policy.p0, res.policy.r) == (0.0, 1.0)
    assert res.objective == pytest.approx(d.mean() - c, abs=1e-12)
    assert res.diagnostics["maxProbeExcess"] <= 1e-9
    assert res.regime == "FreeMint"


@pytest.mark.parametrize("d", CONTINUOUS, ids=lambda d: d.kind)
def test_continuous_optimum_is_unique(d):
    res = solve_asym(MarketParams(d))
    assert res.diagnostics["unique"]
    assert res.diagnostics["runnerUpValue"] < res.objective


def test_two_point_has_a_second_optimum():
    # (p0, r) = (vL, 1 - vL / vH): the speculator buys only on the high draw
    # and the creator still collects vL + r vH / 2 = E[V].
    res = solve_asym(MarketParams(TwoPoint(1.0, 3.0)))
    assert not res.diagnostics["unique"]
    alt = res.diagnostics["alternativeOptima"]
    assert any(p == pytest.approx(1.0) and r == pytest.approx(2 / 3) for p, r in alt)
    assert creator_objective(PricingPolicy(1.0, 2 / 3), MarketParams(TwoPoint(1.0, 3.0))).value == pytest.approx(2.0)


@pytest.mark.parametrize("lam", [0.5, 1.0, 2.0, 5.0])
def test_exponential_gain(lam):
    res = solve_asym(MarketParams(Exponential(lam)))
    assert res.objective == pytest.approx(1 / lam, abs=1e-6)
    assert res.baseline_no_royalty == pytest.approx(1 / (math.e * lam), abs=1e-6)
    assert res.relative_gain == pytest.approx(math.e - 1, abs=1e-6)


def test_exponential_closed_form_utilities():
    uw, un = exponential_asym_utilities(2.0, 0.1)
    assert uw == pytest.approx(0.4)
    assert un == pytest.approx(1 / (2 * math.e) - 0.1)
    with pytest.raises(DomainError):
        exponential_asym_utilities(0.0, 0.1)


def test_asym_region():
    lams = np.array([0.5, 1.0, 2.0])
    costs = np.array([0.1, 0.5, 0.9, 1.5, 2.5])
    g = trade_region_asym(lams, costs)
    # lambda = 1: 1/e < 0.5, 0.9 <= 1 -> royalties only
    assert g.labels[1, 1] is TradeRegion.TRADE_ONLY_WITH_ROYALTIES
    assert g.labels[1, 2] is TradeRegion.TRADE_ONLY_WITH_ROYALTIES
    assert g.labels[1, 0] is TradeRegion.TRADE_BOTH
    assert g.labels[1, 4] is TradeRegion.NO_TRADE
    assert g.count(TradeRegion.TRADE_ONLY_WITHOUT_ROYALTIES) == 0
