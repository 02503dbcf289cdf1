from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from royaltylab.benchmark_model import MarketParams, PricingPolicy, TradeRegion
from royaltylab.errors import DomainError, ParameterError
from royaltylab.risk_sharing import (
    MarketView,
    RiskParams,
    comparative_statics_check,
    differing_views_creator_utility,
    differing_views_gain,
    evaluate_utilities,
    solve_risk_sharing,
    solve_risk_sharing_differing_views,
    speculator_participates,
    speculator_reservation_price,
    trade_region_membership,
)
from royaltylab.valuation import Exponential

NO_DIST = MarketParams(None, 0.0)


def test_worked_example():
    res = solve_risk_sharing(NO_DIST, RiskParams.shared(1.0, 2.0, 1.0, 1.0))
    assert res.objective == pytest.approx(1 / 3, abs=1e-12)
    assert res.policy.r == pytest.approx(2 / 3, abs=1e-12)
    assert res.policy.p0 == pytest.approx(1 / 9, abs=1e-12)
    assert res.baseline_no_royalty == -1.0
    assert res.regime == TradeRegion.TRADE_ONLY_WITH_ROYALTIES.value
    assert res.diagnostics["speculatorUtility"] == pytest.approx(0.0, abs=1e-12)


def test_no_uncertainty_no_gain():
    res = solve_risk_sharing(MarketParams(None, 0.5), RiskParams.shared(1.0, 2.0, 3.0, 0.0))
    assert res.objective == pytest.approx(2.5)
    assert res.delta == pytest.approx(0.0)


@settings(max_examples=80, deadline=None)
@given(mu=st.floats(-2, 5), sigma=st.floats(0, 3), ec=st.floats(0.01, 5), es=st.floats(0.01, 5),
       c=st.floats(0, 2))
def test_closed_form_is_the_constrained_optimum(mu, sigma, ec, es, c):
    m = MarketParams(None, c)
    rk = RiskParams.shared(ec, es, mu, sigma)
    res = solve_risk_sharing(m, rk)
    # The participation constraint binds, so the creator's utility is a
    # quadratic in r; a grid cannot beat the closed form.
    rs = np.linspace(0, 1, 2001)
    p0 = mu * (1 - rs) - es * sigma**2 * (1 - rs) ** 2
    u = p0 + rs * mu - c - ec * rs**2 * sigma**2
    assert res.objective >= u.max() - 1e-9
    assert res.delta == pytest.approx(res.diagnostics["gainClosedForm"], abs=1e-9)
    assert res.delta >= -1e-12


@settings(max_examples=50, deadline=None)
@given(mu=st.floats(0.1, 5), sigma=st.floats(0.01, 3), ec=st.floats(0.01, 5), es=st.floats(0.01, 5))
def test_optimal_policy_makes_speculator_indifferent(mu, sigma, ec, es):
    rk = RiskParams.shared(ec, es, mu, sigma)
    res = solve_risk_sharing(NO_DIST, rk)
    if res.diagnostics["p0Clamped"]:
        return
    ub = evaluate_utilities(res.policy, NO_DIST, rk)
    assert ub.speculator_utility == pytest.approx(0.0, abs=1e-9)
    assert ub.creator_utility == pytest.approx(res.objective, abs=1e-9)
    assert speculator_participates(MarketView(mu, sigma), es, res.policy)


def test_negative_p0_only_without_trade():
    res = solve_risk_sharing(MarketParams(None, 0.0), RiskParams.shared(1.0, 1.0, 0.5, 2.0))
    assert res.diagnostics["p0Clamped"]
    assert res.policy.p0 == 0.0
    assert res.objective < 0


def test_views_from_distribution():
    m = MarketParams(Exponential(1.0))
    res = solve_risk_sharing(m, RiskParams(1.0, 1.0))
    # mu = sigma = 1: u* = 1 - 1/2
    assert res.objective == pytest.approx(0.5)
    assert "directSaleObjective" in res.diagnostics


def test_parameter_errors():
    with pytest.raises(ParameterError):
        solve_risk_sharing(NO_DIST, RiskParams.shared(0.0, 0.0, 1.0, 1.0))
    with pytest.raises(ParameterError):
        solve_risk_sharing(NO_DIST, RiskParams(1.0, 1.0, MarketView(1, 1), MarketView(2, 1)))
    with pytest.raises(DomainError):
        RiskParams(-1.0, 1.0)
    with pytest.raises(DomainError):
        MarketView(1.0, -0.1)
    with pytest.raises(DomainError):
        solve_risk_sharing(NO_DIST, RiskParams(1.0, 1.0))


def test_reservation_price():
    assert speculator_reservation_price(MarketView(1.0, 1.0), 2.0, 0.0) == -1.0
    assert speculator_reservation_price(MarketView(1.0, 1.0), 2.0, 1.0) == 0.0


def test_differing_views_reduce_to_shared():
    shared = solve_risk_sharing(NO_DIST, RiskParams.shared(1.5, 0.7, 2.0, 0.8))
    diff = solve_risk_sharing_differing_views(
        NO_DIST, RiskParams(1.5, 0.7, MarketView(2.0, 0.8), MarketView(2.0, 0.8)))
    assert diff.policy.r == pytest.approx(shared.policy.r, abs=1e-12)
    assert diff.objective == pytest.approx(shared.objective, abs=1e-12)


def test_differing_views_all_ones():
    res = solve_risk_sharing_differing_views(NO_DIST, RiskParams(1.0, 1.0, MarketView(1, 1), MarketView(1, 1)))
    assert res.policy.r == pytest.approx(0.5, abs=1e-12)


def test_differing_views_clamps_r():
    # A very optimistic creator wants r > 1.
    rk = RiskParams(1.0, 1.0, MarketView(10.0, 1.0), MarketView(1.0, 1.0))
    res = solve_risk_sharing_differing_views(NO_DIST, rk)
    assert res.policy.r == 1.0
    assert res.diagnostics["rClamped"]
    assert res.diagnostics["rUnconstrained"] > 1


def test_differing_views_utility_is_concave_in_r():
    vc, vs = MarketView(1.2, 0.9), MarketView(1.0, 1.1)
    res = solve_risk_sharing_differing_views(NO_DIST, RiskParams(0.8, 1.3, vc, vs))
    rs = np.linspace(0, 1, 4001)
    u = [differing_views_creator_utility(vc, vs, 0.8, 1.3, 0.0, r) for r in rs]
    assert res.objective >= max(u) - 1e-12


def test_differing_views_gain_requires_risk():
    with pytest.raises(ParameterError):
        differing_views_gain(1, 0, 1, 0, 1, 1)


def test_trade_region_membership():
    assert trade_region_membership(NO_DIST, RiskParams.shared(1, 2, 1, 1)) is TradeRegion.TRADE_ONLY_WITH_ROYALTIES
    assert trade_region_membership(NO_DIST, RiskParams.shared(1, 2, 3, 0.5)) is TradeRegion.TRADE_BOTH
    assert trade_region_membership(NO_DIST, RiskParams.shared(1, 2, 0.1, 2)) is TradeRegion.NO_TRADE


def test_shared_view_statics():
    rep = comparative_statics_check(NO_DIST, RiskParams.shared(1.0, 2.0, 1.0, 1.0))
    assert rep.all_hold
    assert rep.entry("gain", "eta_c").difference < 0


def test_statics_need_positive_risk_aversion():
    with pytest.raises(ParameterError):
        comparative_statics_check(NO_DIST, RiskParams.shared(0.0, 2.0, 1.0, 1.0))


def test_evaluate_utilities_components():
    rk = RiskParams.shared(1.0, 2.0, 1.0, 1.0)
    ub = evaluate_utilities(PricingPolicy(0.2, 0.5), NO_DIST, rk)
    assert ub.creator_mean == pytest.approx(0.7)
    assert ub.creator_variance == pytest.approx(0.25)
    assert ub.speculator_mean == pytest.approx(0.3)
    assert ub.speculator_utility == pytest.approx(0.3 - 2 * 0.25)
