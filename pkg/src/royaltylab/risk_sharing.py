"""Royalties as risk sharing between a mean-variance creator and speculator.

The speculator's participation constraint binds, so the mint price is the
certainty equivalent of his resale share,
``p0 = mu (1 - r) - eta_s sigma^2 (1 - r)^2``, and the creator picks ``r``
to maximise ``p0 + r mu - c - eta_c r^2 sigma^2``.

In differing-views mode each agent prices with his own ``(mu, sigma)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from ._numerics import weakly_geq
from .benchmark_model import (
    MarketParams,
    PricingPolicy,
    SolveResult,
    TradeRegion,
    classify_trade,
    solve_direct_sale,
)
from .errors import DomainError, ParameterError


@dataclass(frozen=True)
class MarketView:
    mu: float
    sigma: float

    def __post_init__(self):
        if not (self.sigma >= 0):
            raise DomainError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class RiskParams:
    """Risk coefficients and, optionally, each agent's view of ``V``.

    Views left as ``None`` fall back to the moments of the market's valuation
    law; a single given view is shared by both agents.
    """

    eta_c: float
    eta_s: float
    view_creator: Optional[MarketView] = None
    view_speculator: Optional[MarketView] = None

    def __post_init__(self):
        if not (self.eta_c >= 0 and self.eta_s >= 0):
            raise DomainError(f"risk coefficients must be >= 0, got {self.eta_c}, {self.eta_s}")

    @classmethod
    def shared(cls, eta_c: float, eta_s: float, mu: float, sigma: float) -> "RiskParams":
        view = MarketView(mu, sigma)
        return cls(eta_c, eta_s, view, view)

    def views(self, m: MarketParams) -> tuple[MarketView, MarketView]:
        vc, vs = self.view_creator, self.view_speculator
        if vc is None and vs is None:
            d = m.require_dist()
            vc = vs = MarketView(d.mean(), d.std())
        elif vc is None:
            vc = vs
        elif vs is None:
            vs = vc
        return vc, vs

    def is_shared(self, m: MarketParams) -> bool:
        vc, vs = self.views(m)
        return vc == vs


@dataclass(frozen=True)
class UtilityBreakdown:
    creator_utility: float
    speculator_utility: float
    creator_mean: float
    creator_variance: float
    speculator_mean: float
    speculator_variance: float


def evaluate_utilities(policy: PricingPolicy, m: MarketParams, rk: RiskParams) -> UtilityBreakdown:
    """Both agents' mean-variance utilities, assuming the speculator buys and resells at ``v``."""
    vc, vs = rk.views(m)
    p0, r = policy.p0, policy.r
    c_mean = p0 + r * vc.mu - m.cost
    c_var = r**2 * vc.sigma**2
    s_mean = (1.0 - r) * vs.mu - p0
    s_var = (1.0 - r) ** 2 * vs.sigma**2
    return UtilityBreakdown(
        creator_utility=c_mean - rk.eta_c * c_var,
        speculator_utility=s_mean - rk.eta_s * s_var,
        creator_mean=c_mean,
        creator_variance=c_var,
        speculator_mean=s_mean,
        speculator_variance=s_var,
    )


def speculator_reservation_price(view: MarketView, eta_s: float, r: float) -> float:
    """Largest mint price at which the speculator still participates."""
    return view.mu * (1.0 - r) - eta_s * view.sigma**2 * (1.0 - r) ** 2


def _policy_or_clamped(p0: float, r: float, diag: dict) -> PricingPolicy:
    # A negative optimal price only arises when u_c* + c < 0, i.e. no trade.
    diag["p0Unconstrained"] = p0
    diag["p0Clamped"] = p0 < 0
    return PricingPolicy(max(p0, 0.0), r)


def _outside_option(m: MarketParams, diag: dict, objective: float) -> None:
    if m.dist is not None:
        direct = solve_direct_sale(m)
        diag["directSaleObjective"] = direct.objective
        diag["prefersSpeculator"] = objective >= direct.objective


def solve_risk_sharing(m: MarketParams, rk: RiskParams) -> SolveResult:
    """Closed-form optimum when both agents share one view ``(mu, sigma)``."""
    vc, vs = rk.views(m)
    if vc != vs:
        raise ParameterError("agents hold different views; use solve_risk_sharing_differing_views")
    ec, es = rk.eta_c, rk.eta_s
    if ec + es <= 0:
        raise ParameterError("eta_c + eta_s must be > 0; risk-neutral agents are covered by the benchmark model")
    mu, s2, c = vc.mu, vc.sigma**2, m.cost

    r_star = es / (es + ec)
    p0_star = ec / (ec + es) ** 2 * ((ec + es) * mu - ec * es * s2)
    u_star = mu - c - (ec * es / (ec + es)) * s2
    baseline = mu - c - es * s2

    diag = {
        "rStar": r_star,
        "p0NoRoyalty": mu - es * s2,
        "gainClosedForm": s2 * es**2 / (es + ec),
        "tradeWithRoyalties": u_star >= 0,
        "tradeWithoutRoyalties": baseline >= 0,
    }
    policy = _policy_or_clamped(p0_star, r_star, diag)
    diag["speculatorUtility"] = (1.0 - r_star) * mu - p0_star - es * (1.0 - r_star) ** 2 * s2
    _outside_option(m, diag, u_star)
    return SolveResult(policy, u_star, baseline, classify_trade(u_star, baseline).value, diag)


def differing_views_gain(mu_c: float, sigma_c: float, mu_s: float, sigma_s: float,
                         eta_c: float, eta_s: float) -> float:
    """Utility gain from royalties, unconstrained ``r``, differing views."""
    den = eta_s * sigma_s**2 + eta_c * sigma_c**2
    if den <= 0:
        raise ParameterError("eta_s sigma_s^2 + eta_c sigma_c^2 must be > 0")
    return (2.0 * eta_s * sigma_s**2 - mu_s + mu_c) ** 2 / (4.0 * den)


def differing_views_creator_utility(vc: MarketView, vs: MarketView, eta_c: float, eta_s: float,
                                    cost: float, r: float) -> float:
    p0 = speculator_reservation_price(vs, eta_s, r)
    return p0 + r * vc.mu - cost - eta_c * r**2 * vc.sigma**2


def solve_risk_sharing_differing_views(m: MarketParams, rk: RiskParams) -> SolveResult:
    """Optimum when creator and speculator disagree about ``(mu, sigma)``.

    The unconstrained ``r*`` can leave ``[0, 1]`` for wide view gaps; it is
    clamped (the objective is a concave quadratic in ``r``, so the clamp is the
    constrained optimum) and the clamp is flagged.
    """
    vc, vs = rk.views(m)
    ec, es = rk.eta_c, rk.eta_s
    den = es * vs.sigma**2 + ec * vc.sigma**2
    if den <= 0:
        raise ParameterError("eta_s sigma_s^2 + eta_c sigma_c^2 must be > 0")

    r_raw = 0.5 * ((vc.mu - vs.mu) + 2.0 * es * vs.sigma**2) / den
    r_star = min(max(r_raw, 0.0), 1.0)
    p0_star = speculator_reservation_price(vs, es, r_star)
    u_star = differing_views_creator_utility(vc, vs, ec, es, m.cost, r_star)
    baseline = vs.mu - es * vs.sigma**2 - m.cost

    diag = {
        "rStar": r_star,
        "rUnconstrained": r_raw,
        "rClamped": r_raw != r_star,
        "p0NoRoyalty": vs.mu - es * vs.sigma**2,
        "gainClosedForm": differing_views_gain(vc.mu, vc.sigma, vs.mu, vs.sigma, ec, es),
        "tradeWithRoyalties": u_star >= 0,
        "tradeWithoutRoyalties": baseline >= 0,
    }
    policy = _policy_or_clamped(p0_star, r_star, diag)
    diag["speculatorUtility"] = (1.0 - r_star) * vs.mu - p0_star - es * (1.0 - r_star) ** 2 * vs.sigma**2
    _outside_option(m, diag, u_star)
    return SolveResult(policy, u_star, baseline, classify_trade(u_star, baseline).value, diag)


def trade_region_membership(m: MarketParams, rk: RiskParams) -> TradeRegion:
    """Does trade occur with royalties, without, both, or neither?"""
    if rk.is_shared(m):
        res = solve_risk_sharing(m, rk)
    else:
        res = solve_risk_sharing_differing_views(m, rk)
    return classify_trade(res.objective, res.baseline_no_royalty)


# -- comparative statics -------------------------------------------------------

@dataclass(frozen=True)
class StaticsEntry:
    quantity: str
    parameter: str
    step: float
    base: float
    bumped: float
    expected_sign: int

    @property
    def difference(self) -> float:
        return self.bumped - self.base

    @property
    def holds(self) -> bool:
        return self.difference * self.expected_sign > 0


@dataclass(frozen=True)
class StaticsReport:
    entries: tuple[StaticsEntry, ...]

    @property
    def all_hold(self) -> bool:
        return all(e.holds for e in self.entries)

    def entry(self, quantity: str, parameter: str) -> StaticsEntry:
        for e in self.entries:
            if e.quantity == quantity and e.parameter == parameter:
                return e
        raise KeyError((quantity, parameter))


def _sigma_s_sign(mu_c, sigma_c, mu_s, sigma_s, eta_c, eta_s) -> int:
    gap = mu_s - mu_c
    lo = -2.0 * eta_s * sigma_s**2 - 4.0 * eta_c * sigma_c**2
    hi = 2.0 * eta_s * sigma_s**2
    return 1 if lo <= gap <= hi else -1


def comparative_statics_check(m: MarketParams, rk: RiskParams, bumps: Optional[dict] = None,
                              differing_views: bool = False) -> StaticsReport:
    """Forward finite differences of the royalty gain against the predicted signs.

    Shared view: gain rises with ``sigma`` and ``eta_s``, falls with ``eta_c``.
    Differing views: gain falls with ``sigma_c``; it rises with ``sigma_s``
    exactly when ``-2 eta_s sigma_s^2 - 4 eta_c sigma_c^2 <= mu_s - mu_c <=
    2 eta_s sigma_s^2``; the creator's optimal utility falls with ``sigma_c``.
    """
    if rk.eta_c <= 0 or rk.eta_s <= 0:
        raise ParameterError("comparative statics need eta_c > 0 and eta_s > 0")
    steps = {"sigma": 1e-2, "eta_s": 1e-2, "eta_c": 1e-2, "sigma_c": 1e-2, "sigma_s": 1e-2}
    steps.update(bumps or {})
    vc, vs = rk.views(m)
    entries = []

    if not differing_views:
        if vc != vs:
            raise ParameterError("shared-view statics need equal views")

        def gain(sigma, eta_s, eta_c):
            return sigma**2 * eta_s**2 / (eta_s + eta_c)

        base = (vc.sigma, rk.eta_s, rk.eta_c)
        g0 = gain(*base)
        for i, (name, sign) in enumerate((("sigma", 1), ("eta_s", 1), ("eta_c", -1))):
            args = list(base)
            args[i] += steps[name]
            entries.append(StaticsEntry("gain", name, steps[name], g0, gain(*args), sign))
        return StaticsReport(tuple(entries))

    ec, es = rk.eta_c, rk.eta_s

    def gain_v(sc, ss):
        return differing_views_gain(vc.mu, sc, vs.mu, ss, ec, es)

    def utility_v(sc):
        # unconstrained optimum, where the closed-form gain identity holds
        den = es * vs.sigma**2 + ec * sc**2
        r = 0.5 * ((vc.mu - vs.mu) + 2.0 * es * vs.sigma**2) / den
        return differing_views_creator_utility(MarketView(vc.mu, sc), vs, ec, es, m.cost, r)

    g0 = gain_v(vc.sigma, vs.sigma)
    entries.append(StaticsEntry("gain", "sigma_c", steps["sigma_c"], g0,
                                gain_v(vc.sigma + steps["sigma_c"], vs.sigma), -1))
    entries.append(StaticsEntry("gain", "sigma_s", steps["sigma_s"], g0,
                                gain_v(vc.sigma, vs.sigma + steps["sigma_s"]),
                                _sigma_s_sign(vc.mu, vc.sigma, vs.mu, vs.sigma, ec, es)))
    entries.append(StaticsEntry("creatorUtility", "sigma_c", steps["sigma_c"], utility_v(vc.sigma),
                                utility_v(vc.sigma + steps["sigma_c"]), -1))
    return StaticsReport(tuple(entries))


def speculator_participates(view: MarketView, eta_s: float, policy: PricingPolicy) -> bool:
    """``u_s >= 0`` up to rounding (indifference buys)."""
    return bool(weakly_geq(speculator_reservation_price(view, eta_s, policy.r), policy.p0))
