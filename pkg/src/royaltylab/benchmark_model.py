"""No-royalty benchmark: direct sale, an equally-informed speculator, royalty neutrality.

Also home to the value types every solver shares: market parameters, the
creator's (mint price, royalty) policy, solve results, trade-region labels.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np
from scipy import optimize

from ._numerics import golden_section_max, weakly_geq
from .errors import DomainError
from .valuation import ValuationDistribution, is_non_degenerate

SCAN_POINTS = 1024


@dataclass(frozen=True)
class MarketParams:
    """Valuation law and the creator's cost ``c`` (per unit)."""

    dist: Optional[ValuationDistribution]
    cost: float = 0.0

    def __post_init__(self):
        if not (self.cost >= 0):
            raise DomainError(f"cost must be >= 0, got {self.cost}")

    def require_dist(self) -> ValuationDistribution:
        if self.dist is None:
            raise DomainError("this operation needs a valuation distribution")
        return self.dist

    @property
    def trade_feasible(self) -> bool:
        return self.dist is not None and self.cost <= self.dist.mean()


@dataclass(frozen=True)
class PricingPolicy:
    """Mint price ``p0 >= 0`` and royalty rate ``r`` in ``[0, 1]``."""

    p0: float
    r: float = 0.0

    def __post_init__(self):
        if not (self.p0 >= 0) or math.isinf(self.p0):
            raise DomainError(f"mint price must be finite and >= 0, got {self.p0}")
        if not (0.0 <= self.r <= 1.0):
            raise DomainError(f"royalty rate must lie in [0, 1], got {self.r}")

    def to_dict(self) -> dict:
        return {"p0": float(self.p0), "r": float(self.r)}


class TradeRegion(enum.Enum):
    TRADE_ONLY_WITH_ROYALTIES = "TradeOnlyWithRoyalties"
    TRADE_BOTH = "TradeBoth"
    NO_TRADE = "NoTrade"
    TRADE_ONLY_WITHOUT_ROYALTIES = "TradeOnlyWithoutRoyalties"


def classify_trade(u_with: float, u_without: float) -> TradeRegion:
    """Trade happens when the creator's optimal utility is non-negative."""
    with_ok, without_ok = u_with >= 0, u_without >= 0
    if with_ok and without_ok:
        return TradeRegion.TRADE_BOTH
    if with_ok:
        return TradeRegion.TRADE_ONLY_WITH_ROYALTIES
    if without_ok:
        return TradeRegion.TRADE_ONLY_WITHOUT_ROYALTIES
    return TradeRegion.NO_TRADE


@dataclass(frozen=True)
class RegionGrid:
    """Trade classification over a 2-D parameter grid (row-major: x outer)."""

    x_name: str
    y_name: str
    x: np.ndarray
    y: np.ndarray
    u_with: np.ndarray
    u_without: np.ndarray
    labels: np.ndarray  # object array of TradeRegion

    def count(self, region: TradeRegion) -> int:
        return int(sum(1 for lab in self.labels.ravel() if lab is region))


@dataclass(frozen=True)
class SolveResult:
    policy: PricingPolicy
    objective: float
    baseline_no_royalty: float
    regime: str
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def delta(self) -> float:
        return self.objective - self.baseline_no_royalty

    @property
    def relative_gain(self) -> Optional[float]:
        if self.baseline_no_royalty > 0:
            return self.delta / self.baseline_no_royalty
        return None

    def to_dict(self) -> dict:
        return {
            "policy": self.policy.to_dict(),
            "objective": float(self.objective),
            "baselineNoRoyalty": float(self.baseline_no_royalty),
            "delta": float(self.delta),
            "relativeGain": self.relative_gain,
            "regime": self.regime,
            "diagnostics": {k: _plain(v) for k, v in self.diagnostics.items()},
        }


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    if isinstance(v, enum.Enum):
        return v.value
    if isinstance(v, dict):
        return {k: _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    return v


# -- direct sale ---------------------------------------------------------------

def posted_price_revenue(d: ValuationDistribution, p0):
    """Expected revenue ``p0 * Pr[V >= p0]`` of a take-it-or-leave-it price."""
    return np.asarray(p0) * d.survival(p0)


def direct_sale_foc(d: ValuationDistribution, p0: float) -> float:
    """``1 - F(p0) - p0 f(p0)``: derivative of the posted-price revenue."""
    return float(d.survival(p0) - p0 * d.pdf(p0))


def maximize_posted_price(d: ValuationDistribution) -> tuple[float, float, dict]:
    """Revenue-maximising posted price. Returns ``(p0, revenue, info)``.

    Discrete laws: the optimum sits on an atom. Continuous laws: a scan over
    ``[0, q_0.9999]`` locates sign changes of the first-order condition; a
    single change is solved by Brent's method, several are each refined by
    golden-section search and the best wins.
    """
    if d.is_discrete:
        best = max(((v, v * float(d.survival(v))) for v, _ in d.atoms), key=lambda t: (t[1], -t[0]))
        return best[0], best[1], {"method": "atoms", "focRoots": 0}

    hi = d.search_bound()
    grid = np.linspace(0.0, hi, SCAN_POINTS)
    rev = posted_price_revenue(d, grid)
    foc = d.survival(grid) - grid * d.pdf(grid)
    brackets = np.nonzero((foc[:-1] > 0) & (foc[1:] <= 0))[0]

    candidates = [(0.0, 0.0), (float(hi), float(rev[-1]))]

    def f(p: float) -> float:
        return float(posted_price_revenue(d, p))

    if len(brackets) == 1:
        i = int(brackets[0])
        if foc[i + 1] == 0:
            p = float(grid[i + 1])
        else:
            p = optimize.brentq(lambda x: direct_sale_foc(d, x), grid[i], grid[i + 1],
                                xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
        candidates.append((p, f(p)))
        method = "brent"
    else:
        for i in brackets:
            lo, up = grid[max(i - 1, 0)], grid[min(i + 2, len(grid) - 1)]
            candidates.append(golden_section_max(f, lo, up))
        method = "golden"
    p, value = max(candidates, key=lambda t: (t[1], -t[0]))
    return float(p), float(value), {"method": method, "focRoots": int(len(brackets))}


def solve_direct_sale(m: MarketParams) -> SolveResult:
    """Creator sells straight to the end-buyer at a posted price, no royalty."""
    d = m.require_dist()
    p, revenue, info = maximize_posted_price(d)
    diag = {"revenue": revenue, "method": info["method"], "focRoots": info["focRoots"]}
    if not d.is_discrete:
        diag["focResidual"] = direct_sale_foc(d, p)
    value = revenue - m.cost
    return SolveResult(PricingPolicy(p, 0.0), value, value, "DirectSale", diag)


def markov_gap(m: MarketParams) -> float:
    """``E[V] - max_p p Pr[V >= p]``, costs excluded."""
    d = m.require_dist()
    return d.mean() - maximize_posted_price(d)[1]


def solve_equally_informed_speculator(m: MarketParams) -> SolveResult:
    """Sell to a speculator who knows only the law of ``V``: charge ``E[V]``."""
    d = m.require_dist()
    direct = solve_direct_sale(m)
    mu = d.mean()
    objective = mu - m.cost
    diag = {
        "markovGap": mu - direct.diagnostics["revenue"],
        "directSaleP0": direct.policy.p0,
        "creatorPrefersSpeculator": objective >= direct.objective,
        "nonDegenerate": is_non_degenerate(d) is not None,
    }
    return SolveResult(PricingPolicy(mu, 0.0), objective, direct.objective, "EquallyInformed", diag)


def equally_informed_profit(policy: PricingPolicy, m: MarketParams) -> float:
    """Expected creator profit at any policy when the speculator is equally informed.

    He buys iff ``(1 - r) E[V] >= p0``; otherwise the creator posts ``p0`` to
    the end-buyer at time 2.
    """
    d = m.require_dist()
    mu = d.mean()
    if weakly_geq((1.0 - policy.r) * mu, policy.p0):
        return policy.p0 + policy.r * mu - m.cost
    return float(posted_price_revenue(d, policy.p0)) - m.cost


def royalty_neutral_frontier(m: MarketParams, r: float) -> PricingPolicy:
    """The policy ``(E[V] (1 - r), r)``; every such policy earns ``E[V] - c``."""
    if not (0.0 <= r <= 1.0):
        raise DomainError(f"royalty rate must lie in [0, 1], got {r}")
    return PricingPolicy(m.require_dist().mean() * (1.0 - r), r)
