"""Monte Carlo oracle: play the mint/resale game forward trial by trial.

Agent behaviour is coded here from the game rules, not from the solvers'
formulas, so agreement between the two is evidence that both are right.

Trials run in chunks of ``CHUNK`` draws; chunk ``k`` uses Philox substream
``k`` of the run seed and results are concatenated in chunk order, so a report
is identical whether chunks run sequentially or on a thread pool.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._numerics import weakly_geq
from .benchmark_model import MarketParams, PricingPolicy
from .errors import DomainError, ParameterError
from .risk_sharing import RiskParams
from .rng import make_rng
from .valuation import ValuationDistribution, quad_order_stat_mean

CHUNK = 1 << 16


class Scenario(enum.Enum):
    BENCHMARK = "Benchmark"
    EQUALLY_INFORMED = "EquallyInformed"
    RISK_AVERSE = "RiskAverse"
    INFO_ASYM = "InfoAsym"
    COLLECTION2 = "Collection2"


@dataclass(frozen=True)
class GameConfig:
    scenario: Scenario
    market: MarketParams
    policy: PricingPolicy
    trials: int = 10**6
    seed: int = 0
    risk: Optional[RiskParams] = None
    workers: int = 1
    collection_cost: Optional[float] = None  # total for both units; defaults to 2 * market.cost

    def __post_init__(self):
        if int(self.trials) < 1:
            raise DomainError(f"trials must be >= 1, got {self.trials}")
        if self.scenario is Scenario.RISK_AVERSE and self.risk is None:
            raise ParameterError("RiskAverse needs risk parameters")
        if self.scenario is not Scenario.RISK_AVERSE and self.market.dist is None:
            raise ParameterError(f"{self.scenario.value} needs a valuation distribution")

    @property
    def c2(self) -> float:
        return 2.0 * self.market.cost if self.collection_cost is None else float(self.collection_cost)


@dataclass(frozen=True)
class SimulationReport:
    trials: int
    creator_mean: float
    creator_std_err: float
    speculator_mean: float
    speculator_std_err: float
    end_buyer_mean: float
    end_buyer_std_err: float
    trade_frequency: float
    creator_variance: float
    creator_variance_std_err: float
    units_sold_histogram: list[int]
    max_accounting_residual: float
    creator_utility: Optional[float] = None
    creator_utility_std_err: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "creatorMean": self.creator_mean,
            "creatorStdErr": self.creator_std_err,
            "speculatorMean": self.speculator_mean,
            "speculatorStdErr": self.speculator_std_err,
            "endBuyerMean": self.end_buyer_mean,
            "endBuyerStdErr": self.end_buyer_std_err,
            "tradeFrequency": self.trade_frequency,
            "creatorVariance": self.creator_variance,
            "creatorVarianceStdErr": self.creator_variance_std_err,
            "unitsSoldHistogram": list(self.units_sold_histogram),
            "maxAccountingResidual": self.max_accounting_residual,
            "creatorUtility": self.creator_utility,
            "creatorUtilityStdErr": self.creator_utility_std_err,
        }


@dataclass
class _Outcome:
    creator: np.ndarray
    speculator: np.ndarray
    buyers: np.ndarray
    units: np.ndarray  # units leaving the creator in the trial
    consumed: np.ndarray  # summed valuation of units ending with end-buyers


def _buys(value, price):
    return weakly_geq(value, price)


def _world_distribution(cfg: GameConfig) -> ValuationDistribution:
    if cfg.market.dist is not None:
        return cfg.market.dist
    view = cfg.risk.views(cfg.market)[0]
    return _ParentNormal(view.mu, view.sigma)


class _ParentNormal:
    """Untruncated normal draws for mean-variance worlds given only ``(mu, sigma)``."""

    def __init__(self, mu: float, sigma: float):
        self.mu, self.sigma = mu, sigma

    def sample(self, rng, count):
        return self.mu + self.sigma * rng.standard_normal(count)


def _single_unit(cfg: GameConfig, v: np.ndarray, d) -> _Outcome:
    p0, r, c = cfg.policy.p0, cfg.policy.r, cfg.market.cost
    keep = 1.0 - r
    zeros = np.zeros_like(v)
    sc = cfg.scenario

    if sc is Scenario.BENCHMARK:
        spec_buys = np.zeros(v.shape, dtype=bool)
    elif sc is Scenario.EQUALLY_INFORMED:
        spec_buys = np.full(v.shape, bool(_buys(keep * d.mean(), p0)))
    elif sc is Scenario.INFO_ASYM:
        spec_buys = _buys(keep * v, p0)
    else:  # RISK_AVERSE: speculator weighs his own mean-variance view
        view = cfg.risk.views(cfg.market)[1]
        util = keep * view.mu - p0 - cfg.risk.eta_s * keep**2 * view.sigma**2
        spec_buys = np.full(v.shape, bool(_buys(util, 0.0)))

    # Speculator resells at p2 = v, leaving the end-buyer nothing.
    spec = np.where(spec_buys, keep * v - p0, 0.0)
    creator = np.where(spec_buys, p0 + r * v, 0.0)
    if sc is Scenario.RISK_AVERSE:
        direct = np.zeros(v.shape, dtype=bool)
    else:
        direct = ~spec_buys & _buys(v, p0)
    creator = creator + np.where(direct, p0, 0.0) - c
    buyers = np.where(direct, v - p0, zeros)
    sold = spec_buys | direct
    return _Outcome(creator, spec, buyers, sold.astype(np.int64), np.where(sold, v, 0.0))


def _collection(cfg: GameConfig, v1: np.ndarray, v2: np.ndarray, e_min: float, e_max: float,
                mean: float) -> _Outcome:
    p0, r = cfg.policy.p0, cfg.policy.r
    keep = 1.0 - r
    pay = (0.0, keep * e_max - p0, 2.0 * (keep * mean - p0))
    units = 0
    for k in (1, 2):
        if _buys(pay[k], pay[units]):
            units = k
    hi, lo = np.maximum(v1, v2), np.minimum(v1, v2)
    n = v1.shape[0]
    if units == 2:
        creator = 2.0 * p0 + r * (v1 + v2)
        spec = keep * (v1 + v2) - 2.0 * p0
        buyers = np.zeros(n)
        sold = np.full(n, 2)
        consumed = v1 + v2
    elif units == 1:
        # Speculator serves the keener buyer; creator offers the other unit at p0.
        rest = _buys(lo, p0)
        creator = p0 + r * hi + np.where(rest, p0, 0.0)
        spec = keep * hi - p0
        buyers = np.where(rest, lo - p0, 0.0)
        sold = 1 + rest.astype(np.int64)
        consumed = hi + np.where(rest, lo, 0.0)
    else:
        b1, b2 = _buys(v1, p0), _buys(v2, p0)
        creator = p0 * (b1.astype(float) + b2)
        spec = np.zeros(n)
        buyers = np.where(b1, v1 - p0, 0.0) + np.where(b2, v2 - p0, 0.0)
        sold = b1.astype(np.int64) + b2
        consumed = np.where(b1, v1, 0.0) + np.where(b2, v2, 0.0)
    return _Outcome(creator - cfg.c2, spec, buyers, sold, consumed)


def _chunk_sizes(trials: int) -> list[int]:
    full, rest = divmod(int(trials), CHUNK)
    return [CHUNK] * full + ([rest] if rest else [])


def _se(x: np.ndarray) -> float:
    n = x.size
    return float(np.std(x, ddof=1) / math.sqrt(n)) if n > 1 else 0.0


def simulate(cfg: GameConfig) -> SimulationReport:
    """Estimate each agent's expected payoff under ``cfg.policy``."""
    d = _world_distribution(cfg)
    collection = cfg.scenario is Scenario.COLLECTION2
    if collection:
        # Order-statistic means by quadrature, independent of the closed forms.
        e_min, e_max, mean = quad_order_stat_mean(d, 1), quad_order_stat_mean(d, 2), d.mean()

    def run(k_n):
        k, n = k_n
        rng = make_rng(cfg.seed, stream=k)
        if collection:
            v1, v2 = d.sample(rng, n), d.sample(rng, n)
            return _collection(cfg, v1, v2, e_min, e_max, mean)
        return _single_unit(cfg, d.sample(rng, n), d)

    jobs = list(enumerate(_chunk_sizes(cfg.trials)))
    if cfg.workers > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(run, jobs))
    else:
        parts = [run(j) for j in jobs]

    def cat(name):
        return np.concatenate([getattr(p, name) for p in parts])

    creator, spec, buyers = cat("creator"), cat("speculator"), cat("buyers")
    units, consumed = cat("units"), cat("consumed")
    cost = cfg.c2 if collection else cfg.market.cost
    residual = float(np.max(np.abs(creator + spec + buyers + cost - consumed)))

    n = creator.size
    c_mean = float(np.mean(creator))
    dev = creator - c_mean
    c_var = float(np.var(creator, ddof=1)) if n > 1 else 0.0
    var_se = _se(dev**2)
    utility = utility_se = None
    if cfg.scenario is Scenario.RISK_AVERSE:
        eta = cfg.risk.eta_c
        utility = c_mean - eta * c_var
        utility_se = _se(creator - eta * dev**2)

    hist = np.bincount(units, minlength=3 if collection else 2)
    return SimulationReport(
        trials=int(n),
        creator_mean=c_mean,
        creator_std_err=_se(creator),
        speculator_mean=float(np.mean(spec)),
        speculator_std_err=_se(spec),
        end_buyer_mean=float(np.mean(buyers)),
        end_buyer_std_err=_se(buyers),
        trade_frequency=float(np.mean(units > 0)),
        creator_variance=c_var,
        creator_variance_std_err=var_se,
        units_sold_histogram=[int(h) for h in hist],
        max_accounting_residual=residual,
        creator_utility=utility,
        creator_utility_std_err=utility_se,
    )


# -- probabilistic reversion ------------------------------------------------------

@dataclass(frozen=True)
class ReversionReport:
    """Creator take under reversion vs. a pro-rata royalty at the same rate.

    Each transfer reverts the item to the creator with probability ``p``; the
    creator then keeps the item's value at that transfer and the episode ends.
    The comparison royalty collects ``p`` times the sale price on every
    transfer that took place, which matches the reverting mechanism in mean.
    """

    revert_prob: float
    transfers: int
    trials: int
    mean_creator_take: float
    mean_std_err: float
    variance_creator_take: float
    variance_std_err: float
    analytic_mean: float
    analytic_variance: float
    pro_rata_comparison: float  # analytic expected royalty income
    pro_rata_sim_mean: float
    pro_rata_sim_std_err: float
    pro_rata_variance: float
    pro_rata_analytic_variance: float

    @property
    def variance_ratio(self) -> float:
        if self.pro_rata_variance == 0:
            return math.inf if self.variance_creator_take > 0 else math.nan
        return self.variance_creator_take / self.pro_rata_variance

    def to_dict(self) -> dict:
        out = {k: getattr(self, k) for k in self.__dataclass_fields__}
        out["varianceRatio"] = self.variance_ratio
        return out


def _stopping_moments(p: float, transfers: int) -> tuple[float, float]:
    """``E[N]`` and ``Var[N]`` for the number of transfers that take place."""
    t = np.arange(1, transfers + 1, dtype=float)
    probs = (1.0 - p) ** (t - 1) * p
    probs[-1] = (1.0 - p) ** (transfers - 1)
    e1 = float(np.sum(t * probs))
    e2 = float(np.sum(t**2 * probs))
    return e1, e2 - e1**2


def simulate_probabilistic_reversion(d: ValuationDistribution, revert_prob: float, transfers: int = 1,
                                     trials: int = 10**6, seed: int = 0) -> ReversionReport:
    if not (0.0 <= revert_prob <= 1.0):
        raise DomainError(f"revert probability must lie in [0, 1], got {revert_prob}")
    if int(transfers) < 1 or int(trials) < 1:
        raise DomainError("transfers and trials must be >= 1")
    p, T = float(revert_prob), int(transfers)

    takes, royalties = [], []
    for k, n in enumerate(_chunk_sizes(trials)):
        rng = make_rng(seed, stream=k)
        v = d.sample(rng, n * T).reshape(n, T)
        reverts = rng.random((n, T)) < p
        hit = reverts.any(axis=1)
        first = np.where(hit, reverts.argmax(axis=1), T - 1)
        takes.append(np.where(hit, v[np.arange(n), first], 0.0))
        happened = np.arange(T)[None, :] <= first[:, None]
        royalties.append(p * np.sum(np.where(happened, v, 0.0), axis=1))
    take, pro = np.concatenate(takes), np.concatenate(royalties)

    mu, m2 = d.mean(), d.second_moment()
    q = 1.0 - (1.0 - p) ** T
    e_n, var_n = _stopping_moments(p, T)
    dev = take - take.mean()
    return ReversionReport(
        revert_prob=p,
        transfers=T,
        trials=int(take.size),
        mean_creator_take=float(take.mean()),
        mean_std_err=_se(take),
        variance_creator_take=float(np.var(take, ddof=1)) if take.size > 1 else 0.0,
        variance_std_err=_se(dev**2),
        analytic_mean=q * mu,
        analytic_variance=q * m2 - (q * mu) ** 2,
        pro_rata_comparison=p * mu * e_n,
        pro_rata_sim_mean=float(pro.mean()),
        pro_rata_sim_std_err=_se(pro),
        pro_rata_variance=float(np.var(pro, ddof=1)) if pro.size > 1 else 0.0,
        pro_rata_analytic_variance=p**2 * (e_n * d.variance() + var_n * mu**2),
    )
