"""Two-unit collections sold through a speculator.

With two identical items and two end-buyers, the speculator compares buying
nothing, one unit (resold to the keener buyer at ``max(V1, V2)``), or both
(each resold at its buyer's valuation). That splits the mint price line into
three bands at ``(1 - r) E[min]`` and ``(1 - r) E[max]``:

* low price, speculator buys both: ``2 p0 + 2 r E[V]``
* mid price, one unit; the creator offers the other to the remaining buyer:
  ``p0 + r E[max] + p0 Pr[min(V1, V2) >= p0]``
* high price, nothing; the creator posts ``p0`` to both buyers: ``2 p0 S(p0)``

The mid-price residual term uses ``Pr[min >= p0]``. That is exactly the sale
probability when the speculator serves the higher-valuation buyer, because
the buyer left over for the creator is the one holding ``min(V1, V2)``. The
oracle plays that allocation.

Boundary ties go to the larger purchase.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._numerics import golden_section_max, weakly_geq
from .benchmark_model import PricingPolicy, RegionGrid, SolveResult, classify_trade
from .errors import DegenerateDistributionError, DomainError
from .valuation import ValuationDistribution, is_non_degenerate

R_STEP = 1e-3
BAND_POINTS = 257
OPTIMUM_TOL = 1e-9


class PriceRegime(enum.Enum):
    LOW = "LowPrice"
    MID = "MidPrice"
    HIGH = "HighPrice"


@dataclass(frozen=True)
class RegimeBoundaries:
    low_cut: float
    mid_cut: float


@dataclass(frozen=True)
class PiecewiseRevenue:
    regime: PriceRegime
    value: float

    @property
    def units(self) -> int:
        return {PriceRegime.LOW: 2, PriceRegime.MID: 1, PriceRegime.HIGH: 0}[self.regime]


def regime_boundaries(d: ValuationDistribution, r: float) -> RegimeBoundaries:
    keep = 1.0 - r
    return RegimeBoundaries(keep * d.order_stat_mean(1), keep * d.order_stat_mean(2))


def speculator_payoffs(policy: PricingPolicy, d: ValuationDistribution) -> tuple[float, float, float]:
    """Expected speculator profit from buying 0, 1 or 2 units."""
    keep = 1.0 - policy.r
    one = keep * d.order_stat_mean(2) - policy.p0
    two = 2.0 * (keep * d.mean() - policy.p0)
    return 0.0, one, two


def speculator_best_response(policy: PricingPolicy, d: ValuationDistribution) -> int:
    pay = speculator_payoffs(policy, d)
    best = 0
    for units in (1, 2):
        if weakly_geq(pay[units], pay[best]):
            best = units
    return best


def _regime_value(regime: PriceRegime, p0, r, d: ValuationDistribution, c2: float):
    p0 = np.asarray(p0, dtype=float)
    if regime is PriceRegime.LOW:
        return 2.0 * p0 + 2.0 * r * d.mean() - c2
    if regime is PriceRegime.MID:
        return p0 + r * d.order_stat_mean(2) + p0 * d.survival_min2(p0) - c2
    return 2.0 * p0 * d.survival(p0) - c2


def creator_revenue_2unit(policy: PricingPolicy, d: ValuationDistribution, c2: float = 0.0) -> PiecewiseRevenue:
    """Creator's expected profit given the speculator's best response; ``c2`` covers both units."""
    units = speculator_best_response(policy, d)
    regime = {2: PriceRegime.LOW, 1: PriceRegime.MID, 0: PriceRegime.HIGH}[units]
    return PiecewiseRevenue(regime, float(_regime_value(regime, policy.p0, policy.r, d, c2)))


# -- per-regime maximisation ----------------------------------------------------

def _band_grid(d: ValuationDistribution, lo: float, hi: float, n: int) -> np.ndarray:
    """Prices in the half-open band ``(lo, hi]``, atoms included."""
    if hi <= lo:
        return np.empty(0)
    pts = np.linspace(lo, hi, n)
    pts[0] = np.nextafter(lo, math.inf)
    if d.is_discrete:
        atoms = np.array([v for v, _ in d.atoms])
        pts = np.concatenate((pts, atoms[(atoms > lo) & (atoms <= hi)]))
    return pts


def _band_max(regime: PriceRegime, d: ValuationDistribution, r: float, c2: float,
              lo: float, hi: float, n: int = BAND_POINTS) -> tuple[float, float]:
    """Best ``(p0, value)`` of one regime's formula over ``(lo, hi]``, or ``(nan, -inf)``."""
    pts = _band_grid(d, lo, hi, n)
    if pts.size == 0:
        return math.nan, -math.inf
    vals = _regime_value(regime, pts, r, d, c2)
    k = int(np.argmax(vals))
    best = (float(pts[k]), float(vals[k]))
    if not d.is_discrete:
        step = (hi - lo) / (n - 1)
        a, b = max(pts[k] - step, pts[0]), min(pts[k] + step, hi)
        x, fx = golden_section_max(lambda p: float(_regime_value(regime, p, r, d, c2)), a, b)
        if fx > best[1]:
            best = (x, fx)
    return best


def _best_at_r(d: ValuationDistribution, r: float, c2: float, q: float) -> dict[PriceRegime, tuple[float, float]]:
    b = regime_boundaries(d, r)
    low = (b.low_cut, float(_regime_value(PriceRegime.LOW, b.low_cut, r, d, c2)))
    mid = _band_max(PriceRegime.MID, d, r, c2, b.low_cut, b.mid_cut)
    high = _band_max(PriceRegime.HIGH, d, r, c2, b.mid_cut, max(q, b.mid_cut))
    return {PriceRegime.LOW: low, PriceRegime.MID: mid, PriceRegime.HIGH: high}


def best_value_at_r(d: ValuationDistribution, r: float, c2: float = 0.0) -> tuple[float, float, PriceRegime]:
    """``max_p0`` of the creator's profit at fixed ``r``: ``(p0, value, regime)``."""
    per = _best_at_r(d, r, c2, _price_cap(d))
    regime = max(per, key=lambda g: (per[g][1], -_regime_rank(g)))
    return per[regime][0], per[regime][1], regime


def _regime_rank(g: PriceRegime) -> int:
    return {PriceRegime.LOW: 0, PriceRegime.MID: 1, PriceRegime.HIGH: 2}[g]


def _price_cap(d: ValuationDistribution) -> float:
    return max(d.search_bound(), d.order_stat_mean(2))


def solve_collection(d: ValuationDistribution, c2: float = 0.0, r_step: float = R_STEP) -> SolveResult:
    """Global optimum over ``(p0, r)`` by regime, per royalty rate on a grid.

    Diagnostics also report the best interior local maximum of
    ``phi(r) = max_p0 profit`` (``interiorLocalMaxR`` and its value).
    """
    if not (c2 >= 0):
        raise DomainError(f"collection cost must be >= 0, got {c2}")
    q = _price_cap(d)
    n_r = int(round(1.0 / r_step)) + 1
    rs = np.linspace(0.0, 1.0, n_r)
    grids = _scan_regimes(d, rs, c2, q)
    phi = np.max([vals.max(axis=1) for _, vals in grids.values()], axis=0)

    best = (2.0 * d.mean() - c2, 0.0, 1.0, PriceRegime.LOW)  # free-mint corner
    runner_up = (-math.inf, math.nan, math.nan)
    for g, (prices, vals) in grids.items():
        vals = vals.copy()
        vals[(prices == 0.0) & (rs[:, None] == 1.0)] = -np.inf
        i, j = np.unravel_index(int(np.argmax(vals)), vals.shape)
        cand = (float(vals[i, j]), float(prices[i, j]), float(rs[i]))
        if g is not PriceRegime.LOW and not d.is_discrete and math.isfinite(cand[0]):
            b = regime_boundaries(d, cand[2])
            lo, hi = (b.low_cut, b.mid_cut) if g is PriceRegime.MID else (b.mid_cut, max(q, b.mid_cut))
            p, v = _band_max(g, d, cand[2], c2, lo, hi)
            if v > cand[0]:
                cand = (v, p, cand[2])
        if cand[0] > runner_up[0]:
            runner_up = cand
        if cand[0] > best[0] + 1e-12 * max(1.0, abs(best[0])):
            best = (cand[0], cand[1], cand[2], g)

    baseline_p0, baseline, baseline_regime = best_value_at_r(d, 0.0, c2)
    interior = _interior_local_max(d, c2, rs, phi)
    witness = is_non_degenerate(d)
    bound = 2.0 * d.mean() - c2
    diag = {
        "twiceMeanBound": bound,
        "baselineP0": baseline_p0,
        "baselineRegime": baseline_regime,
        "runnerUpValue": runner_up[0],
        "runnerUpP0": runner_up[1],
        "runnerUpR": runner_up[2],
        "maxProbeExcess": max(float(phi.max()), runner_up[0]) - bound,
        "unique": witness is not None and runner_up[0] < bound - OPTIMUM_TOL,
        "nonDegenerate": witness is not None,
        "interiorLocalMaxR": interior[0],
        "interiorLocalMaxValue": interior[1],
    }
    return SolveResult(PricingPolicy(best[1], best[2]), best[0], baseline, best[3].value, diag)


def _scan_regimes(d: ValuationDistribution, rs: np.ndarray, c2: float, q: float,
                  n: int = BAND_POINTS) -> dict[PriceRegime, tuple[np.ndarray, np.ndarray]]:
    """Each regime's profit on a per-``r`` price grid: ``{regime: (prices, values)}``."""
    keep = (1.0 - rs)[:, None]
    low_cut, mid_cut = keep * d.order_stat_mean(1), keep * d.order_stat_mean(2)
    u = np.linspace(0.0, 1.0, n)[None, :]
    out = {PriceRegime.LOW: (low_cut, _regime_value(PriceRegime.LOW, low_cut, rs[:, None], d, c2))}
    for g, lo, hi in ((PriceRegime.MID, low_cut, mid_cut), (PriceRegime.HIGH, mid_cut, np.maximum(q, mid_cut))):
        prices = lo + u * (hi - lo)
        prices[:, 0] = np.nextafter(lo[:, 0], math.inf)
        prices[:, -1] = hi[:, 0]
        if d.is_discrete:
            atoms = np.broadcast_to(np.array([v for v, _ in d.atoms])[None, :], (rs.size, len(d.atoms)))
            prices = np.concatenate((prices, atoms), axis=1)
        vals = _regime_value(g, prices, rs[:, None], d, c2)
        vals = np.where((prices > lo) & (prices <= hi), vals, -np.inf)
        out[g] = (prices, vals)
    return out


def _interior_local_max(d, c2, rs, phi) -> tuple[float | None, float | None]:
    """Highest strict local maximum of ``phi`` strictly inside ``(0, 1)``, golden-refined."""
    inner = [i for i in range(1, len(rs) - 1) if phi[i] > phi[i - 1] and phi[i] >= phi[i + 1]]
    if not inner:
        return None, None
    i = max(inner, key=lambda k: phi[k])

    def f(r: float) -> float:
        return best_value_at_r(d, r, c2)[1]

    r, v = golden_section_max(f, rs[i - 1], rs[i + 1], tol=1e-10)
    return float(r), float(v)


# -- no-royalty bound ---------------------------------------------------------------

@dataclass(frozen=True)
class BoundCheckReport:
    twice_mean: float
    low_max: float
    mid_max: float
    high_max: float
    baseline: float
    baseline_p0: float

    @property
    def margin(self) -> float:
        return self.twice_mean - self.baseline

    @property
    def holds(self) -> bool:
        return self.margin > 0


def no_royalty_collection_bound_check(d: ValuationDistribution, scan_points: int = 20001) -> BoundCheckReport:
    """Without royalties each regime stays strictly below ``2 E[V]``."""
    if is_non_degenerate(d) is None:
        raise DegenerateDistributionError("valuation law has no non-degeneracy witness")
    b = regime_boundaries(d, 0.0)
    q = _price_cap(d)
    low = float(_regime_value(PriceRegime.LOW, b.low_cut, 0.0, d, 0.0))
    mid_p, mid = _band_max(PriceRegime.MID, d, 0.0, 0.0, b.low_cut, b.mid_cut, scan_points)
    high_p, high = _band_max(PriceRegime.HIGH, d, 0.0, 0.0, b.mid_cut, max(q, b.mid_cut), scan_points)
    p, base = max([(b.low_cut, low), (mid_p, mid), (high_p, high)], key=lambda t: t[1])
    return BoundCheckReport(2.0 * d.mean(), low, mid, high, base, p)


# -- exponential closed forms -------------------------------------------------------

def exponential_collection_closed_form(lam: float) -> dict[str, float]:
    """Known optimum values for ``V ~ Exp(lam)`` with zero cost."""
    if not lam > 0:
        raise DomainError(f"rate must be > 0, got {lam}")
    baseline = 1.5 / lam * (1.0 + math.exp(-3.0))
    full = 2.0 / lam
    return {
        "baselineP0": 1.5 / lam,
        "baseline": baseline,
        "objective": full,
        "relativeGain": full / baseline - 1.0,
        "interiorR": 2.0 / 3.0,
        "interiorValue": 1.5 / lam * (1.0 + 1.0 / (3.0 * math.e)),
    }


def trade_region_collection(lambdas, costs) -> RegionGrid:
    """Trade classification over ``(lambda, c)``; ``c`` is the cost of the whole collection."""
    lambdas = np.asarray(lambdas, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if np.any(lambdas <= 0) or np.any(costs < 0):
        raise DomainError("need lambda > 0 and c >= 0")
    shape = (lambdas.size, costs.size)
    u_with, u_without = np.empty(shape), np.empty(shape)
    labels = np.empty(shape, dtype=object)
    for a, lam in enumerate(lambdas):
        cf = exponential_collection_closed_form(float(lam))
        for b, c in enumerate(costs):
            uw, un = cf["objective"] - c, cf["baseline"] - c
            u_with[a, b], u_without[a, b] = uw, un
            labels[a, b] = classify_trade(uw, un)
    return RegionGrid("lambda", "c", lambdas, costs, u_with, u_without, labels)
