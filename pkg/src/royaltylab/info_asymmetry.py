"""A better-informed speculator: royalties as dynamic pricing.

The speculator sees the realised valuation ``v`` before the mint and buys iff
``(1 - r) v >= p0``. If he passes, the creator posts ``p0`` to the end-buyer.
Expected creator profit collapses to

    p0 (1 - F(p0)) + r * E[V; V >= p0 / (1 - r)] - c,

maximised over the closed square ``[0, Q] x [0, 1]``. The free mint
``(p0, r) = (0, 1)`` earns the full ``E[V] - c``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from ._numerics import TIE_RTOL
from .benchmark_model import (
    MarketParams,
    PricingPolicy,
    RegionGrid,
    SolveResult,
    classify_trade,
    solve_direct_sale,
)
from .errors import DomainError
from .valuation import ValuationDistribution, is_non_degenerate

GRID_POINTS = 256
NM_MAX_ITER = 500
NM_TOL = 1e-8
OPTIMUM_TOL = 1e-9


@dataclass(frozen=True)
class AsymObjectiveSample:
    p0: float
    r: float
    value: float
    term_fixed: float
    term_royalty: float


def purchase_threshold(p0, r):
    """Lowest valuation at which the informed speculator buys.

    ``+inf`` when ``r = 1`` and ``p0 > 0``; 0 when ``p0 = 0``. Indifference
    (up to rounding) counts as a purchase.
    """
    p0 = np.asarray(p0, dtype=float)
    r = np.asarray(r, dtype=float)
    keep = 1.0 - r
    with np.errstate(divide="ignore", invalid="ignore"):
        t = p0 * (1.0 - TIE_RTOL) / keep
    t = np.where(p0 <= 0, 0.0, np.where(keep <= 0, np.inf, t))
    return t


def objective_terms(d: ValuationDistribution, p0, r) -> tuple[np.ndarray, np.ndarray]:
    """Posted-price term ``p0 Pr[V >= p0]`` and royalty term ``r E[V; V >= t]``."""
    p0 = np.asarray(p0, dtype=float)
    r = np.asarray(r, dtype=float)
    fixed = p0 * d.survival(p0)
    royalty = r * d.tail_expectation(purchase_threshold(p0, r))
    return fixed, royalty


def creator_objective(policy: PricingPolicy, m: MarketParams) -> AsymObjectiveSample:
    d = m.require_dist()
    fixed, royalty = objective_terms(d, policy.p0, policy.r)
    fixed, royalty = float(fixed), float(royalty)
    return AsymObjectiveSample(policy.p0, policy.r, fixed + royalty - m.cost, fixed, royalty)


def creator_objective_unsimplified(policy: PricingPolicy, m: MarketParams) -> float:
    """Profit written event by event: speculator buys, or creator sells residually.

    ``(p0 + r E[V | V >= t]) Pr[V >= t] + p0 Pr[p0 <= V < t] - c``.
    """
    d = m.require_dist()
    p0, r = policy.p0, policy.r
    t = float(purchase_threshold(p0, r))
    s_t = float(d.survival(t)) if math.isfinite(t) else 0.0
    bought = (p0 + r * float(d.conditional_mean_above(t))) * s_t if s_t > 0 else 0.0
    residual = p0 * max(float(d.survival(p0)) - s_t, 0.0)
    return bought + residual - m.cost


def foc_residuals(policy: PricingPolicy, m: MarketParams) -> tuple[float, float]:
    """Partial derivatives of the objective in ``p0`` and ``r`` (continuous laws only)."""
    d = m.require_dist()
    if d.is_discrete:
        raise DomainError("first-order conditions need a density")
    p0, r = policy.p0, policy.r
    if not (p0 > 0 and r < 1):
        raise DomainError("first-order conditions are defined for p0 > 0 and r < 1")
    keep = 1.0 - r
    t = p0 / keep
    f_t = float(d.pdf(t))
    # The royalty integral carries the factor r, so its p0-derivative does too.
    res_p0 = float(d.survival(p0)) - p0 * float(d.pdf(p0)) - r * p0 * f_t / keep**2
    res_r = float(d.tail_expectation(t)) - p0**2 * r * f_t / keep**3
    return res_p0, res_r


def _better(a: tuple, b: tuple) -> bool:
    """Is probe ``a = (value, p0, r)`` preferred to ``b``? Ties go to smaller ``(p0, r)``."""
    scale = max(1.0, abs(a[0]), abs(b[0]))
    if a[0] > b[0] + 1e-12 * scale:
        return True
    if b[0] > a[0] + 1e-12 * scale:
        return False
    return (a[1], a[2]) < (b[1], b[2])


def _discrete_candidates(d: ValuationDistribution) -> list[tuple[float, float]]:
    # Piecewise the objective rises in p0 and r, so maxima sit where p0 or the
    # purchase threshold lands on an atom.
    atoms = [v for v, _ in d.atoms]
    out = [(0.0, 1.0)]
    for p in [0.0] + atoms:
        out.append((p, 0.0))
        out.append((p, 1.0))
        for t in atoms:
            if t > p:
                out.append((p, 1.0 - p / t))
    return out


def solve_asym(m: MarketParams, grid_points: int = GRID_POINTS) -> SolveResult:
    """Global optimum over ``[0, Q] x [0, 1]``: grid, Nelder-Mead polish, free-mint corner."""
    d = m.require_dist()
    c = m.cost
    q = d.search_bound()
    ps = np.linspace(0.0, q, grid_points)
    rs = np.linspace(0.0, 1.0, grid_points)
    P, R = np.meshgrid(ps, rs, indexing="ij")
    fixed, royalty = objective_terms(d, P, R)
    values = fixed + royalty - c

    corner = (d.mean() - c, 0.0, 1.0)
    off_corner = values.copy()
    off_corner[0, -1] = -np.inf
    i, j = np.unravel_index(int(np.argmax(off_corner)), off_corner.shape)
    grid_best = (float(off_corner[i, j]), float(ps[i]), float(rs[j]))

    probes = [grid_best]
    if d.is_discrete:
        for p, r in _discrete_candidates(d):
            if (p, r) == (0.0, 1.0):
                continue
            f, ro = objective_terms(d, p, r)
            probes.append((float(f + ro) - c, p, r))

    def neg(x):
        p = min(max(x[0], 0.0), q)
        r = min(max(x[1], 0.0), 1.0)
        f, ro = objective_terms(d, p, r)
        return -(float(f + ro) - c)

    refined = None
    if not d.is_discrete:
        res = optimize.minimize(neg, x0=[grid_best[1], grid_best[2]], method="Nelder-Mead",
                                bounds=[(0.0, q), (0.0, 1.0)],
                                options={"maxiter": NM_MAX_ITER, "fatol": NM_TOL, "xatol": 1e-10})
        rp = (min(max(float(res.x[0]), 0.0), q), min(max(float(res.x[1]), 0.0), 1.0))
        refined = (-neg(res.x), rp[0], rp[1])

    best = corner
    for cand in probes + ([refined] if refined else []):
        if _better(cand, best):
            best = cand

    runner_up = max(probes, key=lambda t: t[0])
    bound = d.mean() - c
    all_probe_max = max(float(values.max()), runner_up[0], refined[0] if refined else -np.inf)
    alternatives = [(p, r) for v, p, r in probes if v >= bound - OPTIMUM_TOL]
    witness = is_non_degenerate(d)
    baseline = solve_direct_sale(m)
    is_corner = best[1] == 0.0 and best[2] == 1.0

    diag = {
        "expectedValueBound": bound,
        "gridBest": grid_best[0],
        "refinedBest": refined[0] if refined else None,
        "maxProbeExcess": all_probe_max - bound,
        "runnerUpValue": runner_up[0],
        "runnerUpP0": runner_up[1],
        "runnerUpR": runner_up[2],
        "alternativeOptima": [list(a) for a in alternatives],
        "unique": witness is not None and not alternatives,
        "nonDegenerate": witness is not None,
        "baselineP0": baseline.policy.p0,
    }
    return SolveResult(PricingPolicy(best[1], best[2]), best[0], baseline.objective,
                       "FreeMint" if is_corner else "Posted", diag)


def exponential_asym_utilities(lam: float, cost: float) -> tuple[float, float]:
    """Optimal creator profit with and without royalties for ``V ~ Exp(lam)``."""
    if not lam > 0:
        raise DomainError(f"rate must be > 0, got {lam}")
    return 1.0 / lam - cost, 1.0 / (math.e * lam) - cost


def trade_region_asym(lambdas, costs) -> RegionGrid:
    """Trade classification over ``(lambda, c)`` for exponential valuations."""
    lambdas = np.asarray(lambdas, dtype=float)
    costs = np.asarray(costs, dtype=float)
    if np.any(lambdas <= 0) or np.any(costs < 0):
        raise DomainError("need lambda > 0 and c >= 0")
    shape = (lambdas.size, costs.size)
    u_with, u_without = np.empty(shape), np.empty(shape)
    labels = np.empty(shape, dtype=object)
    for a, lam in enumerate(lambdas):
        for b, c in enumerate(costs):
            uw, un = exponential_asym_utilities(float(lam), float(c))
            u_with[a, b], u_without[a, b] = uw, un
            labels[a, b] = classify_trade(uw, un)
    return RegionGrid("lambda", "c", lambdas, costs, u_with, u_without, labels)
