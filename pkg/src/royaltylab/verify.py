"""Quick invariant suite behind ``royaltylab verify``.

Each check is a small, self-contained comparison between two independent
routes (closed form vs. quadrature, solver vs. simulation, ...). The Monte
Carlo checks use fewer trials than the test suite so the whole run stays fast.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .benchmark_model import (
    MarketParams,
    PricingPolicy,
    direct_sale_foc,
    markov_gap,
    solve_direct_sale,
)
from .collections import creator_revenue_2unit, no_royalty_collection_bound_check, solve_collection
from .info_asymmetry import creator_objective, solve_asym
from .oracle_sim import GameConfig, Scenario, simulate, simulate_probabilistic_reversion
from .risk_sharing import RiskParams, solve_risk_sharing
from .sweep import Axis, SweepSpec, SweepTarget, default_spec, run_sweep
from .valuation import Exponential, NormalNonNeg, TwoPoint, Uniform, quad_order_stat_mean, quad_tail_expectation

TRIALS = 200_000
SE_TOL = 4.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _kinds():
    return [TwoPoint(1.0, 3.0, 0.5), Uniform(0.0, 2.0), Exponential(1.0), NormalNonNeg(1.0, 1.0)]


def _order_stats() -> tuple[bool, str]:
    worst = 0.0
    for d in _kinds():
        lo, hi = d.order_stat_mean(1), d.order_stat_mean(2)
        worst = max(worst, abs(lo + hi - 2.0 * d.mean()),
                    abs(lo - quad_order_stat_mean(d, 1)), abs(hi - quad_order_stat_mean(d, 2)))
    return worst <= 1e-9, f"max error {worst:.3g}"


def _tails() -> tuple[bool, str]:
    worst = 0.0
    for d in _kinds():
        for t in (0.0, 0.5, 1.0, 2.0):
            worst = max(worst, abs(float(d.tail_expectation(t)) - quad_tail_expectation(d, t)))
    return worst <= 1e-9, f"max error {worst:.3g}"


def _markov() -> tuple[bool, str]:
    gaps = [markov_gap(MarketParams(d)) for d in _kinds()]
    return min(gaps) > 0, f"smallest gap {min(gaps):.6g}"


def _direct_foc() -> tuple[bool, str]:
    worst = max(abs(direct_sale_foc(d, solve_direct_sale(MarketParams(d)).policy.p0))
                for d in _kinds() if not d.is_discrete)
    return worst <= 1e-6, f"max residual {worst:.3g}"


def _risk_example() -> tuple[bool, str]:
    res = solve_risk_sharing(MarketParams(None, 0.0), RiskParams.shared(1.0, 2.0, 1.0, 1.0))
    ok = (abs(res.objective - 1.0 / 3.0) <= 1e-9 and abs(res.policy.r - 2.0 / 3.0) <= 1e-12
          and res.baseline_no_royalty == -1.0 and res.regime == "TradeOnlyWithRoyalties")
    return ok, f"u={res.objective:.12g} r={res.policy.r:.12g}"


def _asym() -> tuple[bool, str]:
    worst = 0.0
    for d in _kinds()[:3]:
        res = solve_asym(MarketParams(d))
        if (res.policy.p0, res.policy.r) != (0.0, 1.0):
            return False, f"{d.kind}: optimum at {res.policy}"
        worst = max(worst, res.diagnostics["maxProbeExcess"])
    return worst <= 1e-9, f"max probe excess {worst:.3g}"


def _collection() -> tuple[bool, str]:
    res = solve_collection(Exponential(1.0))
    target = 1.5 * (1.0 + math.exp(-3.0))
    ok = abs(res.objective - 2.0) <= 1e-9 and abs(res.baseline_no_royalty - target) <= 1e-6
    ok = ok and no_royalty_collection_bound_check(Uniform(0.0, 2.0)).holds
    return ok, f"objective={res.objective:.9g} baseline={res.baseline_no_royalty:.9g}"


def _within(sim: float, se: float, exact: float) -> bool:
    return abs(sim - exact) <= SE_TOL * se + 1e-12


def _oracle() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(3):
        pol = PricingPolicy(float(rng.uniform(0, 2)), float(rng.uniform(0, 1)))
        d = Exponential(1.0)
        m = MarketParams(d)
        pairs = [
            (Scenario.INFO_ASYM, creator_objective(pol, m).value),
            (Scenario.COLLECTION2, creator_revenue_2unit(pol, d).value),
        ]
        for sc, exact in pairs:
            rep = simulate(GameConfig(sc, m, pol, trials=TRIALS, seed=k))
            z = abs(rep.creator_mean - exact) / max(rep.creator_std_err, 1e-300)
            worst = max(worst, z)
    return worst <= SE_TOL, f"worst |z| {worst:.2f}"


def _reversion() -> tuple[bool, str]:
    rep = simulate_probabilistic_reversion(Exponential(1.0), 0.05, 1, TRIALS, seed=3)
    ok = _within(rep.mean_creator_take, rep.mean_std_err, rep.pro_rata_comparison) and rep.variance_ratio >= 10
    return ok, f"mean={rep.mean_creator_take:.4g} ratio={rep.variance_ratio:.3g}"


def _regions() -> tuple[bool, str]:
    counts = []
    for t in (SweepTarget.REGION_RISK, SweepTarget.REGION_ASYM, SweepTarget.REGION_COLLECTION):
        spec = default_spec(t)
        a1, a2 = spec.axis1, spec.axis2
        small = SweepSpec(t, Axis(a1.name, a1.lo, a1.hi, 40), Axis(a2.name, a2.lo, a2.hi, 40), spec.fixed)
        counts.append(run_sweep(small).column("region").count("TradeOnlyWithRoyalties"))
    return min(counts) > 0, f"royalty-only cells {counts}"


CHECKS: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("order-statistic identity", _order_stats),
    ("tail expectation vs quadrature", _tails),
    ("posted price below mean", _markov),
    ("direct-sale first-order condition", _direct_foc),
    ("risk-sharing worked example", _risk_example),
    ("free mint optimal under information asymmetry", _asym),
    ("two-unit collection optimum", _collection),
    ("oracle agrees with objectives", _oracle),
    ("reversion matches pro-rata mean, larger variance", _reversion),
    ("royalty-only trade regions non-empty", _regions),
]


def run_checks() -> list[CheckResult]:
    out = []
    for name, fn in CHECKS:
        try:
            ok, detail = fn()
        except Exception as exc:  # report, don't abort the suite
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail))
    return out
