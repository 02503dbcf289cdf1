"""Parameter sweeps behind the revenue curves and trade-region maps.

Each row is produced by calling the corresponding solver function for that
single cell, so any row can be re-derived on its own. Rows are ordered with
the first axis outermost.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

from .benchmark_model import MarketParams, PricingPolicy, classify_trade
from .collections import creator_revenue_2unit, exponential_collection_closed_form
from .errors import SweepConfigError
from .info_asymmetry import creator_objective, exponential_asym_utilities
from .risk_sharing import RiskParams, solve_risk_sharing
from .valuation import make_distribution

REGION_STEPS = 200
CURVE_STEPS = 401  # 400 intervals: step 0.01 on [0, 4] lands on the example prices


class SweepTarget(enum.Enum):
    REVENUE_CURVE_ASYM = "RevenueCurveAsym"
    REVENUE_CURVE_COLLECTION = "RevenueCurveCollection"
    REGION_RISK = "RegionRisk"
    REGION_ASYM = "RegionAsym"
    REGION_COLLECTION = "RegionCollection"


@dataclass(frozen=True)
class Axis:
    name: str
    lo: float
    hi: float
    steps: int

    def __post_init__(self):
        if int(self.steps) < 2:
            raise SweepConfigError(f"axis '{self.name}' needs at least 2 steps, got {self.steps}")
        if not (self.lo < self.hi):
            raise SweepConfigError(f"axis '{self.name}' needs lo < hi, got [{self.lo}, {self.hi}]")

    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.steps))


@dataclass(frozen=True)
class SweepSpec:
    target: SweepTarget
    axis1: Axis
    axis2: Optional[Axis] = None
    fixed: dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SweepTable:
    columns: tuple[str, ...]
    rows: list[tuple]

    def column(self, name: str) -> list:
        k = self.columns.index(name)
        return [row[k] for row in self.rows]


# Allowed axis names per target: (axis1, axis2 or None).
_AXES = {
    SweepTarget.REVENUE_CURVE_ASYM: ("p0", None),
    SweepTarget.REVENUE_CURVE_COLLECTION: ("p0", None),
    SweepTarget.REGION_RISK: ("mu", "sigma"),
    SweepTarget.REGION_ASYM: ("lambda", "c"),
    SweepTarget.REGION_COLLECTION: ("lambda", "c"),
}

_FIXED_DEFAULTS = {
    SweepTarget.REVENUE_CURVE_ASYM: {"dist": "twopoint", "vL": 1.0, "vH": 3.0, "pHigh": 0.5, "r": 0.0, "cost": 0.0},
    SweepTarget.REVENUE_CURVE_COLLECTION: {"dist": "exp", "lambda": 1.0, "r": 0.0, "cost": 0.0},
    SweepTarget.REGION_RISK: {"eta_c": 1.0, "eta_s": 2.0, "cost": 0.0},
    SweepTarget.REGION_ASYM: {},
    SweepTarget.REGION_COLLECTION: {},
}


def default_spec(target: SweepTarget | str) -> SweepSpec:
    """Default grids. Axis ranges are chosen to contain the worked examples."""
    target = SweepTarget(target)
    if target is SweepTarget.REVENUE_CURVE_ASYM:
        a1, a2 = Axis("p0", 0.0, 4.0, CURVE_STEPS), None
    elif target is SweepTarget.REVENUE_CURVE_COLLECTION:
        a1, a2 = Axis("p0", 0.0, 4.0, CURVE_STEPS), None
    elif target is SweepTarget.REGION_RISK:
        a1, a2 = Axis("mu", 0.0, 3.0, REGION_STEPS), Axis("sigma", 0.0, 3.0, REGION_STEPS)
    elif target is SweepTarget.REGION_ASYM:
        a1, a2 = Axis("lambda", 0.25, 4.0, REGION_STEPS), Axis("c", 0.01, 2.0, REGION_STEPS)
    else:
        a1, a2 = Axis("lambda", 0.25, 4.0, REGION_STEPS), Axis("c", 0.01, 4.0, REGION_STEPS)
    return SweepSpec(target, a1, a2, dict(_FIXED_DEFAULTS[target]))


def _check_axes(spec: SweepSpec) -> None:
    want1, want2 = _AXES[spec.target]
    if spec.axis1.name != want1:
        raise SweepConfigError(f"{spec.target.value}: first axis must be '{want1}', got '{spec.axis1.name}'")
    if want2 is None and spec.axis2 is not None:
        raise SweepConfigError(f"{spec.target.value} takes a single axis")
    if want2 is not None:
        if spec.axis2 is None:
            raise SweepConfigError(f"{spec.target.value} needs a second axis '{want2}'")
        if spec.axis2.name != want2:
            raise SweepConfigError(f"{spec.target.value}: second axis must be '{want2}', got '{spec.axis2.name}'")


def _dist_from_fixed(fixed: dict):
    params = {k: v for k, v in fixed.items() if k not in ("dist", "r", "cost", "c2")}
    return make_distribution(str(fixed["dist"]), **params)


def _fixed(spec: SweepSpec) -> dict:
    merged = dict(_FIXED_DEFAULTS[spec.target])
    if "dist" in spec.fixed and spec.fixed["dist"] != merged.get("dist"):
        # A different kind brings its own parameters; drop the default kind's.
        merged = {k: merged[k] for k in ("r", "cost") if k in merged}
    merged.update(spec.fixed)
    return merged


def revenue_curve_asym_row(p0: float, fixed: dict) -> tuple:
    m = MarketParams(_dist_from_fixed(fixed), float(fixed.get("cost", 0.0)))
    s = creator_objective(PricingPolicy(float(p0), float(fixed.get("r", 0.0))), m)
    return (float(p0), s.value, s.term_fixed, s.term_royalty)


def revenue_curve_collection_row(p0: float, fixed: dict) -> tuple:
    d = _dist_from_fixed(fixed)
    c2 = float(fixed.get("c2", 2.0 * float(fixed.get("cost", 0.0))))
    rev = creator_revenue_2unit(PricingPolicy(float(p0), float(fixed.get("r", 0.0))), d, c2)
    return (float(p0), rev.value, rev.regime.value)


def region_risk_row(mu: float, sigma: float, fixed: dict) -> tuple:
    rk = RiskParams.shared(float(fixed["eta_c"]), float(fixed["eta_s"]), float(mu), float(sigma))
    res = solve_risk_sharing(MarketParams(None, float(fixed.get("cost", 0.0))), rk)
    return (float(mu), float(sigma), res.objective, res.baseline_no_royalty, res.regime)


def region_asym_row(lam: float, c: float, fixed: dict) -> tuple:
    uw, un = exponential_asym_utilities(float(lam), float(c))
    return (float(lam), float(c), uw, un, classify_trade(uw, un).value)


def region_collection_row(lam: float, c: float, fixed: dict) -> tuple:
    cf = exponential_collection_closed_form(float(lam))
    uw, un = cf["objective"] - float(c), cf["baseline"] - float(c)
    return (float(lam), float(c), uw, un, classify_trade(uw, un).value)


_ROW_FN = {
    SweepTarget.REVENUE_CURVE_ASYM: (revenue_curve_asym_row, ("p0", "objective", "fixed_term", "royalty_term")),
    SweepTarget.REVENUE_CURVE_COLLECTION: (revenue_curve_collection_row, ("p0", "objective", "regime")),
    SweepTarget.REGION_RISK: (region_risk_row, ("mu", "sigma", "u_with", "u_without", "region")),
    SweepTarget.REGION_ASYM: (region_asym_row, ("lambda", "c", "u_with", "u_without", "region")),
    SweepTarget.REGION_COLLECTION: (region_collection_row, ("lambda", "c", "u_with", "u_without", "region")),
}


def row_function(target: SweepTarget):
    return _ROW_FN[SweepTarget(target)][0]


def run_sweep(spec: SweepSpec) -> SweepTable:
    """Evaluate the target on its grid (first axis outermost)."""
    _check_axes(spec)
    fn, columns = _ROW_FN[spec.target]
    fixed = _fixed(spec)
    rows = []
    if spec.axis2 is None:
        for x in spec.axis1.values():
            rows.append(fn(float(x), fixed))
    else:
        ys = spec.axis2.values()
        for x in spec.axis1.values():
            for y in ys:
                rows.append(fn(float(x), float(y), fixed))
    return SweepTable(columns, rows)
