from __future__ import annotations

import random

import pytest

from royaltylab.errors import SweepConfigError
from royaltylab.sweep import (
    Axis,
    SweepSpec,
    SweepTarget,
    default_spec,
    row_function,
    run_sweep,
)


def _small(target: SweepTarget, steps: int = 30) -> SweepSpec:
    s = default_spec(target)
    a2 = None if s.axis2 is None else Axis(s.axis2.name, s.axis2.lo, s.axis2.hi, steps)
    return SweepSpec(target, Axis(s.axis1.name, s.axis1.lo, s.axis1.hi, steps), a2, s.fixed)


def test_default_grid_sizes():
    assert default_spec(SweepTarget.REGION_RISK).axis1.steps == 200
    assert default_spec(SweepTarget.REGION_RISK).axis2.steps == 200
    assert default_spec(SweepTarget.REVENUE_CURVE_ASYM).axis1.steps == 401


def test_two_point_revenue_curve():
    tab = run_sweep(default_spec(SweepTarget.REVENUE_CURVE_ASYM))
    best = max(tab.rows, key=lambda row: row[1])
    assert best[0] == pytest.approx(3.0)
    assert best[1] == pytest.approx(1.5)
    assert max(tab.column("objective")) < 2.0


def test_collection_revenue_curve():
    tab = run_sweep(default_spec(SweepTarget.REVENUE_CURVE_COLLECTION))
    best = max(tab.rows, key=lambda row: row[1])
    assert best[0] == pytest.approx(1.5)
    assert best[1] == pytest.approx(1.5747, abs=1e-4)
    assert best[2] == "MidPrice"


def test_region_risk_has_royalty_only_cells():
    tab = run_sweep(default_spec(SweepTarget.REGION_RISK))
    assert tab.columns == ("mu", "sigma", "u_with", "u_without", "region")
    assert len(tab.rows) == 200 * 200
    cells = [row for row in tab.rows if row[4] == "TradeOnlyWithRoyalties"]
    assert cells
    for mu, sigma, uw, un, _ in cells:
        # u* = mu - 2 sigma^2 / 3 >= 0 > mu - 2 sigma^2
        assert uw == pytest.approx(mu - 2 * sigma**2 / 3, abs=1e-12)
        assert un == pytest.approx(mu - 2 * sigma**2, abs=1e-12)


def test_rows_are_first_axis_outer():
    tab = run_sweep(_small(SweepTarget.REGION_ASYM, 5))
    lams = tab.column("lambda")
    assert lams == sorted(lams)
    assert tab.rows[0][1] < tab.rows[1][1]


@pytest.mark.parametrize("target", list(SweepTarget))
def test_rows_reproducible_by_direct_call(target):
    spec = _small(target)
    tab = run_sweep(spec)
    fn = row_function(target)
    fixed = dict(spec.fixed)
    rng = random.Random(0)
    for row in rng.sample(tab.rows, max(1, len(tab.rows) // 100)):
        args = row[:1] if spec.axis2 is None else row[:2]
        assert fn(*args, fixed) == row


@pytest.mark.parametrize("target", [SweepTarget.REGION_ASYM, SweepTarget.REGION_COLLECTION])
def test_region_monotone_in_cost(target):
    spec = _small(target, 40)
    tab = run_sweep(spec)
    by_lam = {}
    for lam, c, _, _, region in tab.rows:
        by_lam.setdefault(lam, []).append((c, region))
    for cells in by_lam.values():
        seen_no_trade = False
        for _, region in sorted(cells):
            if region == "NoTrade":
                seen_no_trade = True
            assert not (seen_no_trade and region == "TradeBoth")


def test_sweep_is_deterministic():
    spec = _small(SweepTarget.REGION_RISK)
    assert run_sweep(spec) == run_sweep(spec)


@pytest.mark.parametrize("make", [
    lambda: SweepSpec(SweepTarget.REGION_RISK, Axis("lambda", 0, 1, 5), Axis("sigma", 0, 1, 5)),
    lambda: SweepSpec(SweepTarget.REGION_RISK, Axis("mu", 0, 1, 5), None),
    lambda: SweepSpec(SweepTarget.REVENUE_CURVE_ASYM, Axis("p0", 0, 1, 5), Axis("r", 0, 1, 5)),
    lambda: SweepSpec(SweepTarget.REGION_ASYM, Axis("lambda", 0.5, 1, 5), Axis("cost", 0, 1, 5)),
])
def test_unknown_axes_rejected(make):
    with pytest.raises(SweepConfigError):
        run_sweep(make())


@pytest.mark.parametrize("args", [("mu", 0, 1, 1), ("mu", 1, 1, 5), ("mu", 2, 1, 5)])
def test_bad_axis(args):
    with pytest.raises(SweepConfigError):
        Axis(*args)


def test_curve_with_other_distribution():
    spec = SweepSpec(SweepTarget.REVENUE_CURVE_ASYM, Axis("p0", 0.0, 3.0, 301), None,
                     {"dist": "exp", "lambda": 1.0})
    best = max(run_sweep(spec).rows, key=lambda row: row[1])
    assert best[0] == pytest.approx(1.0)
