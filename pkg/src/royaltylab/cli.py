"""Command-line front end.

    royaltylab solve-risk --mu 1 --sigma 1 --eta-s 2 --eta-c 1
    royaltylab solve-asym --dist exp --lambda 1
    royaltylab sweep --target RegionRisk --out region.csv --format csv

``--config FILE`` reads ``key = value`` lines (``#`` starts a comment); keys
are flag names without the leading dashes. Flags given on the command line
override the file. Exit status: 0 success, 1 bad arguments or config, 2 a
failed ``verify`` check.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Any, Optional, Sequence

from . import __version__
from .benchmark_model import MarketParams, PricingPolicy, SolveResult, solve_direct_sale, solve_equally_informed_speculator
from .collections import solve_collection
from .errors import RoyaltyLabError
from .info_asymmetry import solve_asym
from .oracle_sim import GameConfig, Scenario, simulate
from .risk_sharing import MarketView, RiskParams, solve_risk_sharing, solve_risk_sharing_differing_views
from .sweep import Axis, SweepSpec, SweepTable, SweepTarget, default_spec, run_sweep
from .valuation import make_distribution

EXIT_OK, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2
SEED_ENV = "ROYALTYLAB_SEED"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


# -- config file ------------------------------------------------------------------

_FLAG_KEYS = {"differing-views"}


def read_config(path: str) -> list[str]:
    """Turn a ``key = value`` file into argv tokens."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    tokens = []
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("_", "-")
        if not key:
            raise UsageError(f"{path}:{n}: empty key")
        if key in _FLAG_KEYS:
            if value.lower() in ("1", "true", "yes", "on"):
                tokens.append(f"--{key}")
            elif value.lower() not in ("0", "false", "no", "off"):
                raise UsageError(f"{path}:{n}: '{key}' takes true or false")
            continue
        tokens += [f"--{key}", value]
    return tokens


def _expand_config(argv: list[str]) -> list[str]:
    """Insert config tokens right after the subcommand so later flags win."""
    path = None
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif tok.startswith("--config="):
            path = tok.split("=", 1)[1]
    if path is None or not argv:
        return argv
    return argv[:1] + read_config(path) + argv[1:]


# -- parser -------------------------------------------------------------------------

def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        seed = int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None
    if seed < 0:
        raise UsageError(f"{SEED_ENV} must be >= 0, got {seed}")
    return seed


def _common() -> argparse.ArgumentParser:
    p = _Parser(add_help=False)
    g = p.add_argument_group("market")
    g.add_argument("--dist", choices=["twopoint", "uniform", "exp", "normal"])
    g.add_argument("--vl", type=float, help="two-point low value")
    g.add_argument("--vh", type=float, help="two-point high value")
    g.add_argument("--p-high", type=float, default=0.5, help="two-point probability of the high value")
    g.add_argument("--a", type=float, help="uniform lower end")
    g.add_argument("--b", type=float, help="uniform upper end")
    g.add_argument("--lambda", dest="lam", type=float, help="exponential rate")
    g.add_argument("--mu", type=float, help="mean (risk views) or parent-normal mean")
    g.add_argument("--sigma", type=float, help="std dev (risk views) or parent-normal std dev")
    g.add_argument("--cost", type=float, default=0.0, help="creator's cost per unit")
    g.add_argument("--c2", type=float, help="collection cost for both units (default 2 * cost)")
    r = p.add_argument_group("risk")
    r.add_argument("--eta-s", type=float)
    r.add_argument("--eta-c", type=float)
    r.add_argument("--mu-c", type=float)
    r.add_argument("--sigma-c", type=float)
    r.add_argument("--mu-s", type=float)
    r.add_argument("--sigma-s", type=float)
    o = p.add_argument_group("run")
    o.add_argument("--p0", type=float, help="mint price for simulate")
    o.add_argument("--r", type=float, help="royalty rate for simulate / curves")
    o.add_argument("--seed", type=int)
    o.add_argument("--trials", type=int, default=10**6)
    o.add_argument("--workers", type=int, default=1)
    o.add_argument("--out", help="write a run record to this path")
    o.add_argument("--format", choices=["json", "csv"], default="json")
    o.add_argument("--config", help="key = value file mirroring these flags")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="royaltylab", description="Optimal mint price and royalty solvers.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common()
    kw = dict(parents=[common])
    sub.add_parser("solve-benchmark", help="direct sale and equally-informed speculator", **kw)
    risk = sub.add_parser("solve-risk", help="mean-variance risk sharing", **kw)
    risk.add_argument("--differing-views", action="store_true")
    sub.add_parser("solve-asym", help="better-informed speculator", **kw)
    sub.add_parser("solve-collection", help="two-unit collection", **kw)
    sim = sub.add_parser("simulate", help="Monte Carlo oracle", **kw)
    sim.add_argument("--scenario", required=True, choices=[s.value for s in Scenario])
    sw = sub.add_parser("sweep", help="trade-region and revenue-curve grids", **kw)
    sw.add_argument("--target", required=True, choices=[t.value for t in SweepTarget])
    sw.add_argument("--axis1", help="name:lo:hi:steps")
    sw.add_argument("--axis2", help="name:lo:hi:steps")
    sub.add_parser("verify", help="run the invariant suite", **kw)
    return parser


# -- argument helpers ---------------------------------------------------------------

def _need(args, *names: str) -> None:
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n for n in missing))


def _distribution(args, required: bool = True):
    if args.dist is None:
        if required:
            raise UsageError("--dist is required")
        return None
    if args.dist == "twopoint":
        _need(args, "vl", "vh")
        return make_distribution("twopoint", vL=args.vl, vH=args.vh, pHigh=args.p_high)
    if args.dist == "uniform":
        _need(args, "a", "b")
        return make_distribution("uniform", a=args.a, b=args.b)
    if args.dist == "exp":
        if args.lam is None:
            raise UsageError("missing --lambda")
        return make_distribution("exp", **{"lambda": args.lam})
    _need(args, "mu", "sigma")
    return make_distribution("normal", mu=args.mu, sigma=args.sigma)


def _risk_params(args, m: MarketParams) -> RiskParams:
    _need(args, "eta-s", "eta-c")
    if args.command == "solve-risk" and args.differing_views:
        mu_c = args.mu_c if args.mu_c is not None else args.mu
        sg_c = args.sigma_c if args.sigma_c is not None else args.sigma
        mu_s = args.mu_s if args.mu_s is not None else args.mu
        sg_s = args.sigma_s if args.sigma_s is not None else args.sigma
        if None in (mu_c, sg_c, mu_s, sg_s):
            raise UsageError("differing views need --mu-c --sigma-c --mu-s --sigma-s (or --mu/--sigma)")
        return RiskParams(args.eta_c, args.eta_s, MarketView(mu_c, sg_c), MarketView(mu_s, sg_s))
    if args.mu is not None and args.sigma is not None and args.dist != "normal":
        return RiskParams.shared(args.eta_c, args.eta_s, args.mu, args.sigma)
    if m.dist is None:
        raise UsageError("give --mu and --sigma, or a --dist to take the moments from")
    return RiskParams(args.eta_c, args.eta_s)


def _c2(args) -> float:
    return 2.0 * args.cost if args.c2 is None else args.c2


def _parse_axis(text: str) -> Axis:
    parts = text.split(":")
    if len(parts) != 4:
        raise UsageError(f"axis must look like name:lo:hi:steps, got {text!r}")
    try:
        return Axis(parts[0], float(parts[1]), float(parts[2]), int(parts[3]))
    except ValueError as exc:
        raise UsageError(f"bad axis {text!r}: {exc}") from None


def _fixed_params(args) -> dict:
    fixed: dict[str, Any] = {}
    if args.dist is not None:
        fixed["dist"] = args.dist
        fixed.update({"twopoint": {"vL": args.vl, "vH": args.vh, "pHigh": args.p_high},
                      "uniform": {"a": args.a, "b": args.b},
                      "exp": {"lambda": args.lam},
                      "normal": {"mu": args.mu, "sigma": args.sigma}}[args.dist])
    for key, val in (("r", args.r), ("eta_c", args.eta_c), ("eta_s", args.eta_s), ("c2", args.c2)):
        if val is not None:
            fixed[key] = val
    fixed["cost"] = args.cost
    return {k: v for k, v in fixed.items() if v is not None}


# -- output -------------------------------------------------------------------------

@dataclass
class RunRecord:
    timestamp: str
    subcommand: str
    config: dict
    results: Any
    tool_version: str
    seed: int

    def to_dict(self) -> dict:
        return {
            "timestamp": self.timestamp,
            "subcommand": self.subcommand,
            "toolVersion": self.tool_version,
            "seed": self.seed,
            "config": self.config,
            "results": self.results,
        }


def _timestamp() -> str:
    # SOURCE_DATE_EPOCH pins the stamp so repeated runs write identical files.
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = datetime.fromtimestamp(int(epoch), tz=timezone.utc) if epoch else datetime.now(timezone.utc)
    return when.strftime("%Y-%m-%dT%H:%M:%SZ")


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return ";".join(_cell(x) for x in v)
    return str(v)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def write_output(record: RunRecord, path: str, fmt: str) -> None:
    """JSON: one object, fixed key order. CSV: header plus rows, LF line ends."""
    if fmt == "json":
        text = json.dumps(_json_safe(record.to_dict()), indent=2, allow_nan=False) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        res = record.results
        if isinstance(res, dict) and set(res) == {"columns", "rows"}:
            w.writerow(res["columns"])
            for row in res["rows"]:
                w.writerow([_cell(x) for x in row])
        else:
            flat = _flatten(res)
            w.writerow(list(flat))
            w.writerow([_cell(x) for x in flat.values()])
        text = buf.getvalue()
    else:
        raise UsageError(f"unknown format {fmt!r}")
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror}") from None


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _print_solve(res: SolveResult, out) -> None:
    gain = res.relative_gain
    lines = [
        ("p0", res.policy.p0),
        ("r", res.policy.r),
        ("objective", res.objective),
        ("baseline", res.baseline_no_royalty),
        ("delta", res.delta),
        ("gain-pct", "n/a" if gain is None else f"{100.0 * gain:.1f}"),
        ("regime", res.regime),
    ]
    for k, v in lines:
        print(f"{k}={_fmt(v)}", file=out)


# -- commands -----------------------------------------------------------------------

def _cmd_solve(args, out) -> Any:
    cmd = args.command
    if cmd == "solve-benchmark":
        m = MarketParams(_distribution(args), args.cost)
        direct = solve_direct_sale(m)
        spec = solve_equally_informed_speculator(m)
        print("[direct sale]", file=out)
        _print_solve(direct, out)
        print("[equally-informed speculator]", file=out)
        _print_solve(spec, out)
        return {"directSale": direct.to_dict(), "equallyInformed": spec.to_dict()}
    if cmd == "solve-risk":
        m = MarketParams(_distribution(args, required=False), args.cost)
        rk = _risk_params(args, m)
        res = solve_risk_sharing_differing_views(m, rk) if args.differing_views else solve_risk_sharing(m, rk)
    elif cmd == "solve-asym":
        res = solve_asym(MarketParams(_distribution(args), args.cost))
    else:
        res = solve_collection(_distribution(args), _c2(args))
    _print_solve(res, out)
    return res.to_dict()


def _cmd_simulate(args, out) -> Any:
    _need(args, "p0")
    scenario = Scenario(args.scenario)
    risk = scenario is Scenario.RISK_AVERSE
    m = MarketParams(_distribution(args, required=not risk), args.cost)
    cfg = GameConfig(
        scenario=scenario,
        market=m,
        policy=PricingPolicy(args.p0, 0.0 if args.r is None else args.r),
        trials=args.trials,
        seed=args.seed,
        risk=_risk_params(args, m) if risk else None,
        workers=args.workers,
        collection_cost=args.c2,
    )
    rep = simulate(cfg).to_dict()
    for k, v in rep.items():
        if v is not None:
            print(f"{k}={_fmt(v)}", file=out)
    return rep


def _cmd_sweep(args, out) -> Any:
    base = default_spec(args.target)
    a1 = _parse_axis(args.axis1) if args.axis1 else base.axis1
    a2 = _parse_axis(args.axis2) if args.axis2 else base.axis2
    fixed = dict(base.fixed)
    fixed.update(_fixed_params(args))
    table: SweepTable = run_sweep(SweepSpec(base.target, a1, a2, fixed))
    print(f"rows={len(table.rows)}", file=out)
    print("columns=" + ",".join(table.columns), file=out)
    return {"columns": list(table.columns), "rows": [list(r) for r in table.rows]}


def _cmd_verify(args, out) -> Any:
    from .verify import run_checks

    results = run_checks()
    for c in results:
        print(f"{'PASS' if c.passed else 'FAIL'} {c.name}: {c.detail}", file=out)
    summary = {"passed": sum(c.passed for c in results), "failed": sum(not c.passed for c in results),
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in results]}
    return summary


_COMMANDS = {
    "solve-benchmark": _cmd_solve,
    "solve-risk": _cmd_solve,
    "solve-asym": _cmd_solve,
    "solve-collection": _cmd_solve,
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "verify": _cmd_verify,
}


def _echo_config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("out", "config")}


def main(argv: Optional[Sequence[str]] = None, out=None, err=None) -> int:
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_expand_config(argv))
        if args.seed is None:
            args.seed = _default_seed()
        if args.seed < 0:
            raise UsageError("--seed must be >= 0")
        results = _COMMANDS[args.command](args, out)
        if args.out:
            record = RunRecord(_timestamp(), args.command, _echo_config(args), results, __version__, args.seed)
            write_output(record, args.out, args.format)
    except UsageError as exc:
        print(str(exc), file=err)
        return EXIT_USAGE
    except (RoyaltyLabError, ValueError) as exc:
        print(f"royaltylab: {exc}", file=err)
        return EXIT_USAGE
    except OSError as exc:
        print(f"royaltylab: {exc}", file=err)
        return EXIT_USAGE
    if args.command == "verify" and results["failed"]:
        return EXIT_VERIFY
    return EXIT_OK
