"""Optimal mint price and royalty for NFT-style sales, with a Monte Carlo check."""
from __future__ import annotations

__version__ = "0.1.0"

from .benchmark_model import MarketParams, PricingPolicy, SolveResult, TradeRegion  # noqa: E402
from .valuation import Exponential, NormalNonNeg, TwoPoint, Uniform, make_distribution  # noqa: E402

__all__ = [
    "__version__",
    "Exponential",
    "MarketParams",
    "NormalNonNeg",
    "PricingPolicy",
    "SolveResult",
    "TradeRegion",
    "TwoPoint",
    "Uniform",
    "make_distribution",
]
