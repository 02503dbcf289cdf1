"""Exception types raised across the package."""


class RoyaltyLabError(Exception):
    """Base class for all package errors."""


class DomainError(RoyaltyLabError, ValueError):
    """An argument lies outside the domain of a query (e.g. a negative valuation)."""


class UndefinedConditionalError(RoyaltyLabError, ValueError):
    """Conditioning on an event of probability zero."""


class UnsupportedOrderError(RoyaltyLabError, ValueError):
    """Order statistics requested for a sample size other than two."""


class ParameterError(RoyaltyLabError, ValueError):
    """Model parameters for which a closed form is undefined."""


class DegenerateDistributionError(RoyaltyLabError, ValueError):
    """A result needs a non-degenerate valuation but got a degenerate one."""


class SweepConfigError(RoyaltyLabError, ValueError):
    """Malformed sweep request (unknown axis, bad range)."""
