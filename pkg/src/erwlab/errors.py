"""Exception types shared across the package."""


class ErwlabError(Exception):
    """Base class for errors raised by erwlab."""


class DomainError(ErwlabError, ValueError):
    """A normalizer or statistic was evaluated outside its domain."""


class OracleRangeError(ErwlabError, ValueError):
    """The requested step count is outside the exact oracle's range."""


class RegimeError(ErwlabError, ValueError):
    """An operation was requested for a memory parameter in the wrong regime."""


class BudgetError(ErwlabError, RuntimeError):
    """horizon * replicas exceeds the configured step budget."""
