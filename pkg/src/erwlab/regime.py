"""Regime classification and the scaling functions attached to each regime."""
from __future__ import annotations

import math
from decimal import Decimal, InvalidOperation
from enum import Enum
from fractions import Fraction

from .errors import DomainError

THREE_QUARTERS = Decimal("0.75")


class Regime(str, Enum):
    DIFFUSIVE = "diffusive"
    MARGINAL = "marginal"
    SUPERDIFFUSIVE = "superdiffusive"


def parse_p(p) -> Decimal:
    """Exact decimal value of a memory parameter.

    Floats go through their shortest repr, so ``0.75`` parses as exactly 3/4.
    """
    if isinstance(p, Decimal):
        value = p
    elif isinstance(p, Fraction):
        value = Decimal(p.numerator) / Decimal(p.denominator)
    else:
        try:
            value = Decimal(str(p).strip())
        except InvalidOperation:
            raise ValueError(f"cannot parse memory parameter {p!r}") from None
    if not value.is_finite():
        raise ValueError(f"memory parameter must be finite, got {p!r}")
    return value


def classify_regime(p) -> Regime:
    value = parse_p(p)
    if not 0 < value < 1:
        raise ValueError(f"memory parameter must lie in (0, 1), got {p!r}")
    if value < THREE_QUARTERS:
        return Regime.DIFFUSIVE
    if value == THREE_QUARTERS:
        return Regime.MARGINAL
    return Regime.SUPERDIFFUSIVE


def walk_normalizer(regime: Regime, p: float, n: float) -> float:
    """Scale under which S_n has a non-degenerate limit: sqrt(n), sqrt(n log n) or n^(2p-1)."""
    if n < 1:
        raise DomainError(f"normalizer needs n >= 1, got {n}")
    if regime is Regime.DIFFUSIVE:
        return math.sqrt(n)
    if regime is Regime.MARGINAL:
        if n < 2:
            raise DomainError(f"sqrt(n log n) needs n >= 2, got {n}")
        return math.sqrt(n * math.log(n))
    return float(n) ** (2.0 * float(p) - 1.0)


def diff_normalizer(regime: Regime, p: float, n: float) -> float:
    """Scale for S_n - S'_n in the limsup / limit statements for a pair of walks.

    Diffusive: sqrt(n log log n), defined for n >= 3.
    Marginal: sqrt(n log n log log log n), defined for n >= 16 (n > e^e).
    Superdiffusive: n^(2p-1).
    """
    if n < 1:
        raise DomainError(f"normalizer needs n >= 1, got {n}")
    if regime is Regime.SUPERDIFFUSIVE:
        return float(n) ** (2.0 * float(p) - 1.0)
    log_n = math.log(n)
    if log_n <= 1.0:
        raise DomainError(f"log log n is not positive at n = {n}")
    loglog_n = math.log(log_n)
    if regime is Regime.DIFFUSIVE:
        return math.sqrt(n * loglog_n)
    if loglog_n <= 1.0:
        raise DomainError(f"log log log n is not positive at n = {n}")
    return math.sqrt(n * log_n * math.log(loglog_n))


def lil_constant(regime: Regime, p: float) -> float:
    """Almost-sure limsup of the normalized difference: 2/sqrt(3-4p), or 2 at p = 3/4."""
    if regime is Regime.DIFFUSIVE:
        return 2.0 / math.sqrt(3.0 - 4.0 * float(p))
    if regime is Regime.MARGINAL:
        return 2.0
    raise DomainError("no iterated-logarithm constant in the superdiffusive regime")


def diffusive_variance(p: float) -> float:
    """Limit variance 1/(3-4p) of S_n/sqrt(n) for p < 3/4."""
    return 1.0 / (3.0 - 4.0 * float(p))
