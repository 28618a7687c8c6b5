"""Exact law of S_n by forward dynamic programming, plus meeting quantities for a pair.

The pmf at step k lives on the parity lattice {-k, -k+2, ..., k}, stored
as an array indexed by (position + k) / 2. Moments use the one-line
recursions that follow from the conditional step law:

    E[S_{k+1}]   = E[S_k] (1 + (2p-1)/k)
    E[S_{k+1}^2] = E[S_k^2] (1 + 2(2p-1)/k) + 1
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .errors import OracleRangeError
from .walk import WalkParams

ORACLE_MAX_N = 20_000


@dataclass(frozen=True)
class LatticePmf:
    """Probabilities on ``lo, lo + 2, ..., lo + 2 * (len(probs) - 1)``."""

    n: int
    lo: int
    probs: np.ndarray

    def __post_init__(self):
        if np.any(self.probs < 0):
            raise ValueError("negative probability")

    @property
    def positions(self) -> np.ndarray:
        return self.lo + 2 * np.arange(self.probs.size)

    def __getitem__(self, k: int) -> float:
        offset = k - self.lo
        if offset < 0 or offset % 2 or offset // 2 >= self.probs.size:
            return 0.0
        return float(self.probs[offset // 2])

    def as_dict(self) -> dict[int, float]:
        return {int(k): float(v) for k, v in zip(self.positions, self.probs)}

    def total(self) -> float:
        return float(self.probs.sum())

    def mean(self) -> float:
        return float(np.dot(self.positions, self.probs))

    def second_moment(self) -> float:
        x = self.positions.astype(np.float64)
        return float(np.dot(x * x, self.probs))


@dataclass(frozen=True)
class MomentSeries:
    """E[S_n] and E[S_n^2] for n = 0..n_max (index 0 is the empty walk)."""

    n_max: int
    means: np.ndarray
    second_moments: np.ndarray


def _check_range(n: int, cap: int) -> None:
    if not 1 <= n <= cap:
        raise OracleRangeError(f"exact oracle supports 1 <= n <= {cap}, got {n}")


def pmf_sequence(params: WalkParams, n_max: int, cap: int = ORACLE_MAX_N) -> Iterator[np.ndarray]:
    """Yield the pmf arrays for n = 1..n_max."""
    _check_range(n_max, cap)
    q = np.array([1.0 - params.s, params.s])
    yield q
    drift = 2.0 * params.p - 1.0
    for k in range(1, n_max):
        x = np.arange(-k, k + 1, 2, dtype=np.float64)
        # up and down written separately so s = 1/2 stays exactly symmetric
        up = 0.5 + drift * x / (2.0 * k)
        down = 0.5 - drift * x / (2.0 * k)
        nxt = np.zeros(k + 2)
        nxt[1:] += q * up
        nxt[:-1] += q * down
        q = nxt
        yield q


def exact_pmf(params: WalkParams, n: int, cap: int = ORACLE_MAX_N) -> LatticePmf:
    for q in pmf_sequence(params, n, cap):
        pass
    return LatticePmf(n, -n, q)


def exact_moment_series(params: WalkParams, n_max: int) -> MomentSeries:
    if n_max < 1:
        raise OracleRangeError(f"n_max must be >= 1, got {n_max}")
    drift = 2.0 * params.p - 1.0
    means = np.zeros(n_max + 1)
    second = np.zeros(n_max + 1)
    means[1] = 2.0 * params.s - 1.0
    second[1] = 1.0
    for k in range(1, n_max):
        means[k + 1] = means[k] * (1.0 + drift / k)
        second[k + 1] = second[k] * (1.0 + 2.0 * drift / k) + 1.0
    return MomentSeries(n_max, means, second)


def exact_mean(params: WalkParams, n: int) -> float:
    return float(exact_moment_series(params, n).means[n])


def exact_second_moment(params: WalkParams, n: int) -> float:
    return float(exact_moment_series(params, n).second_moments[n])


def exact_variance(params: WalkParams, n: int) -> float:
    series = exact_moment_series(params, n)
    return float(series.second_moments[n] - series.means[n] ** 2)


def meeting_probabilities(params: WalkParams, n_max: int, cap: int = ORACLE_MAX_N) -> np.ndarray:
    """P(S_n = S'_n) for n = 1..n_max (entry 0 is n = 1)."""
    out = np.empty(n_max)
    for i, q in enumerate(pmf_sequence(params, n_max, cap)):
        out[i] = np.dot(q, q)
    return out


def meeting_probability(params: WalkParams, n: int, cap: int = ORACLE_MAX_N) -> float:
    q = exact_pmf(params, n, cap).probs
    return float(np.dot(q, q))


def expected_meetings(params: WalkParams, n_max: int, cap: int = ORACLE_MAX_N) -> float:
    """Expected number of meetings over 1 <= n <= n_max."""
    return float(meeting_probabilities(params, n_max, cap).sum())


def exact_diff_pmf(params: WalkParams, n: int, cap: int = ORACLE_MAX_N) -> LatticePmf:
    """Law of S_n - S'_n for independent copies: P(d) = sum_k pmf(k) pmf(k - d)."""
    q = exact_pmf(params, n, cap).probs
    return LatticePmf(n, -2 * n, np.convolve(q, q[::-1]))


@dataclass(frozen=True)
class MeetingPrediction:
    """Expected meetings up to ``horizon``: exact to ``exact_until`` plus a fitted tail."""

    horizon: int
    exact_until: int
    exact_part: float
    tail_part: float
    fit_window: tuple[int, int]
    fit_slope: float
    fit_constant: float

    @property
    def total(self) -> float:
        return self.exact_part + self.tail_part


def predict_expected_meetings(params: WalkParams, horizon: int, cap: int = ORACLE_MAX_N) -> MeetingPrediction:
    """Exact partial sum up to min(horizon, cap), extended by a power-law tail fit.

    The tail model c * n^a is fitted by least squares in log-log on the
    upper half of the exact range, [cap/2, cap].
    """
    from .stats import fit_power_law

    exact_until = min(horizon, cap)
    probs = meeting_probabilities(params, exact_until, cap)
    exact_part = float(probs.sum())
    if horizon <= cap:
        return MeetingPrediction(horizon, exact_until, exact_part, 0.0, (exact_until, exact_until), math.nan, math.nan)
    lo = cap // 2
    n = np.arange(lo, cap + 1)
    fit = fit_power_law(list(zip(n, probs[lo - 1:cap])))
    c = math.exp(fit.intercept)
    tail_n = np.arange(cap + 1, horizon + 1, dtype=np.float64)
    tail = float(np.sum(c * tail_n ** fit.slope))
    return MeetingPrediction(horizon, cap, exact_part, tail, (lo, cap), fit.slope, c)
