"""Estimators and tests used by the verification checks."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import special, stats

from .errors import DomainError

# asymptotic Kolmogorov critical values c(alpha); threshold is c / sqrt(n)
KS_CRITICAL = {0.01: 1.628, 0.05: 1.358}


@dataclass(frozen=True)
class StreamingMoments:
    """Count, mean, sum of squared deviations, min and max; mergeable.

    Updates use Welford's recurrence and merges the parallel (Chan et al.)
    combination, so order of accumulation only matters at rounding level.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0
    min: float = math.inf
    max: float = -math.inf

    @property
    def variance(self) -> float:
        if self.count < 2:
            return math.nan
        return self.m2 / (self.count - 1)

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)

    @property
    def sem(self) -> float:
        """Standard error of the mean."""
        return self.std / math.sqrt(self.count)

    def update(self, x: float) -> "StreamingMoments":
        x = float(x)
        count = self.count + 1
        delta = x - self.mean
        mean = self.mean + delta / count
        m2 = self.m2 + delta * (x - mean)
        return StreamingMoments(count, mean, m2, min(self.min, x), max(self.max, x))

    def merge(self, other: "StreamingMoments") -> "StreamingMoments":
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta * delta * self.count * other.count / count
        return StreamingMoments(count, mean, m2, min(self.min, other.min), max(self.max, other.max))

    @classmethod
    def from_values(cls, values) -> "StreamingMoments":
        """Two-pass moments of a whole block (used for replica chunks)."""
        x = np.asarray(values, dtype=np.float64).ravel()
        if x.size == 0:
            return cls()
        mean = float(x.mean())
        dev = x - mean
        return cls(int(x.size), mean, float(np.dot(dev, dev)), float(x.min()), float(x.max()))


def moments_update(acc: StreamingMoments, x: float) -> StreamingMoments:
    return acc.update(x)


def moments_merge(a: StreamingMoments, b: StreamingMoments) -> StreamingMoments:
    return a.merge(b)


def merge_tree(parts: Sequence[StreamingMoments]) -> StreamingMoments:
    """Pairwise merge in index order; the tree shape depends only on len(parts)."""
    parts = list(parts)
    if not parts:
        return StreamingMoments()
    while len(parts) > 1:
        nxt = [parts[i].merge(parts[i + 1]) for i in range(0, len(parts) - 1, 2)]
        if len(parts) % 2:
            nxt.append(parts[-1])
        parts = nxt
    return parts[0]


def variance_ci(moments: StreamingMoments, confidence: float = 0.95) -> tuple[float, float]:
    """Normal-approximation interval var * (1 -/+ z sqrt(2/(count-1))).

    Only meaningful when the samples are roughly Gaussian.
    """
    if moments.count < 30:
        raise ValueError(f"variance_ci needs at least 30 samples, got {moments.count}")
    if not 0.0 <= confidence < 1.0:
        raise ValueError("confidence must lie in [0, 1)")
    z = float(stats.norm.ppf(0.5 + confidence / 2.0))
    half = z * math.sqrt(2.0 / (moments.count - 1))
    var = moments.variance
    return var * (1.0 - half), var * (1.0 + half)


@dataclass(frozen=True)
class KsResult:
    statistic: float
    n: int
    alpha: float
    threshold: float

    @property
    def reject(self) -> bool:
        return self.statistic > self.threshold


def ks_threshold(n: int, alpha: float = 0.01) -> float:
    c = KS_CRITICAL.get(alpha)
    if c is None:
        c = float(special.kolmogi(alpha))
    return c / math.sqrt(n)


def ks_statistic(sample, cdf: Callable, alpha: float = 0.01) -> KsResult:
    """One-sample Kolmogorov-Smirnov distance of a sorted sample from ``cdf``."""
    x = np.asarray(sample, dtype=np.float64)
    n = x.size
    if n < 10:
        raise ValueError(f"KS needs at least 10 samples, got {n}")
    if np.any(np.diff(x) < 0):
        raise ValueError("sample must be sorted")
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    return KsResult(d, n, alpha, ks_threshold(n, alpha))


def ks_normal(sample, mean: float = 0.0, std: float = 1.0, alpha: float = 0.01) -> KsResult:
    x = np.sort(np.asarray(sample, dtype=np.float64))
    return ks_statistic(x, lambda v: stats.norm.cdf(v, loc=mean, scale=std), alpha)


@dataclass(frozen=True)
class PowerLawFit:
    slope: float
    intercept: float
    rss: float
    window: tuple[float, float]
    points: int

    def __call__(self, n):
        return np.exp(self.intercept) * np.asarray(n, dtype=np.float64) ** self.slope


def fit_power_law(points: Iterable[tuple[float, float]], window: tuple[float, float] | None = None) -> PowerLawFit:
    """Least squares of log y on log n over ``window`` (inclusive)."""
    pts = np.asarray(list(points), dtype=np.float64).reshape(-1, 2)
    if window is not None:
        lo, hi = window
        pts = pts[(pts[:, 0] >= lo) & (pts[:, 0] <= hi)]
    if pts.shape[0] < 3:
        raise ValueError("power-law fit needs at least 3 points in the window")
    if np.any(pts[:, 0] <= 0) or np.any(pts[:, 1] <= 0):
        raise ValueError("power-law fit needs positive n and y")
    lx = np.log(pts[:, 0])
    ly = np.log(pts[:, 1])
    mx, my = lx.mean(), ly.mean()
    dx = lx - mx
    slope = float(np.dot(dx, ly - my) / np.dot(dx, dx))
    intercept = float(my - slope * mx)
    resid = ly - (intercept + slope * lx)
    return PowerLawFit(slope, intercept, float(np.dot(resid, resid)), (float(pts[0, 0]), float(pts[-1, 0])), int(pts.shape[0]))


def running_sup(series: Iterable[tuple[int, float]], normalizer: Callable[[int], float], n_min: int) -> tuple[float, float]:
    """Suprema of +diff/normalizer(n) and -diff/normalizer(n) over n >= n_min.

    Returns -inf for a side with no eligible n.
    """
    normalizer(n_min)  # domain check up front
    sup_plus = -math.inf
    sup_minus = -math.inf
    for n, diff in series:
        if n < n_min:
            continue
        v = diff / normalizer(n)
        sup_plus = max(sup_plus, v)
        sup_minus = max(sup_minus, -v)
    return sup_plus, sup_minus


def empirical_quantile(sample, q: float) -> float:
    """Nearest-rank quantile: the ceil(q n)-th smallest value (rank at least 1)."""
    x = np.sort(np.asarray(sample, dtype=np.float64).ravel())
    if x.size == 0:
        raise ValueError("empty sample")
    if not 0.0 <= q <= 1.0:
        raise DomainError(f"quantile level must lie in [0, 1], got {q}")
    # rounding guards against q * n landing a hair above an integer
    rank = max(1, math.ceil(round(q * x.size, 9)))
    return float(x[rank - 1])
