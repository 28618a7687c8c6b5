"""Seeded ensembles of single walks and of independent pairs.

Replica r of a walk ensemble reads stream r; replica r of a pair ensemble
reads streams 2r and 2r + 1. Workers take contiguous replica chunks and
write into disjoint slices of preallocated arrays, so the arrays (and
everything reduced from them) are identical for any worker count.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import BudgetError, RegimeError
from .regime import Regime, diff_normalizer, walk_normalizer
from .stats import StreamingMoments, merge_tree
from .walk import (
    N_MIN_LOGLOG,
    N_MIN_LOGLOGLOG,
    PairRecord,
    WalkParams,
    inverse_normalizer_table,
    normalize_diff,
    run_pair_kernel,
)

DEFAULT_BUDGET = 10**10
BUDGET_ENV = "ERWLAB_BUDGET"
# replicas per leaf of the moment reduction tree; fixed so the tree never depends on workers
REDUCTION_CHUNK = 1024


def step_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_BUDGET
    return int(float(raw))


def default_checkpoints(horizon: int) -> tuple[int, ...]:
    cps = []
    k = 10
    while k < horizon:
        cps.append(k)
        k *= 10
    cps.append(horizon)
    return tuple(cps)


@dataclass(frozen=True)
class EnsembleConfig:
    replicas: int
    horizon: int
    checkpoints: tuple[int, ...] = ()
    master_seed: int = 0
    workers: int = 1
    n_min_lil: int = 100

    def __post_init__(self):
        cps = tuple(int(c) for c in self.checkpoints) or default_checkpoints(int(self.horizon))
        object.__setattr__(self, "checkpoints", cps)
        if self.replicas < 1:
            raise ValueError("replicas must be >= 1")
        if self.horizon < 1:
            raise ValueError("horizon must be >= 1")
        if list(cps) != sorted(set(cps)) or cps[0] < 1 or cps[-1] > self.horizon:
            raise ValueError(f"checkpoints must be strictly increasing within [1, {self.horizon}]")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.n_min_lil < 16:
            raise ValueError("n_min_lil must be >= 16")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 unsigned bits")

    def check_budget(self) -> None:
        budget = step_budget()
        if self.horizon * self.replicas > budget:
            raise BudgetError(
                f"horizon * replicas = {self.horizon * self.replicas:.3g} exceeds the step budget {budget:.3g}"
                f" (set {BUDGET_ENV} to raise it)"
            )

    def as_dict(self) -> dict:
        return {
            "replicas": self.replicas,
            "horizon": self.horizon,
            "checkpoints": list(self.checkpoints),
            "master_seed": self.master_seed,
            "workers": self.workers,
            "n_min_lil": self.n_min_lil,
        }


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    edges = np.linspace(0, total, parts + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def _run_chunked(fn, total: int, workers: int) -> None:
    chunks = _chunks(total, workers)
    if len(chunks) == 1:
        fn(*chunks[0])
        return
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        for fut in [pool.submit(fn, a, b) for a, b in chunks]:
            fut.result()


def reduce_moments(values: np.ndarray) -> StreamingMoments:
    """Moments of a replica-indexed vector via the fixed reduction tree."""
    leaves = [StreamingMoments.from_values(values[i:i + REDUCTION_CHUNK]) for i in range(0, values.size, REDUCTION_CHUNK)]
    return merge_tree(leaves)


def _safe_walk_normalizer(regime: Regime, p: float, n: int) -> float:
    try:
        return walk_normalizer(regime, p, n)
    except ValueError:
        return math.nan


@dataclass
class CheckpointStats:
    n: int
    normalizer: float
    raw: StreamingMoments
    normalized: StreamingMoments
    raw_second_moment: float


@dataclass
class WalkEnsemble:
    params: WalkParams
    config: EnsembleConfig
    regime: Regime
    positions: np.ndarray  # (replicas, checkpoints) int64
    checkpoints: list[CheckpointStats] = field(default_factory=list)

    def at(self, n: int) -> CheckpointStats:
        for cp in self.checkpoints:
            if cp.n == n:
                return cp
        raise KeyError(n)

    def final(self) -> CheckpointStats:
        return self.checkpoints[-1]


def walk_positions(params: WalkParams, cfg: EnsembleConfig, first_stream: int = 0, stride: int = 1) -> np.ndarray:
    """Raw S_n at every checkpoint, one row per replica."""
    cps = np.asarray(cfg.checkpoints, dtype=np.int64)
    out = np.zeros((cfg.replicas, cps.size), dtype=np.int64)
    streams = (first_stream + stride * np.arange(cfg.replicas, dtype=np.uint64)).astype(np.uint64)

    def work(a, b):
        _kernels.walk_checkpoints(params.p, params.s, np.uint64(cfg.master_seed), streams[a:b], 0, cfg.horizon, cps, out[a:b])

    _run_chunked(work, cfg.replicas, cfg.workers)
    return out


def run_walk_ensemble(params: WalkParams, cfg: EnsembleConfig) -> WalkEnsemble:
    cfg.check_budget()
    positions = walk_positions(params, cfg)
    regime = params.regime
    result = WalkEnsemble(params, cfg, regime, positions)
    for j, n in enumerate(cfg.checkpoints):
        raw = positions[:, j].astype(np.float64)
        norm = _safe_walk_normalizer(regime, params.p, n)
        result.checkpoints.append(
            CheckpointStats(
                n=n,
                normalizer=norm,
                raw=reduce_moments(raw),
                normalized=reduce_moments(raw / norm),
                raw_second_moment=float(reduce_moments(raw * raw).mean),
            )
        )
    return result


@dataclass
class PairEnsemble:
    params: WalkParams
    config: EnsembleConfig
    regime: Regime
    meeting_count: np.ndarray
    last_meeting: np.ndarray
    final_diff: np.ndarray
    diffs: np.ndarray  # (replicas, checkpoints)
    sup_i_plus: np.ndarray
    sup_i_minus: np.ndarray
    sup_ii_plus: np.ndarray
    sup_ii_minus: np.ndarray

    @property
    def replicas(self) -> int:
        return self.meeting_count.size

    def normalized_diffs(self) -> np.ndarray:
        """diffs / diff_normalizer(n) per checkpoint; NaN where the normalizer is undefined."""
        out = np.empty(self.diffs.shape)
        for j, n in enumerate(self.config.checkpoints):
            try:
                out[:, j] = self.diffs[:, j] / diff_normalizer(self.regime, self.params.p, n)
            except ValueError:
                out[:, j] = math.nan
        return out

    def meeting_histogram(self) -> list[tuple[int, int]]:
        values, counts = np.unique(self.meeting_count, return_counts=True)
        return [(int(v), int(c)) for v, c in zip(values, counts)]

    def last_meeting_ecdf(self) -> list[tuple[int, int, float]]:
        values, counts = np.unique(self.last_meeting, return_counts=True)
        cum = np.cumsum(counts)
        return [(int(v), int(c), float(k / self.replicas)) for v, c, k in zip(values, counts, cum)]

    def fraction_last_meeting_after(self, n: int) -> float:
        return float(np.mean(self.last_meeting > n))

    def meeting_moments(self) -> StreamingMoments:
        return reduce_moments(self.meeting_count.astype(np.float64))

    def record(self, r: int) -> PairRecord:
        cps = self.config.checkpoints
        diffs = tuple(int(d) for d in self.diffs[r])
        return PairRecord(
            horizon=self.config.horizon,
            meeting_count=int(self.meeting_count[r]),
            last_meeting=int(self.last_meeting[r]),
            final_diff=int(self.final_diff[r]),
            checkpoints=cps,
            diffs=diffs,
            normalized_diffs=tuple(normalize_diff(self.regime, self.params.p, n, d) for n, d in zip(cps, diffs)),
            sup_stat_i=(float(self.sup_i_plus[r]), float(self.sup_i_minus[r])),
            sup_stat_ii=(float(self.sup_ii_plus[r]), float(self.sup_ii_minus[r])),
        )


def run_pair_ensemble(params: WalkParams, cfg: EnsembleConfig) -> PairEnsemble:
    cfg.check_budget()
    r = cfg.replicas
    cps = np.asarray(cfg.checkpoints, dtype=np.int64)
    idx = np.arange(r, dtype=np.uint64)
    streams_a = (np.uint64(2) * idx).astype(np.uint64)
    streams_b = (np.uint64(2) * idx + np.uint64(1)).astype(np.uint64)
    tables = (
        inverse_normalizer_table(Regime.DIFFUSIVE, params.p, cfg.horizon, max(cfg.n_min_lil, N_MIN_LOGLOG)),
        inverse_normalizer_table(Regime.MARGINAL, params.p, cfg.horizon, max(cfg.n_min_lil, N_MIN_LOGLOGLOG)),
    )
    fields_1d = ("meeting_count", "last_meeting", "final_diff", "sup_i_plus", "sup_i_minus", "sup_ii_plus", "sup_ii_minus")
    out = {
        name: np.zeros(r, dtype=np.int64 if name in ("meeting_count", "last_meeting", "final_diff") else np.float64)
        for name in fields_1d
    }
    out["diffs"] = np.zeros((r, cps.size), dtype=np.int64)

    def work(a, b):
        res = run_pair_kernel(params, cfg.horizon, cps, cfg.master_seed, streams_a[a:b], streams_b[a:b], cfg.n_min_lil, tables=tables)
        for name in fields_1d + ("diffs",):
            out[name][a:b] = res[name]

    _run_chunked(work, r, cfg.workers)
    return PairEnsemble(params=params, config=cfg, regime=params.regime, **out)


@dataclass
class LimitSamples:
    """Samples of (S_N - S'_N) / N^(2p-1), one per pair."""

    horizon: int
    samples: np.ndarray
    moments: StreamingMoments


def estimate_limit_samples(params: WalkParams, cfg: EnsembleConfig, pairs: PairEnsemble | None = None) -> LimitSamples:
    if params.regime is not Regime.SUPERDIFFUSIVE:
        raise RegimeError(f"limit samples need p > 3/4, got p = {params.p}")
    if pairs is None:
        pairs = run_pair_ensemble(params, cfg)
    scale = float(cfg.horizon) ** (2.0 * params.p - 1.0)
    samples = pairs.final_diff / scale
    return LimitSamples(cfg.horizon, samples, reduce_moments(samples))
