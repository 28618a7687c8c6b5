"""Elephant random walk laboratory.

Exact law of the walk by dynamic programming, seeded Monte Carlo ensembles
of single walks and independent pairs, and the statistics used to check
the diffusive / marginal / superdiffusive behaviour and pair meetings.
"""

__version__ = "0.1.0"

from .ensemble import (
    EnsembleConfig,
    estimate_limit_samples,
    run_pair_ensemble,
    run_walk_ensemble,
)
from .oracle import (
    LatticePmf,
    MomentSeries,
    exact_diff_pmf,
    exact_mean,
    exact_pmf,
    exact_second_moment,
    expected_meetings,
    meeting_probability,
)
from .regime import Regime, classify_regime, diff_normalizer, walk_normalizer
from .rng import RngStream
from .stats import StreamingMoments
from .walk import (
    HistoryWalkState,
    PairRecord,
    WalkParams,
    WalkState,
    conditional_up_probability,
    simulate_pair,
    simulate_path,
    step,
    step_naive,
)

__all__ = [
    "EnsembleConfig",
    "HistoryWalkState",
    "LatticePmf",
    "MomentSeries",
    "PairRecord",
    "Regime",
    "RngStream",
    "StreamingMoments",
    "WalkParams",
    "WalkState",
    "classify_regime",
    "conditional_up_probability",
    "diff_normalizer",
    "estimate_limit_samples",
    "exact_diff_pmf",
    "exact_mean",
    "exact_pmf",
    "exact_second_moment",
    "expected_meetings",
    "meeting_probability",
    "run_pair_ensemble",
    "run_walk_ensemble",
    "simulate_pair",
    "simulate_path",
    "step",
    "step_naive",
    "walk_normalizer",
]
