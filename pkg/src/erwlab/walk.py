"""The elephant random walk: process law, step samplers, and path/pair simulation.

Step n + 1 recalls a uniformly chosen past step and repeats it with
probability p or reverses it with probability 1 - p. Averaging over the
recalled index gives

    P(X_{n+1} = +1 | X_1..X_n) = p N+/n + (1 - p) N-/n = 1/2 + (2p - 1) S_n / (2n),

so (n, S_n) is a sufficient statistic and :func:`step` runs in O(1).
:func:`step_naive` keeps the full history and samples the recalled index
literally; the two are checked against each other by exhaustive enumeration.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels
from .regime import Regime, classify_regime, diff_normalizer
from .rng import RngStream

# first n at which each sup statistic's normalizer is defined
N_MIN_LOGLOG = 3
N_MIN_LOGLOGLOG = 16


@dataclass(frozen=True)
class WalkParams:
    p: float
    s: float = 0.5

    def __post_init__(self):
        p = float(self.p)
        s = float(self.s)
        if not 0.0 < p < 1.0:
            raise ValueError(f"memory parameter p must lie in (0, 1), got {self.p!r}")
        if not 0.0 <= s <= 1.0:
            raise ValueError(f"first-step parameter s must lie in [0, 1], got {self.s!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "s", s)

    @property
    def regime(self) -> Regime:
        return classify_regime(self.p)


@dataclass(frozen=True)
class WalkState:
    n: int = 0
    position: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"step count must be non-negative, got {self.n}")
        if abs(self.position) > self.n or (self.position - self.n) % 2:
            raise ValueError(f"unreachable state (n={self.n}, S={self.position})")


@dataclass(frozen=True)
class HistoryWalkState:
    steps: tuple[int, ...] = ()

    def __post_init__(self):
        steps = tuple(int(x) for x in self.steps)
        if any(x not in (1, -1) for x in steps):
            raise ValueError("steps must be +1 or -1")
        object.__setattr__(self, "steps", steps)

    @property
    def n(self) -> int:
        return len(self.steps)

    @property
    def position(self) -> int:
        return sum(self.steps)

    def as_state(self) -> WalkState:
        return WalkState(self.n, self.position)


@dataclass(frozen=True)
class PairRecord:
    """Outcome of one pair of independent walks run to ``horizon``.

    ``sup_stat_i`` and ``sup_stat_ii`` hold (sup of +diff, sup of -diff)
    normalized by sqrt(n log log n) and sqrt(n log n log log log n)
    respectively, over n >= the sup start. ``-inf`` means no eligible n.
    """

    horizon: int
    meeting_count: int
    last_meeting: int
    final_diff: int
    checkpoints: tuple[int, ...] = ()
    diffs: tuple[int, ...] = ()
    normalized_diffs: tuple[float, ...] = ()
    sup_stat_i: tuple[float, float] = (-math.inf, -math.inf)
    sup_stat_ii: tuple[float, float] = (-math.inf, -math.inf)

    def __post_init__(self):
        if not 0 <= self.last_meeting <= self.horizon:
            raise ValueError("last meeting outside [0, horizon]")
        if (self.meeting_count == 0) != (self.last_meeting == 0):
            raise ValueError("meeting_count and last_meeting disagree")


def conditional_up_probability(params: WalkParams, state: WalkState) -> float:
    return _kernels.up_probability(params.p, params.s, state.n, state.position)


def step(params: WalkParams, state: WalkState, rng) -> WalkState:
    """Advance one step using the sufficient statistic; consumes one uniform."""
    if rng.uniform() < conditional_up_probability(params, state):
        return WalkState(state.n + 1, state.position + 1)
    return WalkState(state.n + 1, state.position - 1)


def naive_branches(params: WalkParams, steps: Sequence[int]) -> list[tuple[float, int, int, bool]]:
    """All (probability, recalled index, next step, kept) outcomes of the literal sampler.

    With an empty history the only branches are the first-step rule.
    """
    n = len(steps)
    if n == 0:
        return [(params.s, 0, 1, True), (1.0 - params.s, 0, -1, True)]
    out = []
    for i in range(n):
        out.append((params.p / n, i + 1, steps[i], True))
        out.append(((1.0 - params.p) / n, i + 1, -steps[i], False))
    return out


def step_naive(params: WalkParams, state: HistoryWalkState, rng) -> HistoryWalkState:
    """Recall a uniformly chosen past step and keep it (prob p) or flip it.

    Consumes two uniforms once a history exists (recalled index, then
    keep/flip) and one for the first step.
    """
    n = state.n
    if n == 0:
        x = 1 if rng.uniform() < params.s else -1
        return HistoryWalkState((x,))
    recalled = min(int(rng.uniform() * n), n - 1)
    x = state.steps[recalled]
    if rng.uniform() >= params.p:
        x = -x
    return HistoryWalkState(state.steps + (x,))


def enumerate_naive_law(params: WalkParams, n: int) -> dict[int, float]:
    """Exact law of S_n by enumerating every branch of :func:`step_naive`."""
    histories: dict[tuple[int, ...], float] = {(): 1.0}
    for _ in range(n):
        nxt: dict[tuple[int, ...], float] = defaultdict(float)
        for hist, prob in histories.items():
            for w, _, x, _ in naive_branches(params, hist):
                if w > 0.0:
                    nxt[hist + (x,)] += prob * w
        histories = nxt
    law: dict[int, float] = defaultdict(float)
    for hist, prob in histories.items():
        law[sum(hist)] += prob
    return dict(law)


def enumerate_stepper_law(params: WalkParams, n: int) -> dict[int, float]:
    """Exact law of S_n from products of :func:`conditional_up_probability` over all sign paths."""
    law: dict[int, float] = defaultdict(float)
    for bits in range(2**n):
        state = WalkState()
        prob = 1.0
        for k in range(n):
            up = conditional_up_probability(params, state)
            if bits >> k & 1:
                prob *= up
                state = WalkState(state.n + 1, state.position + 1)
            else:
                prob *= 1.0 - up
                state = WalkState(state.n + 1, state.position - 1)
        law[state.position] += prob
    return dict(law)


def _check_checkpoints(horizon: int, checkpoints: Sequence[int]) -> np.ndarray:
    cps = np.asarray(list(checkpoints), dtype=np.int64)
    if cps.size:
        if np.any(np.diff(cps) < 0):
            raise ValueError("checkpoints must be sorted")
        if cps[0] < 1 or cps[-1] > horizon:
            raise ValueError(f"checkpoints must lie in [1, {horizon}]")
    return cps


def simulate_path(params: WalkParams, horizon: int, checkpoints: Sequence[int], rng: RngStream) -> list[tuple[int, int]]:
    """Positions at ``checkpoints`` along one path; consumes ``horizon`` draws from ``rng``."""
    cps = _check_checkpoints(horizon, checkpoints)
    if cps.size == 0:
        return []
    out = np.zeros((1, cps.size), dtype=np.int64)
    _kernels.walk_checkpoints(
        params.p, params.s, np.uint64(rng.seed), np.array([rng.index], dtype=np.uint64),
        rng.position, int(horizon), cps, out,
    )
    rng.advance(horizon)
    return [(int(n), int(x)) for n, x in zip(cps, out[0])]


def simulate_trajectory(params: WalkParams, horizon: int, rng: RngStream) -> np.ndarray:
    """Array of S_1..S_horizon along one path."""
    out = np.zeros(int(horizon), dtype=np.int64)
    _kernels.walk_trajectory(params.p, params.s, np.uint64(rng.seed), np.uint64(rng.index), rng.position, int(horizon), out)
    rng.advance(horizon)
    return out


def inverse_normalizer_table(regime: Regime, p: float, horizon: int, n_min: int) -> np.ndarray:
    """1/diff_normalizer(n) for n in [n_min, horizon]; zero below ``n_min``."""
    n = np.arange(horizon + 1, dtype=np.float64)
    table = np.zeros(horizon + 1)
    if n_min > horizon:
        return table
    m = n[n_min:]
    if regime is Regime.DIFFUSIVE:
        norm = np.sqrt(m * np.log(np.log(m)))
    elif regime is Regime.MARGINAL:
        norm = np.sqrt(m * np.log(m) * np.log(np.log(np.log(m))))
    else:
        norm = m ** (2.0 * p - 1.0)
    table[n_min:] = 1.0 / norm
    return table


def normalize_diff(regime: Regime, p: float, n: int, diff: float) -> float:
    try:
        return diff / diff_normalizer(regime, p, n)
    except ValueError:
        return math.nan


def simulate_pair(
    params: WalkParams,
    horizon: int,
    checkpoints: Sequence[int],
    rng_a: RngStream,
    rng_b: RngStream,
    n_min_lil: int = 100,
) -> PairRecord:
    """Run two independent walks side by side and record their meetings.

    A meeting is S_n = S'_n at a common n >= 1; n = 0 is not counted.
    """
    if rng_a.seed != rng_b.seed:
        raise ValueError("both streams must share the master seed")
    if rng_a.index == rng_b.index:
        raise ValueError("the two walks need distinct streams")
    cps = _check_checkpoints(horizon, checkpoints)
    res = run_pair_kernel(
        params, horizon, cps, rng_a.seed,
        np.array([rng_a.index], dtype=np.uint64), np.array([rng_b.index], dtype=np.uint64),
        n_min_lil, offset_a=rng_a.position, offset_b=rng_b.position,
    )
    rng_a.advance(horizon)
    rng_b.advance(horizon)
    diffs = tuple(int(d) for d in res["diffs"][0])
    regime = params.regime
    return PairRecord(
        horizon=int(horizon),
        meeting_count=int(res["meeting_count"][0]),
        last_meeting=int(res["last_meeting"][0]),
        final_diff=int(res["final_diff"][0]),
        checkpoints=tuple(int(c) for c in cps),
        diffs=diffs,
        normalized_diffs=tuple(normalize_diff(regime, params.p, int(c), d) for c, d in zip(cps, diffs)),
        sup_stat_i=(float(res["sup_i_plus"][0]), float(res["sup_i_minus"][0])),
        sup_stat_ii=(float(res["sup_ii_plus"][0]), float(res["sup_ii_minus"][0])),
    )


def run_pair_kernel(
    params: WalkParams,
    horizon: int,
    checkpoints: np.ndarray,
    seed: int,
    streams_a: np.ndarray,
    streams_b: np.ndarray,
    n_min_lil: int,
    offset_a: int = 0,
    offset_b: int = 0,
    tables: tuple[np.ndarray, np.ndarray] | None = None,
) -> dict[str, np.ndarray]:
    """Array form of :func:`simulate_pair` for a batch of stream pairs.

    The final checkpoint is always ``horizon`` internally so ``final_diff``
    is available; it is dropped from ``diffs`` if the caller did not ask for it.
    """
    horizon = int(horizon)
    want_final = checkpoints.size > 0 and checkpoints[-1] == horizon
    cps = checkpoints if want_final else np.append(checkpoints, horizon).astype(np.int64)
    n_min_i = max(int(n_min_lil), N_MIN_LOGLOG)
    n_min_ii = max(int(n_min_lil), N_MIN_LOGLOGLOG)
    if tables is None:
        tables = (
            inverse_normalizer_table(Regime.DIFFUSIVE, params.p, horizon, n_min_i),
            inverse_normalizer_table(Regime.MARGINAL, params.p, horizon, n_min_ii),
        )
    r = streams_a.shape[0]
    out = {
        "meeting_count": np.zeros(r, dtype=np.int64),
        "last_meeting": np.zeros(r, dtype=np.int64),
        "diffs": np.zeros((r, cps.size), dtype=np.int64),
        "sup_i_plus": np.empty(r),
        "sup_i_minus": np.empty(r),
        "sup_ii_plus": np.empty(r),
        "sup_ii_minus": np.empty(r),
    }
    _kernels.pair_records(
        params.p, params.s, np.uint64(seed), streams_a, streams_b, int(offset_a), int(offset_b),
        horizon, cps, n_min_i, tables[0], n_min_ii, tables[1],
        out["meeting_count"], out["last_meeting"], out["diffs"],
        out["sup_i_plus"], out["sup_i_minus"], out["sup_ii_plus"], out["sup_ii_minus"],
    )
    out["final_diff"] = out["diffs"][:, -1].copy()
    if not want_final:
        out["diffs"] = out["diffs"][:, :-1]
    return out
