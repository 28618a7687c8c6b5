import math

import numpy as np
import pytest

from erwlab.ensemble import (
    REDUCTION_CHUNK,
    EnsembleConfig,
    default_checkpoints,
    estimate_limit_samples,
    reduce_moments,
    run_pair_ensemble,
    run_walk_ensemble,
)
from erwlab.errors import BudgetError, RegimeError
from erwlab.oracle import exact_second_moment
from erwlab.rng import RngStream
from erwlab.stats import StreamingMoments, ks_normal
from erwlab.walk import WalkParams, simulate_pair, simulate_path


def test_config_validation():
    with pytest.raises(ValueError):
        EnsembleConfig(0, 10)
    with pytest.raises(ValueError):
        EnsembleConfig(5, 0)
    with pytest.raises(ValueError):
        EnsembleConfig(5, 10, (5, 3))
    with pytest.raises(ValueError):
        EnsembleConfig(5, 10, (11,))
    with pytest.raises(ValueError):
        EnsembleConfig(5, 10, workers=0)
    with pytest.raises(ValueError):
        EnsembleConfig(5, 10, n_min_lil=15)
    with pytest.raises(ValueError):
        EnsembleConfig(5, 10, master_seed=2**64)
    assert EnsembleConfig(5, 12_345).checkpoints == (10, 100, 1000, 10_000, 12_345)
    assert default_checkpoints(1) == (1,)
    assert default_checkpoints(100) == (10, 100)


def test_budget_guard(monkeypatch):
    monkeypatch.setenv("ERWLAB_BUDGET", "1000")
    with pytest.raises(BudgetError):
        run_walk_ensemble(WalkParams(0.5), EnsembleConfig(11, 100))
    with pytest.raises(BudgetError):
        run_pair_ensemble(WalkParams(0.5), EnsembleConfig(11, 100))
    assert run_walk_ensemble(WalkParams(0.5), EnsembleConfig(10, 100)).positions.shape == (10, 2)
    monkeypatch.delenv("ERWLAB_BUDGET")
    with pytest.raises(BudgetError):
        EnsembleConfig(10**6, 10**5).check_budget()
    EnsembleConfig(10**5, 10**5).check_budget()


@pytest.mark.parametrize("workers", [4, 3, 7])
def test_walk_ensemble_worker_invariance(workers):
    params = WalkParams(0.8, 0.3)
    base = run_walk_ensemble(params, EnsembleConfig(2_500, 3_000, master_seed=13))
    other = run_walk_ensemble(params, EnsembleConfig(2_500, 3_000, master_seed=13, workers=workers))
    assert np.array_equal(base.positions, other.positions)
    for a, b in zip(base.checkpoints, other.checkpoints):
        assert a.raw == b.raw and a.normalized == b.normalized
        assert a.raw_second_moment == b.raw_second_moment


@pytest.mark.parametrize("workers", [4, 3])
def test_pair_ensemble_worker_invariance(workers):
    params = WalkParams(0.6)
    cfg = EnsembleConfig(1_500, 2_000, master_seed=21)
    a = run_pair_ensemble(params, cfg)
    b = run_pair_ensemble(params, EnsembleConfig(1_500, 2_000, master_seed=21, workers=workers))
    for name in ("meeting_count", "last_meeting", "final_diff", "diffs", "sup_i_plus", "sup_i_minus", "sup_ii_plus", "sup_ii_minus"):
        assert np.array_equal(getattr(a, name), getattr(b, name)), name


def test_walk_replica_uses_stream_r():
    params = WalkParams(0.7)
    cfg = EnsembleConfig(20, 500, (7, 100, 500), master_seed=99)
    ens = run_walk_ensemble(params, cfg)
    for r in (0, 1, 19):
        path = simulate_path(params, 500, [7, 100, 500], RngStream(99, r))
        assert [x for _, x in path] == ens.positions[r].tolist()


def test_pair_replica_uses_streams_2r_2r_plus_1():
    params = WalkParams(0.5)
    cfg = EnsembleConfig(6, 1_000, (50, 1_000), master_seed=4)
    pairs = run_pair_ensemble(params, cfg)
    for r in range(6):
        rec = simulate_pair(params, 1_000, [50, 1_000], RngStream(4, 2 * r), RngStream(4, 2 * r + 1))
        assert pairs.record(r) == rec


def test_reduction_tree_matches_single_pass():
    x = np.random.default_rng(0).normal(size=5 * REDUCTION_CHUNK + 17)
    acc = reduce_moments(x)
    assert acc.count == x.size
    assert acc.mean == pytest.approx(x.mean(), rel=1e-12, abs=1e-15)
    assert acc.variance == pytest.approx(x.var(ddof=1), rel=1e-12)
    assert reduce_moments(np.array([])) == StreamingMoments()


@pytest.mark.parametrize("p,s", [(0.5, 0.5), (0.75, 0.5), (0.85, 0.5), (0.3, 1.0)])
def test_second_moment_matches_oracle(p, s):
    params = WalkParams(p, s)
    n = 2_000
    ens = run_walk_ensemble(params, EnsembleConfig(8_000, n, master_seed=3))
    sq = ens.positions[:, -1].astype(np.float64) ** 2
    se = sq.std(ddof=1) / math.sqrt(sq.size)
    assert ens.final().raw_second_moment == pytest.approx(sq.mean(), rel=1e-12)
    assert abs(sq.mean() - exact_second_moment(params, n)) < 4 * se


def test_normalized_variance_diffusive():
    ens = run_walk_ensemble(WalkParams(0.6), EnsembleConfig(10_000, 10_000, master_seed=8))
    cp = ens.final()
    assert cp.normalizer == 100.0
    assert cp.normalized.variance == pytest.approx(1 / 0.6, rel=0.05)
    assert abs(cp.raw.mean) < 4 * cp.raw.sem


def test_pairs_with_certain_first_step_all_meet():
    pairs = run_pair_ensemble(WalkParams(0.85, 1.0), EnsembleConfig(500, 1_000, master_seed=2))
    assert np.all(pairs.meeting_count >= 1)
    assert np.all(pairs.last_meeting >= 1)


def test_pair_ensemble_accessors():
    pairs = run_pair_ensemble(WalkParams(0.5), EnsembleConfig(400, 1_000, master_seed=1))
    hist = pairs.meeting_histogram()
    assert sum(c for _, c in hist) == 400
    ecdf = pairs.last_meeting_ecdf()
    assert ecdf[-1][2] == 1.0
    assert all(a[0] < b[0] for a, b in zip(ecdf, ecdf[1:]))
    assert pairs.fraction_last_meeting_after(1_000) == 0.0
    assert pairs.meeting_moments().count == 400
    norm = pairs.normalized_diffs()
    assert norm.shape == (400, 3)
    assert np.all(np.isfinite(norm))


def test_limit_samples_regime_error():
    with pytest.raises(RegimeError):
        estimate_limit_samples(WalkParams(0.75), EnsembleConfig(10, 100))
    with pytest.raises(RegimeError):
        estimate_limit_samples(WalkParams(0.5), EnsembleConfig(10, 100))


def test_limit_samples_shape_and_symmetry():
    params = WalkParams(0.85)
    cfg = EnsembleConfig(2_000, 10_000, master_seed=5)
    lim = estimate_limit_samples(params, cfg)
    assert lim.samples.shape == (2_000,)
    assert lim.moments.count == 2_000
    assert abs(lim.moments.mean) < 4 * lim.moments.sem
    target = 2 * exact_second_moment(params, 10_000) / 10_000 ** (4 * 0.85 - 2)
    assert lim.moments.variance == pytest.approx(target, rel=0.1)
    pairs = run_pair_ensemble(params, cfg)
    again = estimate_limit_samples(params, cfg, pairs)
    assert np.array_equal(again.samples, lim.samples)


@pytest.mark.parametrize("p", [0.5, 0.6])
def test_clt_of_differences(p):
    n = 100_000
    pairs = run_pair_ensemble(WalkParams(p), EnsembleConfig(5_000, n, (n,), master_seed=11))
    z = pairs.final_diff / math.sqrt(2 * n / (3 - 4 * p))
    res = ks_normal(z, alpha=0.01)
    assert not res.reject, (res.statistic, res.threshold)
