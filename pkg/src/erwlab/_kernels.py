"""Compiled inner loops for path and pair simulation.

Every walk reads draw ``offset + k`` of its own stream at step k + 1, so a
replica's output depends only on (seed, stream index, offset) and never on
how replicas are batched.
"""
from __future__ import annotations

import numpy as np
from numba import njit

from .rng import uniform_pair


@njit(nogil=True, cache=True)
def up_probability(p, s, n, position):
    if n == 0:
        return s
    return 0.5 + (2.0 * p - 1.0) * position / (2.0 * n)


@njit(nogil=True, cache=True)
def _draw(seed, stream, d, cached):
    # returns (u, cached second half); block recomputed on even draws only
    if d & 1:
        return cached, cached
    u0, u1 = uniform_pair(seed, stream, d >> 1)
    return u0, u1


@njit(nogil=True, cache=True)
def walk_checkpoints(p, s, seed, streams, offset, horizon, checkpoints, out):
    n_cp = checkpoints.shape[0]
    for r in range(streams.shape[0]):
        stream = streams[r]
        pos = 0
        c = 0
        cached = 0.0
        if offset & 1:
            cached = uniform_pair(seed, stream, offset >> 1)[1]
        for k in range(horizon):
            u, cached = _draw(seed, stream, offset + k, cached)
            if u < up_probability(p, s, k, pos):
                pos += 1
            else:
                pos -= 1
            while c < n_cp and checkpoints[c] == k + 1:
                out[r, c] = pos
                c += 1


@njit(nogil=True, cache=True)
def walk_trajectory(p, s, seed, stream, offset, horizon, out):
    """Full path S_1..S_horizon of one walk into ``out``."""
    pos = 0
    cached = 0.0
    if offset & 1:
        cached = uniform_pair(seed, stream, offset >> 1)[1]
    for k in range(horizon):
        u, cached = _draw(seed, stream, offset + k, cached)
        if u < up_probability(p, s, k, pos):
            pos += 1
        else:
            pos -= 1
        out[k] = pos


@njit(nogil=True, cache=True)
def pair_records(
    p, s, seed, streams_a, streams_b, offset_a, offset_b, horizon, checkpoints,
    n_min_i, inv_norm_i, n_min_ii, inv_norm_ii,
    meet_count, last_meet, diffs, sup_i_plus, sup_i_minus, sup_ii_plus, sup_ii_minus,
):
    n_cp = checkpoints.shape[0]
    for r in range(streams_a.shape[0]):
        sa = streams_a[r]
        sb = streams_b[r]
        pa = 0
        pb = 0
        ca = 0.0
        cb = 0.0
        if offset_a & 1:
            ca = uniform_pair(seed, sa, offset_a >> 1)[1]
        if offset_b & 1:
            cb = uniform_pair(seed, sb, offset_b >> 1)[1]
        meets = 0
        last = 0
        c = 0
        ip = -np.inf
        im = -np.inf
        jp = -np.inf
        jm = -np.inf
        for k in range(horizon):
            ua, ca = _draw(seed, sa, offset_a + k, ca)
            ub, cb = _draw(seed, sb, offset_b + k, cb)
            if ua < up_probability(p, s, k, pa):
                pa += 1
            else:
                pa -= 1
            if ub < up_probability(p, s, k, pb):
                pb += 1
            else:
                pb -= 1
            n = k + 1
            d = pa - pb
            if d == 0:
                meets += 1
                last = n
            if n >= n_min_i:
                v = d * inv_norm_i[n]
                if v > ip:
                    ip = v
                if -v > im:
                    im = -v
            if n >= n_min_ii:
                v = d * inv_norm_ii[n]
                if v > jp:
                    jp = v
                if -v > jm:
                    jm = -v
            while c < n_cp and checkpoints[c] == n:
                diffs[r, c] = d
                c += 1
        meet_count[r] = meets
        last_meet[r] = last
        sup_i_plus[r] = ip
        sup_i_minus[r] = im
        sup_ii_plus[r] = jp
        sup_ii_minus[r] = jm
