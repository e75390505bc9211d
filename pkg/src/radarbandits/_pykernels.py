"""Pure-Python trial kernels.

These drive the public policy objects through ``resolve_round`` step by step
and are the reference for the compiled ``_ckernels`` extension, which must
reproduce their output bit for bit from the same pre-drawn randomness.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .core import clip_unit, resolve_round
from .environment import ReactiveEmitter
from .policies import (
    CoordinateAndPlay,
    MusicalChairs,
    SenseAndAvoid,
    assign_ranks,
    pooled_means,
    warmup_ready,
)
from .radar import gauss_newton

SAA, MC, CP = 0, 1, 2


class RoundsResult(NamedTuple):
    actions: np.ndarray  # (T, N) int8, 0 = rest
    rewards: np.ndarray  # (T, N) float64
    collided: np.ndarray  # (T, N) int8
    cp_start: int  # 0-based step where C&P roles began, -1 if never
    ranks: tuple
    failures: int


def _make_nodes(algorithm, n_arms, n_players, explore_len, subblocks, eta, forgetting, ix):
    if algorithm == SAA:
        return [SenseAndAvoid(n_arms) for _ in range(n_players)]
    if algorithm == MC:
        return [MusicalChairs(n_arms, explore_len) for _ in range(n_players)]
    if algorithm == CP:
        return [CoordinateAndPlay(n_arms, explore_len, subblocks, eta, forgetting, ix) for _ in range(n_players)]
    raise ValueError(f"unknown algorithm code {algorithm}")


def simulate_rounds(
    algorithm: int,
    means: np.ndarray,
    sigma: np.ndarray,
    noise: np.ndarray,
    unif: np.ndarray,
    tracked: np.ndarray,
    explore_len: int,
    settle: int,
    subblocks: int,
    eta: float,
    forgetting: float,
    ix: float,
) -> RoundsResult:
    T, M = means.shape
    N = noise.shape[1]
    nodes = _make_nodes(algorithm, M, N, explore_len, subblocks, eta, forgetting, ix)
    mean_rows = means.tolist()
    sig = [float(s) for s in sigma]
    z = noise.tolist()
    streams = [unif[i].tolist() for i in range(N)]
    emitter = ReactiveEmitter(frozenset(i + 1 for i in range(N) if tracked[i]))

    actions = np.zeros((T, N), dtype=np.int8)
    rewards = np.zeros((T, N))
    collided = np.zeros((T, N), dtype=np.int8)
    block_len = M * subblocks
    cp_start = explore_len + settle if algorithm == CP else -1
    started = False
    ranks: tuple = ()

    for t in range(T):
        if algorithm == CP and not started and t == cp_start:
            warmups = [n.warmup for n in nodes]
            if warmup_ready(warmups):
                ranks = assign_ranks([w.fixed_arm for w in warmups], pooled_means(warmups))
                for node, r in zip(nodes, ranks):
                    node.begin(r, N)
                started = True
            else:
                cp_start += block_len
        acts = [node.select(streams[i][t]) for i, node in enumerate(nodes)]
        row = mean_rows[t]
        zt = z[t]
        suppressed = emitter.suppressed

        def sampler(arm, player, _t):
            m = 0.0 if arm in suppressed else row[arm - 1]
            return m + sig[arm - 1] * zt[player - 1]

        outcome = resolve_round(acts, sampler, t + 1, M)
        for node, a, r, c in zip(nodes, acts, outcome.rewards, outcome.collisions.flags):
            node.observe(a, r, c)
        actions[t] = acts
        rewards[t] = outcome.rewards
        collided[t] = outcome.collisions.flags
        emitter = emitter.advance(outcome)

    failures = sum(n.failures for n in nodes) if algorithm == CP else 0
    return RoundsResult(actions, rewards, collided, cp_start if started else -1, tuple(ranks), failures)


def track(
    anchors: np.ndarray,
    ranges: np.ndarray,
    stds: np.ndarray,
    valid: np.ndarray,
    start: tuple[float, float],
    max_iter: int = 50,
    tol: float = 1e-3,
) -> tuple[np.ndarray, np.ndarray]:
    """Per-CPI fusion; each fit starts from the previous estimate, which is held on failure."""
    C, N = ranges.shape
    pts = [tuple(p) for p in anchors.tolist()]
    r_rows = ranges.tolist()
    s_rows = stds.tolist()
    v_rows = valid.tolist()
    est = np.empty((C, 2))
    fitted = np.zeros(C, dtype=np.int8)
    x, y = float(start[0]), float(start[1])
    for c in range(C):
        idx = [i for i in range(N) if v_rows[c][i]]
        if len(idx) >= 2:
            x, y = gauss_newton(
                [pts[i] for i in idx], [r_rows[c][i] for i in idx], [s_rows[c][i] for i in idx], x, y, max_iter, tol
            )
            fitted[c] = 1
        est[c, 0] = x
        est[c, 1] = y
    return est, fitted
