"""Deterministic trial execution and cross-trial aggregation."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import kernels
from ..core import SINGLE_BEST, TOP_N_SUM, comparator_series, cumulative_regret
from ..radar import RadarScene, cpi_summary, range_noise_std, target_track
from .config import PolicyConfig, ScenarioConfig

log = logging.getLogger(__name__)

_CODES = {"saa": kernels.SAA, "mc": kernels.MC, "cp": kernels.CP}


@dataclass
class TrialSeries:
    label: str
    trial: int
    seed: int
    regret: np.ndarray  # (T,) with the configured comparator
    regret_alt: np.ndarray  # (T,) with the other comparator
    error: np.ndarray  # (C,) meters
    estimates: np.ndarray  # (C, 2)
    fitted: np.ndarray  # (C,) 1 where a fresh fix was formed
    actions: np.ndarray  # (T, N), 0 = rest
    collided: np.ndarray  # (T, N)
    cp_start: int
    ranks: tuple
    failures: int
    block_collisions: np.ndarray  # C&P only: collision rounds per block after warm-up
    block_play_collisions: np.ndarray  # C&P only: of those, rounds inside play sub-blocks


@dataclass(frozen=True)
class TrialStreams:
    """Pre-drawn randomness for one trial, shared by every policy (common random numbers)."""

    noise: np.ndarray  # (T, N) standard normals for reward draws
    unif: np.ndarray  # (N, T, M) per-node private uniforms
    radar: np.ndarray  # (C, N) standard normals for range errors


def trial_streams(config: ScenarioConfig, trial: int) -> TrialStreams:
    ss = np.random.SeedSequence(config.seed, spawn_key=(trial,))
    env, pol, rad = (np.random.default_rng(s) for s in ss.spawn(3))
    T, M, N = config.horizon, config.n_arms, config.n_players
    return TrialStreams(
        env.standard_normal((T, N)),
        pol.random((N, T, M)),
        rad.standard_normal((config.cpi_count, N)),
    )


def track_positions(scene: RadarScene, actions, rewards, collided, radar_noise, backend=None):
    """Per-CPI range measurements and fusion -> (estimates, errors, fitted)."""
    backend = backend or kernels
    truth = target_track(scene)
    anchors = scene.anchors
    sinr, frac = cpi_summary(actions, rewards, collided, scene.pri_per_cpi, scene.sinr_map)
    valid = frac > 0
    std = np.where(valid, range_noise_std(scene.sigma0, np.where(valid, sinr, 0.0), np.where(valid, frac, 1.0)), 1.0)
    true_range = np.linalg.norm(truth[:, None, :] - anchors[None, :, :], axis=2)
    ranges = true_range + std * radar_noise
    est, fitted = backend.track(anchors, ranges, std, valid.astype(np.int8), scene.centroid)
    return est, np.linalg.norm(est - truth, axis=1), fitted


def _block_audit(collided: np.ndarray, cp_start: int, block_len: int, play_from: int):
    if cp_start < 0:
        return np.zeros(0, dtype=int), np.zeros(0, dtype=int)
    any_col = collided[cp_start:].any(axis=1)
    n_blocks = any_col.size // block_len
    per_block = any_col[: n_blocks * block_len].reshape(n_blocks, block_len)
    return per_block.sum(axis=1), per_block[:, play_from:].sum(axis=1)


def run_policy(config: ScenarioConfig, policy: PolicyConfig, streams: TrialStreams, trial: int = 0, backend=None) -> TrialSeries:
    backend = backend or kernels
    means = np.asarray(config.schedule.means_matrix())
    N, M = config.n_players, config.n_arms
    tracked = np.zeros(N, dtype=np.int8)
    if policy.emitter:
        tracked[[p - 1 for p in policy.tracked]] = 1
    res = backend.simulate_rounds(
        _CODES[policy.algorithm],
        means,
        np.asarray(config.schedule.noise),
        streams.noise,
        streams.unif,
        tracked,
        policy.explore_len,
        policy.settle,
        policy.subblocks,
        policy.eta,
        policy.forgetting,
        policy.implicit_exploration,
    )
    alt = SINGLE_BEST if config.comparator == TOP_N_SUM else TOP_N_SUM
    regret = cumulative_regret(res.rewards, comparator_series(means, N, config.comparator))
    regret_alt = cumulative_regret(res.rewards, comparator_series(means, N, alt))
    est, err, fitted = track_positions(config.scene, res.actions, res.rewards, res.collided, streams.radar, backend)
    if policy.algorithm == "cp":
        blocks, play = _block_audit(res.collided, res.cp_start, M * policy.subblocks, M * (N - 1))
    else:
        blocks = play = np.zeros(0, dtype=int)
    return TrialSeries(
        label=policy.label,
        trial=trial,
        seed=config.seed,
        regret=regret,
        regret_alt=regret_alt,
        error=err,
        estimates=est,
        fitted=fitted,
        actions=res.actions,
        collided=res.collided,
        cp_start=res.cp_start,
        ranks=res.ranks,
        failures=res.failures,
        block_collisions=blocks,
        block_play_collisions=play,
    )


def run_trial(config: ScenarioConfig, trial: int = 0, backend=None) -> dict[str, TrialSeries]:
    """Run every configured policy on trial ``trial``'s derived random streams."""
    streams = trial_streams(config, trial)
    return {p.label: run_policy(config, p, streams, trial, backend) for p in config.policies}


def _run_trial_job(args):
    config, trial = args
    return run_trial(config, trial)


@dataclass
class ExperimentResult:
    config: ScenarioConfig
    trials: list[dict[str, TrialSeries]]

    def stack(self, label: str, metric: str) -> np.ndarray:
        return np.stack([getattr(t[label], metric) for t in self.trials])

    def aggregate(self, label: str, metric: str) -> tuple[np.ndarray, np.ndarray]:
        return aggregate_trials([getattr(t[label], metric) for t in self.trials])


def run_experiment(config: ScenarioConfig, parallel: bool = False, workers: int | None = None) -> ExperimentResult:
    jobs = [(config, k) for k in range(config.trials)]
    log.info("running %s: %d trials x %d policies (%s kernels)", config.name, config.trials, len(config.policies), kernels.BACKEND)
    if parallel and config.trials > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            trials = list(pool.map(_run_trial_job, jobs))
    else:
        trials = [_run_trial_job(j) for j in jobs]
    return ExperimentResult(config, trials)


def aggregate_trials(series: Sequence[np.ndarray]) -> tuple[np.ndarray, np.ndarray]:
    """Element-wise mean and standard error (zero for a single trial)."""
    if not series:
        raise ValueError("need at least one series")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise ValueError(f"series lengths differ: {sorted(lengths)}")
    data = np.stack([np.asarray(s, dtype=float) for s in series])
    mean = data.mean(axis=0)
    if data.shape[0] == 1:
        return mean, np.zeros_like(mean)
    return mean, data.std(axis=0, ddof=1) / np.sqrt(data.shape[0])
