"""Round resolution, collision gating and regret accounting.

Arms are numbered 1..M and players 1..N. An action is an int: an arm index,
or ``REST`` (0) for a deliberate no-transmit step.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

REST = 0

SINGLE_BEST = "single-best"
TOP_N_SUM = "top-n-sum"
COMPARATOR_MODES = (SINGLE_BEST, TOP_N_SUM)


class ConfigurationError(ValueError):
    """Raised for inconsistent dimensions, arm indices or parameters."""


def clip_unit(x: float) -> float:
    return min(1.0, max(0.0, x))


@dataclass(frozen=True)
class CollisionReport:
    colliding: frozenset[int]
    flags: tuple[int, ...]

    def __contains__(self, player: int) -> bool:
        return player in self.colliding


@dataclass(frozen=True)
class RoundOutcome:
    t: int
    actions: tuple[int, ...]
    collisions: CollisionReport
    rewards: tuple[float, ...]

    @property
    def total_reward(self) -> float:
        return sum(self.rewards)


def find_collisions(actions: Sequence[int]) -> CollisionReport:
    counts = Counter(a for a in actions if a != REST)
    flags = tuple(int(a != REST and counts[a] > 1) for a in actions)
    colliding = frozenset(i + 1 for i, f in enumerate(flags) if f)
    return CollisionReport(colliding, flags)


def resolve_round(
    actions: Sequence[int],
    sampler: Callable[[int, int, int], float],
    t: int,
    n_arms: int | None = None,
) -> RoundOutcome:
    """Resolve one synchronous step.

    ``sampler(arm, player, t)`` returns the raw reward draw for a player alone
    on ``arm``; it is only called for non-colliding players and the result is
    clamped to [0, 1].
    """
    for a in actions:
        if a != REST and (a < 1 or (n_arms is not None and a > n_arms)):
            raise ConfigurationError(f"invalid arm index {a}")
    report = find_collisions(actions)
    rewards = tuple(
        0.0 if a == REST or report.flags[i] else clip_unit(sampler(a, i + 1, t))
        for i, a in enumerate(actions)
    )
    return RoundOutcome(t, tuple(actions), report, rewards)


def comparator_series(means: np.ndarray, n_players: int, mode: str = TOP_N_SUM) -> np.ndarray:
    """Per-step oracle reward for a (T, M) mean matrix."""
    if mode == SINGLE_BEST:
        return means.max(axis=1)
    if mode == TOP_N_SUM:
        return -np.sort(-means, axis=1)[:, :n_players].sum(axis=1)
    raise ConfigurationError(f"unknown comparator mode {mode!r}")


def oracle_comparator(schedule, t: int, mode: str = TOP_N_SUM, n_players: int = 1) -> float:
    """Oracle reward at step ``t`` (1-based) of a RewardSchedule."""
    row = schedule.means_at_step(t)
    return float(comparator_series(row[None, :], n_players, mode)[0])


def cumulative_regret(rewards: np.ndarray, comparator: np.ndarray) -> np.ndarray:
    """Realized regret after each step from a (T, N) reward matrix."""
    if rewards.shape[0] != comparator.shape[0]:
        raise ValueError(f"length mismatch: {rewards.shape[0]} rewards vs {comparator.shape[0]} comparator steps")
    return np.cumsum(comparator - rewards.sum(axis=1))


def regret_series(
    outcomes: Sequence[RoundOutcome],
    schedule,
    mode: str = TOP_N_SUM,
    n_players: int | None = None,
) -> np.ndarray:
    if len(outcomes) != schedule.horizon:
        raise ValueError(f"length mismatch: {len(outcomes)} outcomes for horizon {schedule.horizon}")
    if n_players is None:
        n_players = len(outcomes[0].actions) if outcomes else 1
    rewards = np.array([o.rewards for o in outcomes], dtype=float).reshape(len(outcomes), -1)
    comp = comparator_series(schedule.means_matrix(), n_players, mode)
    return cumulative_regret(rewards, comp)
