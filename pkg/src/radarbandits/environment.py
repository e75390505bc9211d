"""Pre-committed reward schedules, reward sampling and the reactive emitter.

Steps are 1-based in this module's public functions (``t = 1..T``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import REST, ConfigurationError, RoundOutcome, clip_unit

SHIFT_MEANS_BEFORE = (0.95, 1.0, 0.9, 0.3, 0.3)
SHIFT_MEANS_AFTER = (0.3, 0.3, 0.95, 1.0, 0.9)
DEFAULT_SIGMA = 0.05


@dataclass(frozen=True)
class RewardSchedule:
    """Piecewise-constant per-arm means over a finite horizon.

    ``starts[k]`` is the first step (1-based) of segment ``k`` and
    ``segment_means[k]`` its mean vector. The first segment starts at step 1.
    """

    horizon: int
    starts: tuple[int, ...]
    segment_means: tuple[tuple[float, ...], ...]
    noise: tuple[float, ...]
    _matrix: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.horizon < 1:
            raise ConfigurationError("horizon must be positive")
        if not self.starts or self.starts[0] != 1:
            raise ConfigurationError("first schedule segment must start at step 1")
        if list(self.starts) != sorted(set(self.starts)):
            raise ConfigurationError("segment starts must be strictly increasing")
        if self.starts[-1] > self.horizon:
            raise ConfigurationError("segment starts beyond the horizon")
        n_arms = len(self.segment_means[0])
        if n_arms < 2:
            raise ConfigurationError("need at least 2 arms")
        for means in self.segment_means:
            if len(means) != n_arms:
                raise ConfigurationError("every segment needs one mean per arm")
            if any(not 0.0 <= m <= 1.0 for m in means):
                raise ConfigurationError("means must lie in [0, 1]")
        if len(self.noise) != n_arms or any(s < 0 for s in self.noise):
            raise ConfigurationError("noise needs one nonnegative scale per arm")
        matrix = np.empty((self.horizon, n_arms))
        bounds = list(self.starts[1:]) + [self.horizon + 1]
        for start, stop, means in zip(self.starts, bounds, self.segment_means):
            matrix[start - 1 : stop - 1] = means
        matrix.setflags(write=False)
        object.__setattr__(self, "_matrix", matrix)

    @classmethod
    def from_segments(
        cls,
        horizon: int,
        segments: Iterable[tuple[int, Sequence[float]]],
        noise: float | Sequence[float] = DEFAULT_SIGMA,
    ) -> "RewardSchedule":
        segments = sorted(segments, key=lambda s: s[0])
        starts = tuple(int(s) for s, _ in segments)
        means = tuple(tuple(float(m) for m in v) for _, v in segments)
        n_arms = len(means[0]) if means else 0
        if np.isscalar(noise):
            noise = (float(noise),) * n_arms
        return cls(horizon, starts, means, tuple(float(s) for s in noise))

    @property
    def n_arms(self) -> int:
        return len(self.segment_means[0])

    @property
    def change_points(self) -> tuple[int, ...]:
        """Steps at which at least one arm mean differs from the previous step."""
        return tuple(
            s for s, prev, cur in zip(self.starts[1:], self.segment_means, self.segment_means[1:]) if prev != cur
        )

    def means_matrix(self) -> np.ndarray:
        """Read-only (T, M) array; row ``t - 1`` holds the means at step ``t``."""
        return self._matrix

    def means_at_step(self, t: int) -> np.ndarray:
        self._check_step(t)
        return self._matrix[t - 1]

    def _check_step(self, t: int) -> None:
        if not 1 <= t <= self.horizon:
            raise ValueError(f"step {t} outside horizon 1..{self.horizon}")


def shifting_schedule(
    cpi_count: int = 500,
    pri_per_cpi: int = 50,
    shift_after_cpi: int = 200,
    sigma: float = DEFAULT_SIGMA,
) -> RewardSchedule:
    """The two-segment schedule used for the radar experiments."""
    horizon = cpi_count * pri_per_cpi
    return RewardSchedule.from_segments(
        horizon,
        [(1, SHIFT_MEANS_BEFORE), (shift_after_cpi * pri_per_cpi + 1, SHIFT_MEANS_AFTER)],
        sigma,
    )


@dataclass(frozen=True)
class ReactiveEmitter:
    """Interferer that occupies, at step t, the arms tracked players used at t-1."""

    tracked: frozenset[int] = frozenset({1})
    suppressed: frozenset[int] = frozenset()

    def advance(self, last_round: RoundOutcome) -> "ReactiveEmitter":
        arms = frozenset(
            a for i, a in enumerate(last_round.actions) if (i + 1) in self.tracked and a != REST
        )
        return ReactiveEmitter(self.tracked, arms)


def advance_emitter(state: ReactiveEmitter, last_round: RoundOutcome) -> ReactiveEmitter:
    return state.advance(last_round)


def mean_at(schedule: RewardSchedule, arm: int, t: int, emitter: ReactiveEmitter | None = None) -> float:
    if not 1 <= arm <= schedule.n_arms:
        raise ConfigurationError(f"invalid arm index {arm}")
    row = schedule.means_at_step(t)
    if emitter is not None and arm in emitter.suppressed:
        return 0.0
    return float(row[arm - 1])


def sample_reward(mean: float, sigma: float, rng: np.random.Generator) -> float:
    """Gaussian draw around ``mean`` clamped to the unit interval."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return clip_unit(mean)
    return clip_unit(mean + sigma * rng.standard_normal())


@dataclass(frozen=True)
class SinrMap:
    """Affine SINR (dB) to mean-reward map ``mean = alpha * (sinr + beta)``."""

    alpha: float = 0.05
    beta: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError("SINR map slope alpha must be positive")

    def to_mean(self, sinr_db: float) -> float:
        return clip_unit(self.alpha * (sinr_db + self.beta))

    def to_sinr(self, mean: float) -> float:
        return mean / self.alpha - self.beta


def sinr_to_mean(sinr_map: SinrMap, sinr_db: float) -> float:
    return sinr_map.to_mean(sinr_db)


def mean_to_sinr(sinr_map: SinrMap, mean: float) -> float:
    return sinr_map.to_sinr(mean)
