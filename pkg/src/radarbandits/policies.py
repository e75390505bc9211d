"""Decentralized per-node sub-band selection policies.

Every policy exposes ``select(u) -> action`` and
``observe(arm, reward, collided)``. ``u`` is the node's private vector of
uniform draws for the current step (at least M entries); a policy never sees
another node's state. Randomness is consumed through ``u`` only, which fixes
the draw-to-decision mapping and keeps the compiled kernel in lockstep.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .core import REST, ConfigurationError

EXPLORATION = "exploration"
EXPLOITATION = "exploitation"
FIXED = "fixed"

DEFAULT_EXPLORE_LEN = 3000
DEFAULT_SUBBLOCKS = 10
DEFAULT_ETA = 0.05
DEFAULT_FORGETTING = 0.999
DEFAULT_IMPLICIT_EXPLORATION = 0.05


def pick(u: float, n: int) -> int:
    """Map a uniform draw in [0, 1) to an index in 0..n-1."""
    k = int(u * n)
    return k if k < n else n - 1


class SenseAndAvoid:
    """Stay on the current arm; after a collision jump uniformly to another arm."""

    def __init__(self, n_arms: int):
        if n_arms < 2:
            raise ConfigurationError("Sense & Avoid needs at least 2 arms")
        self.n_arms = n_arms
        self.arm: int | None = None
        self._collided = False

    def select(self, u: Sequence[float]) -> int:
        if self.arm is None:
            self.arm = pick(u[0], self.n_arms) + 1
        elif self._collided:
            k = pick(u[0], self.n_arms - 1) + 1
            self.arm = k if k < self.arm else k + 1
        return self.arm

    def observe(self, arm: int, reward: float, collided: bool) -> None:
        self._collided = bool(collided)


def estimate_player_count(collision_count: int, explore_len: int, n_arms: int) -> int:
    """Number of players inferred from the collision rate under uniform exploration."""
    if explore_len <= 0:
        raise ValueError("exploration length must be positive")
    if not 0 <= collision_count <= explore_len:
        raise ValueError("collision count must lie in [0, exploration length]")
    if collision_count == explore_len:
        return n_arms
    ratio = math.log((explore_len - collision_count) / explore_len) / math.log(1.0 - 1.0 / n_arms)
    n_hat = int(math.floor(ratio + 0.5)) + 1
    return max(1, min(n_arms, n_hat))


def ranked_arms(means: Sequence[float]) -> list[int]:
    """Arms (1-based) by decreasing mean; ties go to the lower index."""
    return sorted(range(1, len(means) + 1), key=lambda a: (-means[a - 1], a))


class MusicalChairs:
    """Uniform exploration, then random seating among the estimated best arms."""

    def __init__(self, n_arms: int, explore_len: int = DEFAULT_EXPLORE_LEN):
        if explore_len < 1:
            raise ConfigurationError("exploration length must be positive")
        self.n_arms = n_arms
        self.explore_len = explore_len
        self.phase = EXPLORATION
        self.sums = [0.0] * n_arms
        self.counts = [0] * n_arms
        self.collisions = 0
        self.steps = 0
        self.n_hat: int | None = None
        self.best_arms: tuple[int, ...] = ()
        self.fixed_arm: int | None = None

    def estimated_means(self) -> list[float]:
        return [s / c if c else 0.0 for s, c in zip(self.sums, self.counts)]

    def select(self, u: Sequence[float]) -> int:
        if self.phase == EXPLORATION:
            return pick(u[0], self.n_arms) + 1
        if self.phase == EXPLOITATION:
            return self.best_arms[pick(u[0], len(self.best_arms))]
        return self.fixed_arm

    def observe(self, arm: int, reward: float, collided: bool) -> None:
        if self.phase == EXPLORATION:
            if collided:
                self.collisions += 1
            else:
                self.sums[arm - 1] += reward
                self.counts[arm - 1] += 1
            self.steps += 1
            if self.steps == self.explore_len:
                self._end_exploration()
        elif self.phase == EXPLOITATION and not collided:
            self.fixed_arm = arm
            self.phase = FIXED

    def _end_exploration(self) -> None:
        self.n_hat = estimate_player_count(self.collisions, self.explore_len, self.n_arms)
        self.best_arms = tuple(ranked_arms(self.estimated_means())[: self.n_hat])
        self.phase = EXPLOITATION


@dataclass(frozen=True)
class BlockSchedule:
    steps_per_subblock: int
    subblocks_per_block: int

    @property
    def block_len(self) -> int:
        return self.steps_per_subblock * self.subblocks_per_block


def block_schedule(n_arms: int, n_players: int, subblocks: int) -> BlockSchedule:
    if n_players > n_arms:
        raise ConfigurationError(f"{n_players} players cannot share {n_arms} arms without duplication")
    if subblocks <= n_players - 1:
        raise ConfigurationError(
            f"a block needs more than N-1 = {n_players - 1} sub-blocks, got {subblocks}"
        )
    return BlockSchedule(n_arms, subblocks)


def theoretical_block_size(n_nodes: int, n_subbands: int, horizon: float) -> float:
    """Horizon-tuned block length (n_nodes**2 * n_subbands * T / ln n_subbands) ** (1/3).

    Documentation helper only; simulations take the sub-block count from
    configuration.
    """
    return (n_nodes**2 * n_subbands * horizon / math.log(n_subbands)) ** (1.0 / 3.0)


def sample_meta_arm(weights: Sequence[float], n: int, u: Sequence[float]) -> tuple[int, ...]:
    """Draw ``n`` distinct arms in sequence, each proportional to its weight."""
    if n > len(weights):
        raise ConfigurationError("meta-arm longer than the number of arms")
    remaining = list(range(len(weights)))
    chosen = []
    for k in range(n):
        total = 0.0
        for a in remaining:
            total += weights[a]
        target = u[k] * total
        acc = 0.0
        choice = remaining[-1]
        for a in remaining:
            acc += weights[a]
            if target < acc:
                choice = a
                break
        chosen.append(choice + 1)
        remaining.remove(choice)
    return tuple(chosen)


class ExpWeightsArmLearner:
    """Per-arm exponential weights over the coordinator's own block rewards.

    Losses are importance weighted by the probability that the arm was the
    coordinator's own pick, with implicit exploration ``ix`` in the
    denominator. Log-weights shrink toward zero by ``decay`` once per block so
    stale preferences fade after the environment shifts.
    """

    def __init__(self, n_arms: int, eta: float = DEFAULT_ETA, decay: float = 1.0, ix: float = DEFAULT_IMPLICIT_EXPLORATION):
        if eta <= 0 or not 0 < decay <= 1 or ix < 0:
            raise ConfigurationError("need eta > 0, 0 < decay <= 1 and ix >= 0")
        self.eta = eta
        self.decay_factor = decay
        self.ix = ix
        self.log_weights = [0.0] * n_arms

    def weights(self) -> list[float]:
        top = max(self.log_weights)
        return [math.exp(x - top) for x in self.log_weights]

    def sample(self, n: int, u: Sequence[float]) -> tuple[tuple[int, ...], float]:
        w = self.weights()
        meta = sample_meta_arm(w, n, u)
        total = 0.0
        for x in w:
            total += x
        return meta, w[meta[0] - 1] / total

    def update(self, arm: int, mean_reward: float, prob: float) -> None:
        self.log_weights[arm - 1] -= self.eta * (1.0 - mean_reward) / (prob + self.ix)

    def decay(self) -> None:
        self.log_weights = [x * self.decay_factor for x in self.log_weights]


class Coordinator:
    """Rank-1 role: signal the meta-arm through deliberate collisions, then play."""

    def __init__(self, schedule: BlockSchedule, n_players: int, learner: ExpWeightsArmLearner):
        self.schedule = schedule
        self.n_players = n_players
        self.learner = learner
        self.meta_arm: tuple[int, ...] = ()
        self.blocks = 0
        self._p_own = 1.0
        self._own_sum = 0.0
        self._own_count = 0
        self._latched = False

    def select(self, pos: int, u: Sequence[float]) -> int:
        sub, step = divmod(pos, self.schedule.steps_per_subblock)
        if pos == 0:
            self._start_block(u)
        if step == 0:
            self._latched = False
        if sub < self.n_players - 1 and not self._latched:
            return self.meta_arm[sub + 1]
        return self.meta_arm[0]

    def observe(self, pos: int, arm: int, reward: float, collided: bool) -> None:
        if collided and pos // self.schedule.steps_per_subblock < self.n_players - 1:
            self._latched = True
        if arm == self.meta_arm[0]:
            self._own_sum += reward
            self._own_count += 1

    def _start_block(self, u: Sequence[float]) -> None:
        if self.blocks > 0:
            if self._own_count:
                self.learner.update(self.meta_arm[0], self._own_sum / self._own_count, self._p_own)
            self.learner.decay()
        self.meta_arm, self._p_own = self.learner.sample(self.n_players, u)
        self._own_sum = 0.0
        self._own_count = 0
        self.blocks += 1


class Follower:
    """Rank-k role: find the signalled arm during sub-block k-1, then play it."""

    def __init__(self, rank: int, schedule: BlockSchedule, n_players: int):
        if not 2 <= rank <= n_players:
            raise ConfigurationError(f"follower rank must be in 2..{n_players}")
        self.rank = rank
        self.schedule = schedule
        self.n_players = n_players
        self.assigned: int | None = None
        self.latched = False
        self.failures = 0

    def select(self, pos: int, u: Sequence[float]) -> int:
        sub, step = divmod(pos, self.schedule.steps_per_subblock)
        if pos == 0:
            self.assigned = None
            self.latched = False
        if sub < self.n_players - 1:
            if sub == self.rank - 2:
                return self.assigned if self.latched else step + 1
            return REST
        if self.assigned is None:
            if sub == self.n_players - 1 and step == 0:
                self.failures += 1
            return REST
        return self.assigned

    def observe(self, pos: int, arm: int, reward: float, collided: bool) -> None:
        if collided and not self.latched and pos // self.schedule.steps_per_subblock == self.rank - 2:
            self.latched = True
            self.assigned = arm


class CoordinateAndPlay:
    """Musical Chairs warm-up followed by a coordinator or follower role."""

    def __init__(
        self,
        n_arms: int,
        explore_len: int = DEFAULT_EXPLORE_LEN,
        subblocks: int = DEFAULT_SUBBLOCKS,
        eta: float = DEFAULT_ETA,
        forgetting: float = DEFAULT_FORGETTING,
        ix: float = DEFAULT_IMPLICIT_EXPLORATION,
    ):
        self.n_arms = n_arms
        self.subblocks = subblocks
        self.eta = eta
        self.forgetting = forgetting
        self.ix = ix
        self.warmup = MusicalChairs(n_arms, explore_len)
        self.role: Coordinator | Follower | None = None
        self._pos = 0

    def begin(self, rank: int, n_players: int) -> None:
        schedule = block_schedule(self.n_arms, n_players, self.subblocks)
        if rank == 1:
            learner = ExpWeightsArmLearner(
                self.n_arms, self.eta, self.forgetting**schedule.block_len, self.ix
            )
            self.role = Coordinator(schedule, n_players, learner)
        else:
            self.role = Follower(rank, schedule, n_players)
        self._pos = 0

    @property
    def failures(self) -> int:
        return getattr(self.role, "failures", 0)

    def select(self, u: Sequence[float]) -> int:
        if self.role is None:
            return self.warmup.select(u)
        return self.role.select(self._pos, u)

    def observe(self, arm: int, reward: float, collided: bool) -> None:
        if self.role is None:
            self.warmup.observe(arm, reward, collided)
            return
        self.role.observe(self._pos, arm, reward, collided)
        self._pos = (self._pos + 1) % self.role.schedule.block_len


def pooled_means(warmups: Sequence[MusicalChairs]) -> list[float]:
    """Network-wide arm means pooled over every node's exploration statistics."""
    n_arms = warmups[0].n_arms
    means = []
    for a in range(n_arms):
        s = 0.0
        c = 0
        for w in warmups:
            s += w.sums[a]
            c += w.counts[a]
        means.append(s / c if c else 0.0)
    return means


def assign_ranks(fixed_arms: Sequence[int | None], arm_means: Sequence[float]) -> tuple[int, ...]:
    """Rank nodes by the network-wide mean of their fixed arm (rank 1 = best)."""
    if any(a is None for a in fixed_arms) or len(set(fixed_arms)) != len(fixed_arms):
        raise ConfigurationError("rank assignment needs distinct fixed arms on every node")
    order = sorted(range(len(fixed_arms)), key=lambda i: (-arm_means[fixed_arms[i] - 1], fixed_arms[i]))
    ranks = [0] * len(fixed_arms)
    for r, i in enumerate(order, start=1):
        ranks[i] = r
    return tuple(ranks)


def warmup_ready(warmups: Sequence[MusicalChairs]) -> bool:
    arms = [w.fixed_arm for w in warmups]
    return all(w.phase == FIXED for w in warmups) and len(set(arms)) == len(arms)
