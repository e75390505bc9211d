import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radarbandits.core import (
    REST,
    SINGLE_BEST,
    TOP_N_SUM,
    ConfigurationError,
    RoundOutcome,
    comparator_series,
    cumulative_regret,
    find_collisions,
    oracle_comparator,
    regret_series,
    resolve_round,
)
from radarbandits.environment import SHIFT_MEANS_BEFORE, RewardSchedule

MEANS = SHIFT_MEANS_BEFORE


def mean_sampler(means):
    return lambda arm, player, t: means[arm - 1]


def brute_force_round(actions, means):
    """Independent oracle: pairwise comparison, no Counter."""
    n = len(actions)
    colliding = set()
    for i in range(n):
        for j in range(n):
            if i != j and actions[i] != REST and actions[i] == actions[j]:
                colliding.add(i + 1)
    rewards = []
    for i, a in enumerate(actions):
        rewards.append(0.0 if a == REST or (i + 1) in colliding else min(1.0, max(0.0, means[a - 1])))
    return colliding, rewards


def test_single_player_never_collides():
    out = resolve_round([2], mean_sampler(MEANS), 1)
    assert out.collisions.colliding == frozenset()
    assert out.rewards == (1.0,)


def test_shared_arm_and_rest_all_zero():
    out = resolve_round([3, 3, REST], mean_sampler(MEANS), 1)
    assert out.collisions.colliding == {1, 2}
    assert out.collisions.flags == (1, 1, 0)
    assert out.rewards == (0.0, 0.0, 0.0)


def test_noise_free_distinct_arms_get_means():
    out = resolve_round([1, 2, 3], mean_sampler(MEANS), 1)
    assert out.rewards == (0.95, 1.0, 0.9)


def test_invalid_arm_is_configuration_error():
    with pytest.raises(ConfigurationError):
        resolve_round([6, 1], mean_sampler(MEANS), 1, n_arms=5)
    with pytest.raises(ConfigurationError):
        resolve_round([-1], mean_sampler(MEANS), 1)


def test_rewards_are_clamped():
    out = resolve_round([1, 2], lambda a, p, t: 1.7 if a == 1 else -0.4, 1)
    assert out.rewards == (1.0, 0.0)


@pytest.mark.parametrize("n_players,n_arms", [(1, 2), (2, 3), (3, 4), (3, 3), (2, 4)])
def test_exhaustive_against_brute_force(n_players, n_arms):
    means = np.linspace(0.2, 0.9, n_arms).tolist()
    for profile in itertools.product(range(n_arms + 1), repeat=n_players):
        out = resolve_round(list(profile), mean_sampler(means), 1, n_arms)
        colliding, rewards = brute_force_round(profile, means)
        assert out.collisions.colliding == colliding
        assert list(out.rewards) == rewards
        assert all(f == (i + 1 in colliding) for i, f in enumerate(out.collisions.flags))


def test_oracle_comparator_examples():
    s = RewardSchedule.from_segments(10, [(1, MEANS)])
    assert oracle_comparator(s, 1, SINGLE_BEST) == 1.0
    assert oracle_comparator(s, 1, TOP_N_SUM, n_players=3) == pytest.approx(2.85)
    flat = RewardSchedule.from_segments(10, [(1, [0.5] * 5)])
    assert oracle_comparator(flat, 4, TOP_N_SUM, n_players=3) == pytest.approx(1.5)


def _outcomes_for(actions_seq, means):
    return [resolve_round(a, mean_sampler(means), t + 1) for t, a in enumerate(actions_seq)]


def test_omniscient_play_has_zero_regret():
    s = RewardSchedule.from_segments(20, [(1, MEANS), (11, MEANS[::-1])], noise=0.0)
    acts = []
    for t in range(1, 21):
        best = np.argsort(-s.means_at_step(t), kind="stable")[:3] + 1
        acts.append(list(best))
    outcomes = [
        resolve_round(a, lambda arm, p, t: s.means_at_step(t)[arm - 1], t + 1) for t, a in enumerate(acts)
    ]
    np.testing.assert_allclose(regret_series(outcomes, s, TOP_N_SUM, 3), 0.0, atol=1e-12)


def test_all_rest_regret_is_linear():
    T = 40
    s = RewardSchedule.from_segments(T, [(1, MEANS)], noise=0.0)
    outcomes = _outcomes_for([[REST] * 3] * T, MEANS)
    reg = regret_series(outcomes, s, TOP_N_SUM, 3)
    np.testing.assert_allclose(reg, 2.85 * np.arange(1, T + 1))


def test_regret_length_mismatch():
    s = RewardSchedule.from_segments(5, [(1, MEANS)])
    with pytest.raises(ValueError):
        regret_series(_outcomes_for([[1]] * 4, MEANS), s)
    with pytest.raises(ValueError):
        cumulative_regret(np.zeros((4, 1)), np.zeros(5))


profiles = st.lists(st.lists(st.integers(0, 4), min_size=3, max_size=3), min_size=1, max_size=30)


@settings(max_examples=60, deadline=None)
@given(profiles, st.lists(st.floats(0, 1), min_size=4, max_size=4))
def test_regret_telescopes_and_gates(acts, means):
    T = len(acts)
    s = RewardSchedule.from_segments(T, [(1, means)], noise=0.0)
    outcomes = _outcomes_for(acts, means)
    reg = regret_series(outcomes, s, TOP_N_SUM, 3)
    comp = comparator_series(s.means_matrix(), 3, TOP_N_SUM)
    prev = 0.0
    for t, o in enumerate(outcomes):
        assert reg[t] - prev == pytest.approx(comp[t] - o.total_reward, abs=1e-9)
        prev = reg[t]
        for i, a in enumerate(o.actions):
            assert 0.0 <= o.rewards[i] <= 1.0
            if a == REST or o.collisions.flags[i]:
                assert o.rewards[i] == 0.0
            elif a != REST:
                assert o.rewards[i] == means[a - 1]
    # top-N comparator with rewards in [0,1] and distinct arms: regret never decreases
    assert np.all(np.diff(np.concatenate([[0.0], reg])) >= -1e-12)


@given(st.lists(st.integers(0, 4), min_size=1, max_size=5))
def test_collision_symmetry(actions):
    rep = find_collisions(actions)
    for i, a in enumerate(actions):
        others = any(j != i and b == a for j, b in enumerate(actions))
        assert ((i + 1) in rep) == (a != REST and others)


def test_round_outcome_total():
    o = RoundOutcome(1, (1, 2), find_collisions((1, 2)), (0.25, 0.5))
    assert o.total_reward == 0.75
