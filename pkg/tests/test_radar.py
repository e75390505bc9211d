import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from radarbandits.core import REST
from radarbandits.environment import SinrMap
from radarbandits.harness.runner import track_positions
from radarbandits.radar import (
    CpiMeasurement,
    RadarScene,
    cpi_quality,
    cpi_summary,
    crlb_rmse,
    range_measurement,
    range_noise_std,
    target_position,
    target_track,
    trilaterate,
)

SCENE = RadarScene()
MAP = SinrMap(0.05, 0.0)


def exact(scene, pos, std=1.0):
    return [
        CpiMeasurement(i + 1, math.dist(pos, n), std, True) for i, n in enumerate(scene.node_positions)
    ]


def test_target_positions():
    assert target_position(SCENE, 1) == pytest.approx((0.7, 0.2))
    assert target_position(SCENE, 500) == pytest.approx((350.0, 100.0))
    assert target_position(SCENE, 250) == pytest.approx((175.0, 50.0))
    with pytest.raises(ValueError):
        target_position(SCENE, 0)
    with pytest.raises(ValueError):
        target_position(SCENE, 501)
    k = np.arange(1, 501)[:, None]
    np.testing.assert_allclose(target_track(SCENE), np.array([350.0, 100.0]) * k / 500)


def test_cpi_quality_examples():
    assert cpi_quality([1] * 50, [1.0] * 50, [0] * 50, MAP) == (pytest.approx(20.0), 1.0)
    assert cpi_quality([REST] * 50, [0.0] * 50, [0] * 50, MAP) == (None, 0.0)
    acts = [2] * 50
    rewards = [1.0] * 25 + [0.0] * 25
    collided = [0] * 25 + [1] * 25
    sinr, frac = cpi_quality(acts, rewards, collided, MAP)
    assert sinr == pytest.approx(20.0) and frac == 0.5


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_vectorised_summary_matches_scalar(seed):
    rng = np.random.default_rng(seed)
    T, N, P = 40, 3, 10
    actions = rng.integers(0, 4, size=(T, N))
    collided = ((rng.random((T, N)) < 0.3) & (actions != REST)).astype(np.int8)
    rewards = np.where((actions != REST) & (collided == 0), rng.random((T, N)), 0.0)
    sinr, frac = cpi_summary(actions, rewards, collided, P, MAP)
    for c in range(T // P):
        for i in range(N):
            sl = slice(c * P, (c + 1) * P)
            s, f = cpi_quality(actions[sl, i], rewards[sl, i], collided[sl, i], MAP)
            assert frac[c, i] == pytest.approx(f)
            if s is None:
                assert np.isnan(sinr[c, i])
            else:
                assert sinr[c, i] == pytest.approx(s)


def test_range_measurement():
    rng = np.random.default_rng(0)
    assert not range_measurement(SCENE, 1, (0, 0), 20.0, 0.0, rng).valid
    assert not range_measurement(SCENE, 1, (0, 0), None, 1.0, rng).valid
    hi = range_measurement(SCENE, 1, (0, 0), 200.0, 1.0, rng)
    assert hi.range == pytest.approx(500.0, abs=1e-6)
    # sigma0 = 50 and 20 dB gives a 5 m std
    assert range_noise_std(50.0, 20.0, 1.0) == pytest.approx(5.0)
    draws = np.array([range_measurement(SCENE, 1, (0, 0), 20.0, 1.0, rng).range for _ in range(20_000)])
    assert draws.mean() == pytest.approx(500.0, abs=0.15)
    assert draws.std() == pytest.approx(5.0, rel=0.03)


def test_noise_free_fix_recovers_target():
    est = trilaterate(SCENE, exact(SCENE, (175.0, 50.0)))
    assert math.dist(est.position, (175.0, 50.0)) < 1e-3


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 0.9), st.floats(0.05, 0.9))
def test_noise_free_inside_triangle(a, b):
    if a + b >= 1:
        return
    n = np.array(SCENE.node_positions)
    p = n[0] + a * (n[1] - n[0]) + b * (n[2] - n[0])
    est = trilaterate(SCENE, exact(SCENE, tuple(p)), truth=tuple(p))
    assert est.error < 1e-3


def test_single_node_gives_no_estimate():
    ms = exact(SCENE, (100.0, 100.0))
    ms = [ms[0], CpiMeasurement(2, None, None, False), CpiMeasurement(3, None, None, False)]
    assert trilaterate(SCENE, ms) is None


def test_two_measurements_use_prior():
    truth = (175.0, 50.0)
    ms = exact(SCENE, truth)[:2]
    est = trilaterate(SCENE, ms, prior=(170.0, 60.0))
    assert math.dist(est.position, truth) < 1e-3


def test_monte_carlo_rmse_near_crlb():
    rng = np.random.default_rng(77)
    truth = (175.0, 50.0)
    anchors = np.array(SCENE.node_positions)
    true_r = np.linalg.norm(anchors - truth, axis=1)
    errs = []
    for _ in range(1000):
        r = true_r + 5.0 * rng.standard_normal(3)
        ms = [CpiMeasurement(i + 1, r[i], 5.0, True) for i in range(3)]
        errs.append(trilaterate(SCENE, ms, prior=truth, truth=truth).error)
    rmse = math.sqrt(np.mean(np.square(errs)))
    bound = crlb_rmse(anchors, truth, [5.0] * 3)
    assert bound / 3 < rmse < 3 * bound


def test_higher_sinr_never_worse_on_paired_draws():
    rng = np.random.default_rng(5)
    truth = (120.0, 80.0)
    anchors = np.array(SCENE.node_positions)
    true_r = np.linalg.norm(anchors - truth, axis=1)
    z = rng.standard_normal((400, 3))
    means = []
    for sinr in (3.0, 8.0, 14.0, 20.0):
        std = float(range_noise_std(50.0, sinr, 1.0))
        errs = [
            trilaterate(SCENE, [CpiMeasurement(i + 1, true_r[i] + std * zz[i], std, True) for i in range(3)], truth, truth).error
            for zz in z
        ]
        means.append(np.mean(errs))
    assert all(a >= b for a, b in zip(means, means[1:]))


def test_all_collided_cpis_hold_estimate_and_error_grows():
    scene = RadarScene(cpi_count=20, pri_per_cpi=5)
    T, N = 100, 3
    actions = np.tile(np.array([1, 2, 3], dtype=np.int8), (T, 1))
    collided = np.zeros((T, N), dtype=np.int8)
    collided[40:75] = 1  # CPIs 9..15 fully collided
    rewards = np.where(collided == 1, 0.0, 1.0)
    est, err, fitted = track_positions(scene, actions, rewards, collided, np.zeros((20, N)))
    assert list(fitted[8:15]) == [0] * 7 and fitted[7] == 1 and fitted[15] == 1
    assert np.all(est[8:15] == est[7])
    assert np.all(np.diff(err[7:15]) > 0)
    assert err[15] < 1e-3
