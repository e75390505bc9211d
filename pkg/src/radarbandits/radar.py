"""Radar side of the simulation: geometry, per-CPI measurement quality,
range-only measurements and least-squares position fusion.

Geometry is in meters, SINR in dB.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import REST
from .environment import SinrMap

DEFAULT_NODES = ((0.0, 500.0), (250.0, -100.0), (500.0, 500.0))
DEFAULT_TARGET_START = (0.0, 0.0)
DEFAULT_TARGET_END = (350.0, 100.0)
DEFAULT_SIGMA0 = 50.0
MAX_ITER = 50
TOLERANCE = 1e-3


@dataclass(frozen=True)
class RadarScene:
    node_positions: tuple[tuple[float, float], ...] = DEFAULT_NODES
    target_start: tuple[float, float] = DEFAULT_TARGET_START
    target_end: tuple[float, float] = DEFAULT_TARGET_END
    cpi_count: int = 500
    pri_per_cpi: int = 50
    sinr_map: SinrMap = field(default_factory=SinrMap)
    sigma0: float = DEFAULT_SIGMA0

    def __post_init__(self):
        if len(self.node_positions) < 3:
            warnings.warn("fewer than 3 nodes: 2-D trilateration is ambiguous", stacklevel=2)
        if self.cpi_count < 1 or self.pri_per_cpi < 1:
            raise ValueError("CPI and PRI counts must be positive")
        if self.sigma0 <= 0:
            raise ValueError("sigma0 must be positive")

    @property
    def anchors(self) -> np.ndarray:
        return np.asarray(self.node_positions, dtype=float)

    @property
    def centroid(self) -> tuple[float, float]:
        c = self.anchors.mean(axis=0)
        return float(c[0]), float(c[1])


@dataclass(frozen=True)
class CpiMeasurement:
    node: int
    range: float | None
    noise_std: float | None
    valid: bool


@dataclass(frozen=True)
class TrackEstimate:
    position: tuple[float, float]
    error: float
    cpi_index: int


def target_position(scene: RadarScene, cpi_index: int) -> tuple[float, float]:
    """Constant-velocity straight track; CPI ``cpi_count`` sits on the end waypoint."""
    if not 1 <= cpi_index <= scene.cpi_count:
        raise ValueError(f"CPI {cpi_index} outside 1..{scene.cpi_count}")
    f = cpi_index / scene.cpi_count
    (x0, y0), (x1, y1) = scene.target_start, scene.target_end
    return x0 + (x1 - x0) * f, y0 + (y1 - y0) * f


def target_track(scene: RadarScene) -> np.ndarray:
    f = np.arange(1, scene.cpi_count + 1) / scene.cpi_count
    start = np.asarray(scene.target_start, dtype=float)
    end = np.asarray(scene.target_end, dtype=float)
    return start + (end - start) * f[:, None]


def cpi_quality(
    actions: Sequence[int], rewards: Sequence[float], collided: Sequence[int], sinr_map: SinrMap
) -> tuple[float | None, float]:
    """Effective SINR (dB) over one node's PRIs in a CPI, and its clean-pulse fraction.

    Clean pulses are those where the node transmitted without colliding.
    Returns ``(None, 0.0)`` when there were none.
    """
    clean = [r for a, r, c in zip(actions, rewards, collided) if a != REST and not c]
    if not clean:
        return None, 0.0
    mean = min(1.0, max(0.0, sum(clean) / len(clean)))
    return sinr_map.to_sinr(mean), len(clean) / len(actions)


def cpi_summary(
    actions: np.ndarray, rewards: np.ndarray, collided: np.ndarray, pri_per_cpi: int, sinr_map: SinrMap
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``cpi_quality`` over (T, N) arrays -> (C, N) SINR (nan if none) and fractions."""
    T, N = actions.shape
    C = T // pri_per_cpi
    clean = ((actions != REST) & (collided == 0))[: C * pri_per_cpi].reshape(C, pri_per_cpi, N)
    r = rewards[: C * pri_per_cpi].reshape(C, pri_per_cpi, N)
    n_clean = clean.sum(axis=1)
    total = np.where(clean, r, 0.0).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.clip(total / n_clean, 0.0, 1.0)
    sinr = np.where(n_clean > 0, mean / sinr_map.alpha - sinr_map.beta, np.nan)
    return sinr, n_clean / pri_per_cpi


def range_noise_std(sigma0: float, sinr_db, clean_fraction):
    """Range error std shrinking with integrated SNR: sigma0 / sqrt(fraction * SINR_linear)."""
    return sigma0 / np.sqrt(clean_fraction * 10.0 ** (np.asarray(sinr_db) / 10.0))


def range_measurement(
    scene: RadarScene,
    node: int,
    true_target_pos: Sequence[float],
    effective_sinr_db: float | None,
    clean_pulse_fraction: float,
    rng: np.random.Generator,
) -> CpiMeasurement:
    if effective_sinr_db is None or clean_pulse_fraction <= 0:
        return CpiMeasurement(node, None, None, False)
    nx, ny = scene.node_positions[node - 1]
    true_range = math.hypot(true_target_pos[0] - nx, true_target_pos[1] - ny)
    std = float(range_noise_std(scene.sigma0, effective_sinr_db, clean_pulse_fraction))
    return CpiMeasurement(node, true_range + std * rng.standard_normal(), std, True)


def _cost(x, y, anchors, ranges, stds) -> float:
    total = 0.0
    for (ax, ay), r, s in zip(anchors, ranges, stds):
        dx = x - ax
        dy = y - ay
        e = (math.sqrt(dx * dx + dy * dy) - r) / s
        total += e * e
    return total


def gauss_newton(
    anchors: Sequence[Sequence[float]],
    ranges: Sequence[float],
    stds: Sequence[float],
    x: float,
    y: float,
    max_iter: int = MAX_ITER,
    tol: float = TOLERANCE,
) -> tuple[float, float]:
    """Weighted range-only least squares from ``(x, y)`` with step halving."""
    cost = _cost(x, y, anchors, ranges, stds)
    for _ in range(max_iter):
        a11 = a12 = a22 = g1 = g2 = 0.0
        for (ax, ay), r, s in zip(anchors, ranges, stds):
            dx = x - ax
            dy = y - ay
            d = math.sqrt(dx * dx + dy * dy)
            if d < 1e-9:
                continue
            e = (d - r) / s
            jx = dx / (d * s)
            jy = dy / (d * s)
            a11 += jx * jx
            a12 += jx * jy
            a22 += jy * jy
            g1 += jx * e
            g2 += jy * e
        tr = a11 + a22
        if tr == 0.0:
            break
        det = a11 * a22 - a12 * a12
        if det <= 1e-12 * tr * tr:
            a11 += 1e-6 * tr
            a22 += 1e-6 * tr
            det = a11 * a22 - a12 * a12
        sx = -(a22 * g1 - a12 * g2) / det
        sy = -(a11 * g2 - a12 * g1) / det
        step = 1.0
        improved = False
        for _ in range(30):
            nx = x + step * sx
            ny = y + step * sy
            new_cost = _cost(nx, ny, anchors, ranges, stds)
            if new_cost <= cost:
                improved = True
                break
            step *= 0.5
        if not improved:
            break
        x, y, cost = nx, ny, new_cost
        if step * math.sqrt(sx * sx + sy * sy) < tol:
            break
    return x, y


def trilaterate(
    scene: RadarScene,
    measurements: Sequence[CpiMeasurement],
    prior: Sequence[float] | None = None,
    truth: Sequence[float] | None = None,
    cpi_index: int = 0,
) -> TrackEstimate | None:
    """Fuse valid range measurements into a position; None with fewer than 2."""
    valid = [m for m in measurements if m.valid]
    if len(valid) < 2:
        return None
    x0, y0 = prior if prior is not None else scene.centroid
    anchors = [scene.node_positions[m.node - 1] for m in valid]
    x, y = gauss_newton(anchors, [m.range for m in valid], [m.noise_std for m in valid], float(x0), float(y0))
    error = math.hypot(x - truth[0], y - truth[1]) if truth is not None else 0.0
    return TrackEstimate((x, y), error, cpi_index)


def crlb_rmse(anchors: np.ndarray, target: Sequence[float], stds: Sequence[float]) -> float:
    """Linearised position RMSE bound sqrt(trace((H^T W H)^-1)) for range-only fixes."""
    anchors = np.asarray(anchors, dtype=float)
    diff = np.asarray(target, dtype=float) - anchors
    H = diff / np.linalg.norm(diff, axis=1, keepdims=True)
    W = np.diag(1.0 / np.asarray(stds, dtype=float) ** 2)
    return float(np.sqrt(np.trace(np.linalg.inv(H.T @ W @ H))))
