"""Evaluation: Jensen-Shannon divergence between sample sets and the three
downlink-rate schemes (trained-model-based, pilot-overhead baseline,
perfect-CSI upper bound)."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import gan
from .channel import ChannelSample, true_gain
from .errors import ConfigError, DomainError


@dataclass(frozen=True)
class HistogramBinning:
    """Per-dimension histogram over the normalized sample cube."""

    bins_per_dim: int = 16
    low: float = -1.0
    high: float = 1.0
    pseudocount: float = 1e-9

    def __post_init__(self):
        if self.bins_per_dim < 2:
            raise ConfigError("need at least two bins per dimension")
        if not self.high > self.low:
            raise ConfigError("bad binning range")


def _histogram(samples, binning, dims):
    samples = np.clip(np.asarray(samples, dtype=np.float64),
                      binning.low, binning.high)
    edges = [np.linspace(binning.low, binning.high, binning.bins_per_dim + 1)] * dims
    hist, _ = np.histogramdd(samples, bins=edges)
    hist = hist.ravel() + binning.pseudocount
    return hist / hist.sum()


def jsd(samples_p, samples_q, binning=HistogramBinning()):
    """Histogram JSD in nats; symmetric, bounded by ln 2."""
    p = np.asarray(samples_p)
    q = np.asarray(samples_q)
    if len(p) == 0 or len(q) == 0:
        raise DomainError("JSD needs non-empty sample sets")
    if p.ndim != 2 or q.ndim != 2 or p.shape[1] != q.shape[1]:
        raise DomainError("sample sets must share one 2-D shape")
    hp = _histogram(p, binning, p.shape[1])
    hq = _histogram(q, binning, q.shape[1])
    m = 0.5 * (hp + hq)
    kl_pm = float(np.sum(hp * np.log(hp / m)))
    kl_qm = float(np.sum(hq * np.log(hq / m)))
    return 0.5 * (kl_pm + kl_qm)


@dataclass(frozen=True)
class RateEvalConfig:
    bandwidth_hz: float = 50e6
    power_w: float = 1.0
    noise_w: float = 1e-13
    coherence_block_s: float = 1.0
    pilot_overhead_s: float = 0.12
    ue_density_per_m2: float = 0.005

    def __post_init__(self):
        for name in ("bandwidth_hz", "power_w", "noise_w",
                     "coherence_block_s", "ue_density_per_m2"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if not (0 <= self.pilot_overhead_s < self.coherence_block_s):
            raise ConfigError("pilot overhead must be below the block length")


def sample_placements(scene, time_window, cfg, seed):
    """Seeded UE positions over the whole scene and query times."""
    b = scene.bounds
    area = (b.x_max - b.x_min) * (b.y_max - b.y_min)
    count = max(1, int(round(cfg.ue_density_per_m2 * area)))
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x9E51]))
    xs = rng.uniform(b.x_min, b.x_max, count)
    ys = rng.uniform(b.y_min, b.y_max, count)
    ts = rng.uniform(time_window[0], time_window[1], count)
    return [((x, y, 0.0), t) for x, y, t in zip(xs, ys, ts)]


def serving_region(scene, ue_pos):
    """Index of the disjoint service region containing the UE."""
    for idx, region in enumerate(scene.regions):
        if region.contains(ue_pos[0], ue_pos[1]):
            return idx
    raise DomainError(f"UE {ue_pos[:2]} outside every service region")


def region_hover_position(scene, region_idx):
    r = scene.regions[region_idx]
    return (0.5 * (r.x_min + r.x_max), 0.5 * (r.y_min + r.y_max),
            scene.uav_altitude)


def _shannon(mag, geometry, cfg):
    snr = (cfg.power_w * mag * mag
           * geometry.tx_antennas * geometry.rx_antennas / cfg.noise_w)
    return cfg.bandwidth_hz * math.log2(1.0 + snr)


def _true_rate(scene, geometry, ue_pos, t, cfg):
    uav = region_hover_position(scene, serving_region(scene, ue_pos))
    alpha, los = true_gain(scene, uav, ue_pos, t)
    return _shannon(abs(alpha), geometry, cfg) if los else 0.0


def rate_perfect_csi(scene, geometry, placements, cfg):
    """Upper bound: true gain, full beamforming gain, no overhead."""
    rates = [_true_rate(scene, geometry, ue, t, cfg) for ue, t in placements]
    return float(np.mean(rates))


def rate_pilot_baseline(scene, geometry, placements, cfg):
    """Pilot fraction of every coherence block is lost to estimation; the
    remainder transmits at the perfect-CSI rate."""
    duty = 1.0 - cfg.pilot_overhead_s / cfg.coherence_block_s
    return duty * rate_perfect_csi(scene, geometry, placements, cfg)


class GainPredictor:
    """Nearest-generated-sample gain lookup for one trained agent.

    Draws a pool of generated samples and answers (position, time) queries
    by nearest neighbor in the normalized (x, y, t) coordinates.
    """

    def __init__(self, agent, pool_size=10_000, seed=0):
        pool = gan.sample_generator(agent, pool_size, seed)
        self.codec = agent.codec
        self._pool = pool
        self._tree = cKDTree(np.clip(pool[:, :3], -1.0, 1.0))

    def predict(self, ue_pos, t):
        """(|gain|, los) at the query point."""
        probe = ChannelSample(uav_pos=self.codec.uav_pos, ue_pos=ue_pos,
                              t=t, gain=1 + 0j, los=True)
        coords = self.codec.encode(probe)[:3]
        _, idx = self._tree.query(coords)
        decoded = self.codec.decode(self._pool[idx])
        return abs(decoded.gain), decoded.los


def rate_model_based(scene, geometry, predictors, placements, cfg):
    """Trained-model scheme: no pilot overhead; the serving UAV picks the
    link rate from its predicted gain. Rate adaptation cannot beat the true
    channel, so the achieved rate is capped by the perfect-CSI rate (a
    predicted-LOS transmission over a truly blocked link yields zero)."""
    if not predictors:
        raise DomainError("no trained predictors supplied")
    rates = []
    for ue_pos, t in placements:
        region = serving_region(scene, ue_pos)
        mag, los = predictors[region].predict(ue_pos, t)
        if not los:
            rates.append(0.0)
            continue
        predicted = _shannon(mag, geometry, cfg)
        rates.append(min(predicted, _true_rate(scene, geometry, ue_pos, t, cfg)))
    return float(np.mean(rates))


def export_rate_table(rows, path):
    """Evaluation CSV: scheme, network_size, avg_rate_bps, jsd, seed."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "network_size", "avg_rate_bps", "jsd", "seed"])
        for scheme, size, rate, div, seed in rows:
            writer.writerow([scheme, size,
                             repr(float(rate)) if rate is not None else "",
                             repr(float(div)) if div is not None else "",
                             seed])
