"""Air-to-air link budgets for generated-sample exchange.

Free-space path loss, Shannon rate, the minimal transmit power meeting the
SNR threshold and the per-round transmission deadline, and the resulting
feasible-neighbor sets.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError

SAMPLE_BITS_DEFAULT = 320  # five float64 fields per serialized sample


@dataclass(frozen=True)
class A2AConfig:
    """Radio parameters of the UAV-to-UAV exchange links (linear units)."""

    bandwidth_hz: float
    noise_w: float
    snr_threshold: float      # linear
    max_power_w: float
    deadline_s: float
    share_ratio: float        # generated samples sent per real sample held
    carrier_wavelength: float
    sample_bits: int = SAMPLE_BITS_DEFAULT

    def __post_init__(self):
        for name in ("bandwidth_hz", "noise_w", "snr_threshold", "max_power_w",
                     "deadline_s", "share_ratio", "carrier_wavelength"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        if self.sample_bits <= 0:
            raise ConfigError("sample_bits must be positive")


@dataclass(frozen=True)
class LinkBudget:
    from_id: int
    to_id: int
    distance_m: float
    pathloss: float          # dimensionless power gain
    min_power_w: float       # nan when infeasible
    rate_bps: float          # at min_power_w; nan when infeasible
    feasible: bool


def a2a_pathloss(pos_i, pos_j, wavelength):
    """Free-space power gain (lambda / (4 pi d))^2."""
    d = math.dist(pos_i, pos_j)
    if d == 0.0:
        raise DomainError("coincident UAV positions")
    return (wavelength / (4.0 * math.pi * d)) ** 2


def link_rate(power_w, pathloss, cfg):
    """Shannon rate w_b log2(1 + P h / sigma^2), bits/second."""
    if power_w < 0 or pathloss < 0:
        raise DomainError("power and pathloss must be non-negative")
    return cfg.bandwidth_hz * math.log2(1.0 + power_w * pathloss / cfg.noise_w)


def required_rate_bps(cfg, dataset_size):
    """Rate needed to push eta * S_i samples within the deadline."""
    return cfg.share_ratio * dataset_size * cfg.sample_bits / cfg.deadline_s


def min_power_for_link(pathloss, cfg, dataset_size):
    """Smallest power meeting both the SNR threshold and the deadline.

    Both constraints are monotone in P, so the answer is the larger of the
    two per-constraint thresholds. Returns None when that exceeds max power
    (or the link gain is non-positive).
    """
    if pathloss <= 0:
        return None
    snr_deadline = 2.0 ** (required_rate_bps(cfg, dataset_size)
                           / cfg.bandwidth_hz) - 1.0
    snr_needed = max(cfg.snr_threshold, snr_deadline)
    power = snr_needed * cfg.noise_w / pathloss
    if power > cfg.max_power_w:
        return None
    return power


def feasible_set(i, positions, cfg, dataset_size):
    """Feasible out-neighbors of UAV i, each with its minimal power (watts)."""
    if len(positions) < 2:
        return {}
    out = {}
    for j, pos_j in positions.items():
        if j == i:
            continue
        h = a2a_pathloss(positions[i], pos_j, cfg.carrier_wavelength)
        p = min_power_for_link(h, cfg, dataset_size)
        if p is not None:
            out[j] = p
    return out


def link_budget(i, j, positions, cfg, dataset_size):
    d = math.dist(positions[i], positions[j])
    h = a2a_pathloss(positions[i], positions[j], cfg.carrier_wavelength)
    p = min_power_for_link(h, cfg, dataset_size)
    if p is None:
        return LinkBudget(i, j, d, h, math.nan, math.nan, False)
    return LinkBudget(i, j, d, h, p, link_rate(p, h, cfg), True)


def export_link_table(positions, cfg, dataset_size, path):
    """CSV of every ordered pair's budget."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["from", "to", "distance_m", "pathloss_db",
                         "min_power_dbm", "rate_bps", "feasible"])
        for i in sorted(positions):
            for j in sorted(positions):
                if i == j:
                    continue
                lb = link_budget(i, j, positions, cfg, dataset_size)
                pl_db = 10.0 * math.log10(lb.pathloss)
                p_dbm = (10.0 * math.log10(lb.min_power_w * 1e3)
                         if lb.feasible else math.nan)
                writer.writerow([i, j, repr(lb.distance_m), repr(pl_db),
                                 repr(p_dbm), repr(lb.rate_bps), lb.feasible])
