"""Experiment configuration: a single YAML file with unit-suffixed keys.

Defaults mirror the reference campaign: 256x64 antennas at 30 GHz, 2 MHz
A2A bandwidth, 40 dBm max power, -174 dBm/Hz noise density, 10 dB SNR
threshold, 0.1 s exchange deadline, share ratio 1.4, 1000 samples per UAV.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import yaml

from .airlink import A2AConfig
from .channel import SPEED_OF_LIGHT, ArrayGeometry, SceneConfig
from .errors import ConfigError
from .gan import TrainConfig
from .metrics import HistogramBinning, RateEvalConfig


def dbm_to_w(dbm):
    return 10.0 ** (dbm / 10.0) / 1e3


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class RadioSection:
    tx_antennas: int = 256
    rx_antennas: int = 64
    carrier_hz: float = 30e9
    pilot_power_w: float = 1.0
    ue_noise_w: float = 1e-6


@dataclass(frozen=True)
class A2ASection:
    bandwidth_hz: float = 2e6
    noise_density_dbm_hz: float = -174.0
    snr_threshold_db: float = 10.0
    max_power_dbm: float = 40.0
    deadline_s: float = 0.1
    carrier_hz: float = 2.4e9
    sample_bits: int = 320


@dataclass(frozen=True)
class ConvergenceSection:
    local_train_time_s: float = 0.9   # t_c is not pinned by the model; arbitrary
    confidence: float = 0.9
    mc_trials: int = 20000
    report_rounds: int = 20


@dataclass(frozen=True)
class RateEvalSection:
    bandwidth_hz: float = 50e6
    power_w: float = 1.0
    noise_density_dbm_hz: float = -174.0
    coherence_block_s: float = 1.0
    pilot_overhead_s: float = 0.12
    ue_density_per_m2: float = 0.005
    predictor_pool: int = 10000


@dataclass(frozen=True)
class EvalSection:
    jsd_bins_per_dim: int = 5
    jsd_pseudocount: float = 1e-9
    global_reference_size: int = 4000


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 1
    n_uavs: int = 4
    samples_per_uav: int = 1000
    share_ratio: float = 1.4
    time_window_s: tuple = (0.0, 600.0)
    scene: SceneConfig = field(default_factory=SceneConfig)
    radio: RadioSection = field(default_factory=RadioSection)
    a2a: A2ASection = field(default_factory=A2ASection)
    convergence: ConvergenceSection = field(default_factory=ConvergenceSection)
    train: TrainConfig = field(default_factory=TrainConfig)
    rate_eval: RateEvalSection = field(default_factory=RateEvalSection)
    eval: EvalSection = field(default_factory=EvalSection)

    def __post_init__(self):
        if self.n_uavs < 1:
            raise ConfigError("need at least one UAV")
        if self.samples_per_uav < 1:
            raise ConfigError("need at least one sample per UAV")
        if self.scene.num_regions != self.n_uavs:
            raise ConfigError(
                f"scene regions ({self.scene.num_regions}) must equal the "
                f"UAV count ({self.n_uavs})")
        t0, t1 = self.time_window_s
        if not (0 <= t0 < t1):
            raise ConfigError("bad time window")

    # -- derived objects ------------------------------------------------------

    def geometry(self):
        return ArrayGeometry.half_wavelength(self.radio.tx_antennas,
                                             self.radio.rx_antennas,
                                             self.radio.carrier_hz)

    def a2a_config(self):
        noise_w = dbm_to_w(self.a2a.noise_density_dbm_hz
                           + 10.0 * math.log10(self.a2a.bandwidth_hz))
        return A2AConfig(
            bandwidth_hz=self.a2a.bandwidth_hz,
            noise_w=noise_w,
            snr_threshold=db_to_linear(self.a2a.snr_threshold_db),
            max_power_w=dbm_to_w(self.a2a.max_power_dbm),
            deadline_s=self.a2a.deadline_s,
            share_ratio=self.share_ratio,
            carrier_wavelength=SPEED_OF_LIGHT / self.a2a.carrier_hz,
            sample_bits=self.a2a.sample_bits,
        )

    def train_config(self):
        if self.train.share_ratio != self.share_ratio:
            return TrainConfig(**{**asdict(self.train),
                                  "share_ratio": self.share_ratio})
        return self.train

    def rate_eval_config(self):
        noise_w = dbm_to_w(self.rate_eval.noise_density_dbm_hz
                           + 10.0 * math.log10(self.rate_eval.bandwidth_hz))
        return RateEvalConfig(
            bandwidth_hz=self.rate_eval.bandwidth_hz,
            power_w=self.rate_eval.power_w,
            noise_w=noise_w,
            coherence_block_s=self.rate_eval.coherence_block_s,
            pilot_overhead_s=self.rate_eval.pilot_overhead_s,
            ue_density_per_m2=self.rate_eval.ue_density_per_m2,
        )

    def binning(self):
        return HistogramBinning(bins_per_dim=self.eval.jsd_bins_per_dim,
                                pseudocount=self.eval.jsd_pseudocount)


def _coerce(cls, value):
    if isinstance(value, cls):
        return value
    return cls(**value)


def from_dict(data):
    data = dict(data)
    sections = {
        "scene": SceneConfig,
        "radio": RadioSection,
        "a2a": A2ASection,
        "convergence": ConvergenceSection,
        "train": TrainConfig,
        "rate_eval": RateEvalSection,
        "eval": EvalSection,
    }
    kwargs = {}
    for key, value in data.items():
        if key in sections:
            if key in ("scene", "train") and isinstance(value, dict):
                value = dict(value)
                for tup_key in ("gen_hidden", "disc_hidden"):
                    if tup_key in value:
                        value[tup_key] = tuple(value[tup_key])
            kwargs[key] = _coerce(sections[key], value)
        elif key == "time_window_s":
            kwargs[key] = tuple(value)
        else:
            kwargs[key] = value
    return ExperimentConfig(**kwargs)


def to_dict(config):
    data = asdict(config)
    data["time_window_s"] = list(config.time_window_s)
    data["train"]["gen_hidden"] = list(config.train.gen_hidden)
    data["train"]["disc_hidden"] = list(config.train.disc_hidden)
    return data


def load_config(path):
    with open(path) as fh:
        data = yaml.safe_load(fh)
    return from_dict(data or {})


def save_config(config, path):
    with open(path, "w") as fh:
        yaml.safe_dump(to_dict(config), fh, sort_keys=True)


def emit_config(config):
    return yaml.safe_dump(to_dict(config), sort_keys=True)
