"""Pilot-based channel estimation and per-UAV dataset collection.

A single pilot symbol gives r = beta * alpha + q^H n; the gain estimate is
alpha_hat = r / beta with estimation-error variance sigma^2_ue / |beta|^2.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass

import numpy as np

from .channel import ChannelSample, Rect, link_angles, steering_vector, true_gain
from .errors import DomainError, SingularBeamError

BETA_EPS_DEFAULT = 1e-9


@dataclass(frozen=True)
class BeamPair:
    """Unit-norm beamforming (w, tx side) and combining (q, rx side) vectors."""

    w: np.ndarray
    q: np.ndarray


@dataclass(frozen=True)
class PilotObservation:
    r: complex
    beta: complex
    pilot_power: float
    noise_variance: float


@dataclass(frozen=True)
class Dataset:
    """One UAV's collected channel samples over a region and time window."""

    owner: int
    samples: tuple  # of ChannelSample
    region: Rect
    time_window: tuple  # (t_start, t_end) seconds
    seed: int


def design_beams(uav_pos, ue_pos, geometry):
    """Maximum-ratio beams toward the geometric link angles.

    w = a_t / sqrt(M) and q = a_r / sqrt(N) make |beta| = sqrt(P * M * N)
    for every LOS geometry.
    """
    phi_t, phi_r = link_angles(uav_pos, ue_pos)
    a_t = steering_vector(phi_t, geometry.tx_antennas, geometry)
    a_r = steering_vector(phi_r, geometry.rx_antennas, geometry)
    return BeamPair(w=a_t / math.sqrt(geometry.tx_antennas),
                    q=a_r / math.sqrt(geometry.rx_antennas))


def pilot_coefficient(beams, uav_pos, ue_pos, geometry, pilot_power):
    """beta = sqrt(P) (w^T kron q^H)(conj(a_t) kron a_r), via the
    factorization (w^T conj(a_t)) * (q^H a_r) so the MN-length Kronecker
    product is never materialized."""
    phi_t, phi_r = link_angles(uav_pos, ue_pos)
    a_t = steering_vector(phi_t, geometry.tx_antennas, geometry)
    a_r = steering_vector(phi_r, geometry.rx_antennas, geometry)
    return (math.sqrt(pilot_power)
            * (beams.w @ a_t.conj()) * (beams.q.conj() @ a_r))


def pilot_observe(scene, uav_pos, ue_pos, t, beams, geometry,
                  pilot_power, noise_variance, rng):
    """One received pilot: r = beta * alpha(x, y, t) + q^H n.

    The noise vector n is circularly-symmetric complex Gaussian with
    covariance noise_variance * I drawn from the supplied generator.
    """
    if not pilot_power > 0:
        raise DomainError("pilot power must be positive")
    alpha, _ = true_gain(scene, uav_pos, ue_pos, t)
    beta = pilot_coefficient(beams, uav_pos, ue_pos, geometry, pilot_power)
    n_rx = len(beams.q)
    noise = math.sqrt(noise_variance / 2.0) * (
        rng.standard_normal(n_rx) + 1j * rng.standard_normal(n_rx))
    r = beta * alpha + beams.q.conj() @ noise
    return PilotObservation(r=complex(r), beta=complex(beta),
                            pilot_power=pilot_power,
                            noise_variance=noise_variance)


def estimate_gain(obs, beta_eps=BETA_EPS_DEFAULT):
    """Invert the pilot: alpha_hat = r / beta."""
    if abs(obs.beta) <= beta_eps:
        raise SingularBeamError(
            f"|beta| = {abs(obs.beta):.3e} <= {beta_eps:.3e}: beams misaligned")
    return obs.r / obs.beta


def estimation_error_variance(obs):
    """Variance of alpha_hat - alpha: sigma^2_ue / |beta|^2."""
    return obs.noise_variance / abs(obs.beta) ** 2


def collect_dataset(scene, geometry, uav_id, region, time_window, count,
                    pilot_power, noise_variance, seed,
                    beta_eps=BETA_EPS_DEFAULT):
    """Collect `count` estimated samples uniformly over region x window.

    UAV positions are drawn uniformly over the region at the scene altitude,
    UE positions on the ground; each stored gain is the pilot estimate.
    Deterministic given the seed.
    """
    if count <= 0:
        raise DomainError("dataset size must be positive")
    b = scene.bounds
    if not (b.contains(region.x_min, region.y_min)
            and b.contains(region.x_max, region.y_max)):
        raise DomainError("collection region outside scene bounds")
    t0, t1 = time_window
    if not (0 <= t0 < t1):
        raise DomainError("bad time window")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), int(uav_id)]))
    samples = []
    for _ in range(count):
        ux = rng.uniform(region.x_min, region.x_max)
        uy = rng.uniform(region.y_min, region.y_max)
        ex = rng.uniform(region.x_min, region.x_max)
        ey = rng.uniform(region.y_min, region.y_max)
        t = rng.uniform(t0, t1)
        uav_pos = (ux, uy, scene.uav_altitude)
        ue_pos = (ex, ey, 0.0)
        beams = design_beams(uav_pos, ue_pos, geometry)
        obs = pilot_observe(scene, uav_pos, ue_pos, t, beams, geometry,
                            pilot_power, noise_variance, rng)
        gain = estimate_gain(obs, beta_eps)
        _, los = true_gain(scene, uav_pos, ue_pos, t)
        samples.append(ChannelSample(uav_pos=uav_pos, ue_pos=ue_pos, t=t,
                                     gain=gain, los=los))
    return Dataset(owner=int(uav_id), samples=tuple(samples), region=region,
                   time_window=(float(t0), float(t1)), seed=int(seed))


# -- dataset file formats -----------------------------------------------------

_COLUMNS = ("uav_x", "uav_y", "uav_z", "ue_x", "ue_y", "ue_z",
            "t", "gain_re", "gain_im", "los")


def _dataset_matrix(ds):
    rows = np.empty((len(ds.samples), len(_COLUMNS)), dtype=np.float64)
    for i, s in enumerate(ds.samples):
        rows[i] = (*s.uav_pos, *s.ue_pos, s.t,
                   s.gain.real, s.gain.imag, 1.0 if s.los else 0.0)
    return rows


def _matrix_to_samples(mat):
    return tuple(
        ChannelSample(uav_pos=tuple(row[0:3]), ue_pos=tuple(row[3:6]),
                      t=float(row[6]), gain=complex(row[7], row[8]),
                      los=bool(row[9]))
        for row in mat)


def save_dataset(ds, path):
    """Binary columnar file: JSON header line + float64 column block."""
    header = {
        "format": "uavchan-dataset-v1",
        "owner": ds.owner,
        "region": ds.region.as_tuple(),
        "time_window": list(ds.time_window),
        "seed": ds.seed,
        "columns": list(_COLUMNS),
        "rows": len(ds.samples),
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(_dataset_matrix(ds).tobytes())


def load_dataset(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "uavchan-dataset-v1":
            raise DomainError(f"not a dataset file: {path}")
        mat = np.frombuffer(fh.read(), dtype=np.float64)
    mat = mat.reshape(header["rows"], len(_COLUMNS))
    return Dataset(owner=header["owner"], samples=_matrix_to_samples(mat),
                   region=Rect(*header["region"]),
                   time_window=tuple(header["time_window"]),
                   seed=header["seed"])


def dataset_to_csv(ds, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(_COLUMNS)
        for row in _dataset_matrix(ds):
            writer.writerow([repr(float(v)) for v in row])
