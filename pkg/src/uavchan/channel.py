"""Ground-truth mmWave air-to-ground channel.

Uniform linear array steering vectors, the rank-1 MIMO channel matrix
H = alpha * a_r a_t^H, and a synthetic spatial-temporal gain field
(log-distance path loss + smooth seeded shadowing + a grid blockage map)
that plays the role of a measured channel dataset.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DomainError

SPEED_OF_LIGHT = 299_792_458.0

# Number of random plane waves in the shadowing field.
_SHADOW_WAVES = 16
# Correlation length of the shadowing field, meters.
_SHADOW_CORR_M = 20.0


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear arrays at both link ends."""

    tx_antennas: int
    rx_antennas: int
    carrier_wavelength: float
    element_spacing: float

    def __post_init__(self):
        if self.tx_antennas < 1 or self.rx_antennas < 1:
            raise ConfigError("antenna counts must be >= 1")
        if not (self.carrier_wavelength > 0):
            raise ConfigError("carrier wavelength must be positive")
        if not (0 < self.element_spacing <= self.carrier_wavelength):
            raise ConfigError("element spacing must be in (0, wavelength]")

    @classmethod
    def half_wavelength(cls, tx_antennas, rx_antennas, carrier_hz):
        lam = SPEED_OF_LIGHT / carrier_hz
        return cls(tx_antennas, rx_antennas, lam, lam / 2.0)


@dataclass(frozen=True)
class Rect:
    """Axis-aligned ground rectangle, meters."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ConfigError("degenerate rectangle")

    def contains(self, px, py, tol=1e-9):
        return (self.x_min - tol <= px <= self.x_max + tol
                and self.y_min - tol <= py <= self.y_max + tol)

    def as_tuple(self):
        return (self.x_min, self.x_max, self.y_min, self.y_max)


@dataclass(frozen=True)
class ChannelSample:
    """One measurement record: endpoints, time, complex gain, LOS flag."""

    uav_pos: tuple  # (x, y, z) meters
    ue_pos: tuple   # (x, y, z) meters
    t: float        # seconds
    gain: complex
    los: bool


@dataclass(frozen=True, eq=False)
class Scene:
    """Synthetic ground-truth field for the A2G channel gain."""

    bounds: Rect
    uav_altitude: float
    blockage: np.ndarray = field(repr=False)  # bool grid [ny, nx], True = shadowed
    pathloss_exponent: float
    reference_gain_db: float
    shadowing_stddev_db: float
    temporal_drift_rate: float  # radians / second
    carrier_wavelength: float
    rng_seed: int
    regions: tuple  # disjoint service Rects partitioning bounds

    def __post_init__(self):
        if not (1.5 <= self.pathloss_exponent <= 4.0):
            raise ConfigError("pathloss exponent must be in [1.5, 4]")
        if self.blockage.ndim != 2 or self.blockage.dtype != np.bool_:
            raise ConfigError("blockage map must be a 2-D boolean grid")
        self.blockage.setflags(write=False)
        # Shadowing plane waves are fixed by the seed at construction.
        rng = np.random.default_rng(np.random.SeedSequence([self.rng_seed, 0x5AD0]))
        k = rng.normal(scale=2.0 * math.pi / _SHADOW_CORR_M,
                       size=(_SHADOW_WAVES, 2))
        phases = rng.uniform(0.0, 2.0 * math.pi, size=_SHADOW_WAVES)
        object.__setattr__(self, "_shadow_k", k)
        object.__setattr__(self, "_shadow_phases", phases)

    # -- blockage / shadowing internals -------------------------------------

    def _cell_of(self, px, py):
        ny, nx = self.blockage.shape
        b = self.bounds
        ix = min(int((px - b.x_min) / (b.x_max - b.x_min) * nx), nx - 1)
        iy = min(int((py - b.y_min) / (b.y_max - b.y_min) * ny), ny - 1)
        return iy, ix

    def _ray_blocked(self, a, b):
        """True if the ground projection of segment a->b crosses a blocked cell."""
        if not self.blockage.any():
            return False
        ny, nx = self.blockage.shape
        cell_w = (self.bounds.x_max - self.bounds.x_min) / nx
        cell_h = (self.bounds.y_max - self.bounds.y_min) / ny
        seg = math.hypot(b[0] - a[0], b[1] - a[1])
        steps = max(2, int(seg / (0.25 * min(cell_w, cell_h))) + 1)
        for s in np.linspace(0.0, 1.0, steps):
            px = a[0] + s * (b[0] - a[0])
            py = a[1] + s * (b[1] - a[1])
            iy, ix = self._cell_of(px, py)
            if self.blockage[iy, ix]:
                return True
        return False

    def shadowing_db(self, px, py):
        """Smooth zero-mean Gaussian-like field with the configured stddev."""
        if self.shadowing_stddev_db == 0.0:
            return 0.0
        k = self._shadow_k
        ph = self._shadow_phases
        vals = np.cos(k[:, 0] * px + k[:, 1] * py + ph)
        return float(self.shadowing_stddev_db
                     * math.sqrt(2.0 / _SHADOW_WAVES) * vals.sum())

    def _check_bounds(self, pos, name):
        if not self.bounds.contains(pos[0], pos[1]):
            raise DomainError(f"{name} position {pos[:2]} outside scene bounds")


def steering_vector(angle, count, geometry):
    """ULA steering vector: element k = exp(j k (2 pi d / lambda) sin(angle))."""
    if not math.isfinite(angle):
        raise DomainError("steering angle must be finite")
    if abs(angle) > math.pi / 2 + 1e-12:
        raise DomainError("steering angle must satisfy |angle| <= pi/2")
    if count not in (geometry.tx_antennas, geometry.rx_antennas):
        raise DomainError("count must be one of the array sizes")
    phase = 2.0 * math.pi * geometry.element_spacing / geometry.carrier_wavelength
    k = np.arange(count)
    return np.exp(1j * phase * k * math.sin(angle))


def link_angles(uav_pos, ue_pos):
    """Departure/arrival elevation angles of the LOS ray, broadside convention.

    Both angles are measured from the horizontal plane, so they always lie
    in [-pi/2, pi/2].
    """
    dx = ue_pos[0] - uav_pos[0]
    dy = ue_pos[1] - uav_pos[1]
    dz = ue_pos[2] - uav_pos[2]
    rho = math.hypot(dx, dy)
    if rho == 0.0 and dz == 0.0:
        raise DomainError("coincident UAV and UE positions")
    phi_t = math.atan2(dz, rho)   # at the UAV, toward the UE
    phi_r = math.atan2(-dz, rho)  # at the UE, toward the UAV
    return phi_t, phi_r


def channel_matrix(uav_pos, ue_pos, gain, geometry):
    """Rank-1 MIMO channel H = gain * a_r(phi_r) a_t(phi_t)^H."""
    phi_t, phi_r = link_angles(uav_pos, ue_pos)
    a_t = steering_vector(phi_t, geometry.tx_antennas, geometry)
    a_r = steering_vector(phi_r, geometry.rx_antennas, geometry)
    return gain * np.outer(a_r, a_t.conj())


def true_gain(scene, uav_pos, ue_pos, t):
    """Ground-truth complex gain alpha(x, y, t) and the LOS flag.

    NLOS (a blocked ray) gives exactly zero gain. LOS magnitude follows
    log-distance path loss plus the seeded shadowing field; the phase
    rotates with distance and drifts linearly in time.
    """
    if t < 0:
        raise DomainError("time must be non-negative")
    scene._check_bounds(uav_pos, "UAV")
    scene._check_bounds(ue_pos, "UE")
    dist = math.dist(uav_pos, ue_pos)
    if dist == 0.0:
        raise DomainError("coincident UAV and UE positions")
    if scene._ray_blocked(uav_pos, ue_pos):
        return 0j, False
    mid = (0.5 * (uav_pos[0] + ue_pos[0]), 0.5 * (uav_pos[1] + ue_pos[1]))
    db = (scene.reference_gain_db
          - 10.0 * scene.pathloss_exponent * math.log10(dist)
          + scene.shadowing_db(*mid))
    mag = 10.0 ** (db / 20.0)
    phase = math.remainder(
        2.0 * math.pi * dist / scene.carrier_wavelength
        + scene.temporal_drift_rate * t,
        2.0 * math.pi)
    return mag * complex(math.cos(phase), math.sin(phase)), True


@dataclass(frozen=True)
class SceneConfig:
    """Knobs for the synthetic scene generator."""

    width_m: float = 100.0
    height_m: float = 100.0
    uav_altitude_m: float = 60.0
    grid_nx: int = 12
    grid_ny: int = 12
    blockage_coverage: float = 0.04
    pathloss_exponent: float = 2.0
    reference_gain_db: float = 0.0
    shadowing_stddev_db: float = 2.0
    temporal_drift_rate: float = 0.05
    carrier_hz: float = 30e9
    num_regions: int = 4

    def __post_init__(self):
        if not (0.0 <= self.blockage_coverage < 1.0):
            raise ConfigError("blockage coverage must be in [0, 1)")
        if self.num_regions < 1:
            raise ConfigError("need at least one region")


def _partition_regions(bounds, count):
    """Split the bounds into `count` equal disjoint rectangles.

    Uses the most square grid whose row count divides `count`
    (4 -> 2x2 quadrants, 5 -> 1x5 strips, 12 -> 3x4).
    """
    rows = int(math.isqrt(count))
    while count % rows:
        rows -= 1
    cols = count // rows
    w = (bounds.x_max - bounds.x_min) / cols
    h = (bounds.y_max - bounds.y_min) / rows
    regions = []
    for r in range(rows):
        for c in range(cols):
            regions.append(Rect(bounds.x_min + c * w, bounds.x_min + (c + 1) * w,
                                bounds.y_min + r * h, bounds.y_min + (r + 1) * h))
    return tuple(regions)


def generate_scene(config, seed):
    """Build a reproducible Scene from a SceneConfig and a 64-bit seed."""
    bounds = Rect(0.0, config.width_m, 0.0, config.height_m)
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xB10C]))
    blockage = rng.random((config.grid_ny, config.grid_nx)) < config.blockage_coverage
    return Scene(
        bounds=bounds,
        uav_altitude=config.uav_altitude_m,
        blockage=blockage,
        pathloss_exponent=config.pathloss_exponent,
        reference_gain_db=config.reference_gain_db,
        shadowing_stddev_db=config.shadowing_stddev_db,
        temporal_drift_rate=config.temporal_drift_rate,
        carrier_wavelength=SPEED_OF_LIGHT / config.carrier_hz,
        rng_seed=int(seed),
        regions=_partition_regions(bounds, config.num_regions),
    )


# -- scene file format -------------------------------------------------------
#
# Line 1: a JSON header with all scalar parameters, the bounds, the region
#         rectangles, and the blockage grid shape.
# Lines 2..ny+1: the blockage bitmap, one row per line, '0'/'1' characters,
#         row-major (row 0 first). Round-trips losslessly.

def save_scene(scene, path):
    header = {
        "format": "uavchan-scene-v1",
        "bounds": scene.bounds.as_tuple(),
        "uav_altitude": scene.uav_altitude,
        "pathloss_exponent": scene.pathloss_exponent,
        "reference_gain_db": scene.reference_gain_db,
        "shadowing_stddev_db": scene.shadowing_stddev_db,
        "temporal_drift_rate": scene.temporal_drift_rate,
        "carrier_wavelength": scene.carrier_wavelength,
        "rng_seed": scene.rng_seed,
        "regions": [r.as_tuple() for r in scene.regions],
        "grid_shape": list(scene.blockage.shape),
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for row in scene.blockage:
            fh.write("".join("1" if v else "0" for v in row) + "\n")


def load_scene(path):
    with open(path) as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "uavchan-scene-v1":
            raise ConfigError(f"not a scene file: {path}")
        ny, nx = header["grid_shape"]
        rows = [fh.readline().strip() for _ in range(ny)]
    blockage = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
    if blockage.shape != (ny, nx):
        raise ConfigError("scene bitmap does not match its declared shape")
    return Scene(
        bounds=Rect(*header["bounds"]),
        uav_altitude=header["uav_altitude"],
        blockage=blockage,
        pathloss_exponent=header["pathloss_exponent"],
        reference_gain_db=header["reference_gain_db"],
        shadowing_stddev_db=header["shadowing_stddev_db"],
        temporal_drift_rate=header["temporal_drift_rate"],
        carrier_wavelength=header["carrier_wavelength"],
        rng_seed=header["rng_seed"],
        regions=tuple(Rect(*r) for r in header["regions"]),
    )
