import dataclasses

import numpy as np
import pytest

from uavchan import channel, estimation
from uavchan.config import ExperimentConfig


@pytest.fixture(scope="session")
def geometry_small():
    return channel.ArrayGeometry.half_wavelength(8, 4, 30e9)


@pytest.fixture(scope="session")
def scene_clear():
    """Small scene without blockage or shadowing: pure log-distance field."""
    cfg = channel.SceneConfig(blockage_coverage=0.0, shadowing_stddev_db=0.0)
    return channel.generate_scene(cfg, seed=7)


@pytest.fixture(scope="session")
def scene_default():
    return channel.generate_scene(channel.SceneConfig(), seed=7)


@pytest.fixture(scope="session")
def small_config():
    """Desk-scale experiment config for pipeline tests (seconds, not minutes)."""
    base = ExperimentConfig(seed=5)
    return dataclasses.replace(
        base,
        samples_per_uav=50,
        train=dataclasses.replace(base.train, rounds=20, eval_every=10,
                                  batch_size=16, gen_hidden=(16, 16),
                                  disc_hidden=(16, 16)),
        convergence=dataclasses.replace(base.convergence, mc_trials=10000,
                                        report_rounds=5),
        rate_eval=dataclasses.replace(base.rate_eval, predictor_pool=500,
                                      ue_density_per_m2=0.002),
        eval=dataclasses.replace(base.eval, global_reference_size=150),
    )


@pytest.fixture(scope="session")
def dataset_small(scene_clear, geometry_small):
    return estimation.collect_dataset(
        scene_clear, geometry_small, uav_id=0, region=scene_clear.regions[0],
        time_window=(0.0, 600.0), count=40, pilot_power=1.0,
        noise_variance=1e-6, seed=3)


def assert_scenes_equal(a, b):
    assert a.bounds == b.bounds
    assert a.uav_altitude == b.uav_altitude
    assert np.array_equal(a.blockage, b.blockage)
    assert a.pathloss_exponent == b.pathloss_exponent
    assert a.reference_gain_db == b.reference_gain_db
    assert a.shadowing_stddev_db == b.shadowing_stddev_db
    assert a.temporal_drift_rate == b.temporal_drift_rate
    assert a.carrier_wavelength == b.carrier_wavelength
    assert a.rng_seed == b.rng_seed
    assert a.regions == b.regions
