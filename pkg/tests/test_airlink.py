import csv
import math

import pytest

from uavchan import airlink
from uavchan.errors import ConfigError, DomainError


def make_cfg(**overrides):
    base = dict(
        bandwidth_hz=2e6,
        noise_w=7.962143411069939e-15,   # -174 dBm/Hz over 2 MHz
        snr_threshold=10.0,
        max_power_w=10.0,                # 40 dBm
        deadline_s=0.1,
        share_ratio=1.4,
        carrier_wavelength=299792458.0 / 2.4e9,
        sample_bits=320,
    )
    base.update(overrides)
    return airlink.A2AConfig(**base)


def test_pathloss_oracle_100m():
    h = airlink.a2a_pathloss((0, 0, 60), (100, 0, 60), 299792458.0 / 2.4e9)
    assert h == pytest.approx(9.88096121031849e-09, rel=1e-12)
    assert 10 * math.log10(h) == pytest.approx(-80.052, abs=1e-3)


def test_pathloss_inverse_square():
    lam = 0.125
    h1 = airlink.a2a_pathloss((0, 0, 0), (50, 0, 0), lam)
    h2 = airlink.a2a_pathloss((0, 0, 0), (100, 0, 0), lam)
    assert h1 / h2 == pytest.approx(4.0, rel=1e-12)


def test_pathloss_coincident_raises():
    with pytest.raises(DomainError):
        airlink.a2a_pathloss((1, 1, 1), (1, 1, 1), 0.125)


def test_link_rate_oracle():
    cfg = make_cfg(noise_w=1.0)
    # P h / sigma^2 = 10 exactly
    assert airlink.link_rate(10.0, 1.0, cfg) == pytest.approx(
        6918863.237274595, rel=1e-12)


def test_link_rate_zero_power_is_zero():
    cfg = make_cfg()
    assert airlink.link_rate(0.0, 1e-9, cfg) == 0.0


def test_required_rate():
    cfg = make_cfg()
    # 1.4 * 1000 samples * 320 bits / 0.1 s
    assert airlink.required_rate_bps(cfg, 1000) == pytest.approx(4.48e6)


def test_min_power_snr_bound_binds():
    cfg = make_cfg()
    # deadline needs snr 2^2.24 - 1 = 3.724 < threshold 10, so the
    # threshold constraint decides
    h = 1e-10
    p = airlink.min_power_for_link(h, cfg, 1000)
    assert p == pytest.approx(10.0 * cfg.noise_w / h, rel=1e-12)
    assert airlink.link_rate(p, h, cfg) >= airlink.required_rate_bps(cfg, 1000)


def test_min_power_deadline_binds():
    cfg = make_cfg(deadline_s=0.01, max_power_w=1e4)
    # now the deadline needs snr 2^22.4 - 1 >> 10
    h = 1e-10
    p = airlink.min_power_for_link(h, cfg, 1000)
    snr_needed = 2 ** (airlink.required_rate_bps(cfg, 1000)
                       / cfg.bandwidth_hz) - 1
    assert p == pytest.approx(snr_needed * cfg.noise_w / h, rel=1e-12)


def test_min_power_infeasible_returns_none():
    cfg = make_cfg(max_power_w=1e-6)
    assert airlink.min_power_for_link(1e-12, cfg, 1000) is None
    assert airlink.min_power_for_link(0.0, make_cfg(), 1000) is None


def test_feasible_set_excludes_self_and_far_nodes():
    cfg = make_cfg(max_power_w=1e-4)
    lam = cfg.carrier_wavelength
    # max range for snr 10 at 1e-4 W: h >= 10 n / P
    h_min = 10.0 * cfg.noise_w / 1e-4
    d_max = lam / (4 * math.pi * math.sqrt(h_min))
    positions = {0: (0.0, 0.0, 60.0),
                 1: (0.9 * d_max, 0.0, 60.0),
                 2: (2.0 * d_max, 0.0, 60.0)}
    out = airlink.feasible_set(0, positions, cfg, 1000)
    assert set(out) == {1}
    assert 0 < out[1] <= cfg.max_power_w


def test_feasible_set_singleton_is_empty():
    assert airlink.feasible_set(0, {0: (0, 0, 0)}, make_cfg(), 10) == {}


def test_link_budget_feasible_fields():
    cfg = make_cfg()
    positions = {0: (0.0, 0.0, 60.0), 1: (100.0, 0.0, 60.0)}
    lb = airlink.link_budget(0, 1, positions, cfg, 1000)
    assert lb.feasible
    assert lb.distance_m == pytest.approx(100.0)
    assert lb.rate_bps >= airlink.required_rate_bps(cfg, 1000)
    assert lb.min_power_w * lb.pathloss / cfg.noise_w >= cfg.snr_threshold


def test_export_link_table(tmp_path):
    cfg = make_cfg()
    positions = {0: (0.0, 0.0, 60.0), 1: (100.0, 0.0, 60.0),
                 2: (0.0, 80.0, 60.0)}
    path = tmp_path / "links.csv"
    airlink.export_link_table(positions, cfg, 1000, path)
    with open(path) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["from", "to", "distance_m", "pathloss_db",
                       "min_power_dbm", "rate_bps", "feasible"]
    assert len(rows) == 1 + 6  # every ordered pair
    for row in rows[1:]:
        assert row[6] in ("True", "False")


def test_config_validation():
    with pytest.raises(ConfigError):
        make_cfg(bandwidth_hz=0.0)
    with pytest.raises(ConfigError):
        make_cfg(sample_bits=0)
