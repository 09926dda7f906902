import dataclasses
import hashlib
import os

import numpy as np
import pytest

from uavchan import cli, pipeline
from uavchan.config import (ExperimentConfig, dbm_to_w, emit_config,
                            from_dict, load_config, save_config, to_dict)
from uavchan.errors import ConfigError


# -- config ----------------------------------------------------------------------

def test_unit_helpers():
    assert dbm_to_w(30.0) == pytest.approx(1.0)
    assert dbm_to_w(40.0) == pytest.approx(10.0)


def test_default_config_sections():
    cfg = ExperimentConfig()
    assert cfg.n_uavs == 4
    assert cfg.radio.tx_antennas == 256 and cfg.radio.rx_antennas == 64
    assert cfg.a2a.max_power_dbm == 40.0
    assert cfg.share_ratio == 1.4
    assert cfg.samples_per_uav == 1000


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(n_uavs=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(n_uavs=3)  # default scene still has 4 regions
    with pytest.raises(ConfigError):
        ExperimentConfig(time_window_s=(5.0, 5.0))


def test_derived_a2a_config():
    cfg = ExperimentConfig()
    a2a = cfg.a2a_config()
    assert a2a.max_power_w == pytest.approx(10.0)
    assert a2a.snr_threshold == pytest.approx(10.0)
    assert a2a.noise_w == pytest.approx(7.962143411069939e-15, rel=1e-9)
    assert a2a.share_ratio == cfg.share_ratio


def test_train_config_inherits_share_ratio():
    cfg = dataclasses.replace(ExperimentConfig(), share_ratio=0.8)
    assert cfg.train_config().share_ratio == 0.8


def test_config_round_trip(tmp_path, small_config):
    path = tmp_path / "cfg.yaml"
    save_config(small_config, path)
    assert load_config(path) == small_config
    assert from_dict(to_dict(small_config)) == small_config
    assert from_dict({}) == ExperimentConfig()


def test_emit_config_is_yaml_text(small_config):
    text = emit_config(small_config)
    assert "samples_per_uav: 50" in text
    assert "tx_antennas: 256" in text


# -- pipeline stages -------------------------------------------------------------

@pytest.fixture(scope="module")
def run_dir(tmp_path_factory, small_config):
    out = tmp_path_factory.mktemp("run")
    status = pipeline.run_pipeline(small_config, str(out))
    assert status == "formed"
    return out


def test_run_artifacts_present(run_dir, small_config):
    names = set(os.listdir(run_dir))
    expected = {"scene.txt", "links.csv", "formation.csv", "graph.txt",
                "convergence.csv", "history.csv", "evaluation.csv",
                "manifest.txt", "config_echo.yaml"}
    assert expected <= names
    for i in range(small_config.n_uavs):
        assert f"dataset_{i}.bin" in names
        assert f"dataset_{i}.csv" in names
        assert f"generator_{i}.ckpt" in names
        assert f"discriminator_{i}.ckpt" in names


def test_manifest_lists_every_file(run_dir):
    lines = (run_dir / "manifest.txt").read_text().split("\n")
    assert lines[0] == "# uavchan run manifest"
    digests = {}
    for line in lines:
        if line.startswith("sha256 "):
            _, digest, name = line.split()
            digests[name] = digest
    for name in os.listdir(run_dir):
        if name == "manifest.txt":
            continue
        assert name in digests
        with open(run_dir / name, "rb") as fh:
            assert hashlib.sha256(fh.read()).hexdigest() == digests[name]


def test_evaluation_csv_contents(run_dir):
    text = (run_dir / "evaluation.csv").read_text()
    for scheme in ("perfect_csi", "pilot_baseline", "model_based",
                   "jsd_agent_0", "jsd_agent_3"):
        assert scheme in text


def test_run_is_deterministic(tmp_path, small_config, run_dir):
    out2 = tmp_path / "again"
    assert pipeline.run_pipeline(small_config, str(out2), threads=4) == "formed"
    for name in sorted(os.listdir(run_dir)):
        a = (run_dir / name).read_bytes()
        b = (out2 / name).read_bytes()
        assert a == b, f"{name} differs between identical runs"


def test_standalone_single_uav(tmp_path):
    base = ExperimentConfig()
    cfg = dataclasses.replace(
        base, n_uavs=1,
        scene=dataclasses.replace(base.scene, num_regions=1),
        samples_per_uav=40,
        train=dataclasses.replace(base.train, rounds=10, batch_size=16,
                                  gen_hidden=(8, 8), disc_hidden=(8, 8)),
        rate_eval=dataclasses.replace(base.rate_eval, predictor_pool=200,
                                      ue_density_per_m2=0.002),
        eval=dataclasses.replace(base.eval, global_reference_size=40))
    out = tmp_path / "solo"
    status = pipeline.run_pipeline(cfg, str(out))
    assert status == "standalone"
    names = set(os.listdir(out))
    assert "graph.txt" not in names          # formation skipped
    assert "evaluation.csv" in names


def test_infeasible_formation_stops_pipeline(tmp_path, small_config):
    cfg = dataclasses.replace(
        small_config,
        a2a=dataclasses.replace(small_config.a2a, max_power_dbm=-110.0))
    out = tmp_path / "infeasible"
    assert pipeline.run_pipeline(cfg, str(out)) == "infeasible"
    names = set(os.listdir(out))
    assert "formation.csv" in names and "manifest.txt" in names
    assert "history.csv" not in names


def test_stage_error_wraps_cause(tmp_path, small_config, monkeypatch):
    def boom(config, out_dir):
        raise RuntimeError("synthetic failure")
    monkeypatch.setattr(pipeline, "stage_scene", boom)
    with pytest.raises(pipeline.StageError) as exc:
        pipeline.run_pipeline(small_config, str(tmp_path / "broken"))
    assert exc.value.stage == "scene"


def test_global_reference_size(small_config, tmp_path):
    scene = pipeline.stage_scene(small_config, str(tmp_path))
    datasets = {}
    from uavchan import estimation
    geometry = small_config.geometry()
    for i in range(small_config.n_uavs):
        datasets[i] = estimation.collect_dataset(
            scene, geometry, i, scene.regions[i],
            small_config.time_window_s, 50, 1.0, 1e-6, small_config.seed)
    ref = pipeline.global_reference(small_config, scene, datasets)
    assert ref.shape == (150, 5)  # capped at the configured limit
    assert np.all(np.abs(ref) <= 1.0 + 1e-12)


def test_sweep_eta(tmp_path, small_config):
    path = pipeline.sweep(small_config, "eta", [0.6, 1.0, 1.4],
                          str(tmp_path))
    text = open(path).read()
    assert text.startswith("eta,T,p_coverage,T_G,p_sup,status")
    assert "unattainable" in text or "ok" in text
    with pytest.raises(ConfigError):
        pipeline.sweep(small_config, "eta", [], str(tmp_path))
    with pytest.raises(ConfigError):
        pipeline.sweep(small_config, "power", [1.0], str(tmp_path))


def test_sweep_size_reports_larger_rings(tmp_path, small_config):
    path = pipeline.sweep(small_config, "size", [4, 8], str(tmp_path))
    lines = open(path).read().strip().split("\n")
    assert any(line.startswith("4,") for line in lines[1:])
    assert any(line.startswith("8,") for line in lines[1:])


# -- CLI -------------------------------------------------------------------------

def test_cli_run_and_exit_codes(tmp_path, small_config):
    cfg_path = tmp_path / "cfg.yaml"
    save_config(small_config, cfg_path)
    out = tmp_path / "out"
    rc = cli.main(["run", "--config", str(cfg_path), "--out", str(out)])
    assert rc == 0
    assert (out / "manifest.txt").exists()


def test_cli_stage_chain(tmp_path, small_config):
    cfg_path = tmp_path / "cfg.yaml"
    save_config(small_config, cfg_path)
    out = tmp_path / "out"
    for sub in ("scene", "collect", "form", "converge", "train", "evaluate"):
        assert cli.main([sub, "--config", str(cfg_path),
                         "--out", str(out)]) == 0
    assert (out / "evaluation.csv").exists()


def test_cli_infeasible_exit_code(tmp_path, small_config):
    cfg = dataclasses.replace(
        small_config,
        a2a=dataclasses.replace(small_config.a2a, max_power_dbm=-110.0))
    cfg_path = tmp_path / "cfg.yaml"
    save_config(cfg, cfg_path)
    out = tmp_path / "out"
    assert cli.main(["scene", "--config", str(cfg_path),
                     "--out", str(out)]) == 0
    assert cli.main(["form", "--config", str(cfg_path),
                     "--out", str(out)]) == 2


def test_cli_error_exit_code(tmp_path):
    rc = cli.main(["train", "--out", str(tmp_path / "nothing-here")])
    assert rc == 1


def test_cli_seed_override(tmp_path, small_config):
    cfg_path = tmp_path / "cfg.yaml"
    save_config(small_config, cfg_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    assert cli.main(["scene", "--config", str(cfg_path), "--out",
                     str(out1)]) == 0
    assert cli.main(["scene", "--config", str(cfg_path), "--seed", "99",
                     "--out", str(out2)]) == 0
    assert (out1 / "scene.txt").read_text() != (out2 / "scene.txt").read_text()


def test_cli_sweep(tmp_path):
    out = tmp_path / "sweep"
    rc = cli.main(["sweep", "--axis", "eta", "--values", "0.6,1.4",
                   "--out", str(out)])
    assert rc == 0
    assert (out / "sweep_eta.csv").exists()
