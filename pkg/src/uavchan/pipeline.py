"""Experiment orchestration: scene -> collect -> form -> train -> evaluate.

Every stage writes its artifacts into the output directory; `run` chains all
stages and finishes with a digest manifest. Re-running with the same config
reproduces byte-identical numeric CSV content.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass

import numpy as np

from . import airlink, convergence, estimation, formation, gan, metrics, netgraph, nnet
from .channel import generate_scene, load_scene, save_scene
from .config import emit_config, save_config
from .errors import ConfigError


class StageError(RuntimeError):
    def __init__(self, stage, cause):
        super().__init__(f"stage {stage!r} failed: {cause}")
        self.stage = stage


@dataclass
class TrainedGenerator:
    """Duck-typed stand-in for a GanAgent when only sampling is needed."""

    id: int
    generator: nnet.DenseNet
    latent_dim: int
    codec: gan.SampleCodec


def _scene_path(out_dir):
    return os.path.join(out_dir, "scene.txt")


def hover_positions(scene):
    return {i: metrics.region_hover_position(scene, i)
            for i in range(len(scene.regions))}


def stage_scene(config, out_dir):
    scene = generate_scene(config.scene, config.seed)
    save_scene(scene, _scene_path(out_dir))
    return scene


def stage_collect(config, out_dir, scene=None):
    scene = scene or load_scene(_scene_path(out_dir))
    geometry = config.geometry()
    datasets = {}
    for i in range(config.n_uavs):
        ds = estimation.collect_dataset(
            scene, geometry, i, scene.regions[i], config.time_window_s,
            config.samples_per_uav, config.radio.pilot_power_w,
            config.radio.ue_noise_w, config.seed)
        estimation.save_dataset(ds, os.path.join(out_dir, f"dataset_{i}.bin"))
        estimation.dataset_to_csv(ds, os.path.join(out_dir, f"dataset_{i}.csv"))
        datasets[i] = ds
    return datasets


def stage_form(config, out_dir, scene=None):
    scene = scene or load_scene(_scene_path(out_dir))
    positions = hover_positions(scene)
    cfg = config.a2a_config()
    airlink.export_link_table(positions, cfg, config.samples_per_uav,
                              os.path.join(out_dir, "links.csv"))
    result = formation.form_network(positions, cfg, config.samples_per_uav)
    formation.export_formation(result, positions, cfg, config.samples_per_uav,
                               os.path.join(out_dir, "formation.csv"))
    if result.status == "formed":
        netgraph.save_edge_list(result.graph,
                                os.path.join(out_dir, "graph.txt"))
    return result


def stage_converge(config, out_dir, graph=None):
    conv = config.convergence
    if config.n_uavs < 2:
        raise ConfigError("convergence analytics need at least two UAVs")
    params = convergence.ring_params(
        config.n_uavs, config.share_ratio,
        local_train_time_s=conv.local_train_time_s,
        deadline_s=config.a2a.deadline_s, confidence=conv.confidence)
    return convergence.export_report(
        params, conv.report_rounds, conv.mc_trials, config.seed,
        os.path.join(out_dir, "convergence.csv"))


def _codec_for(scene, config, agent_id=None):
    uav_pos = (metrics.region_hover_position(scene, agent_id)
               if agent_id is not None else None)
    return gan.SampleCodec.for_scene(scene, config.time_window_s, uav_pos)


def build_agents(config, scene, datasets, graph):
    encoded = {}
    codecs = {}
    for i, ds in datasets.items():
        codec = _codec_for(scene, config, i)
        codecs[i] = codec
        encoded[i] = codec.encode_many(ds.samples)
    agents = gan.make_agents(encoded, graph, None, config.train_config())
    for i, agent in agents.items():
        agent.codec = codecs[i]
    return agents


def global_reference(config, scene, datasets):
    """Encoded pool of all real samples, for JSD-to-global evaluations."""
    parts = []
    for i, ds in datasets.items():
        codec = _codec_for(scene, config, i)
        parts.append(codec.encode_many(ds.samples))
    pool = np.vstack(parts)
    limit = config.eval.global_reference_size
    if len(pool) > limit:
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0x61B]))
        pool = pool[rng.choice(len(pool), size=limit, replace=False)]
    return pool


def stage_train(config, out_dir, scene=None, datasets=None, graph=None):
    scene = scene or load_scene(_scene_path(out_dir))
    if datasets is None:
        datasets = {
            i: estimation.load_dataset(os.path.join(out_dir, f"dataset_{i}.bin"))
            for i in range(config.n_uavs)}
    if graph is None and config.n_uavs > 1:
        graph = netgraph.load_edge_list(os.path.join(out_dir, "graph.txt"))
    agents = build_agents(config, scene, datasets, graph)
    reference = global_reference(config, scene, datasets)
    binning = config.binning()
    tc = config.train_config()

    def eval_hook(agents_now, _round):
        return {i: metrics.jsd(gan.sample_generator(a, len(reference),
                                                    config.seed),
                               reference, binning)
                for i, a in agents_now.items()}

    history = gan.train(agents, tc, eval_hook if tc.eval_every else None)
    history.to_csv(os.path.join(out_dir, "history.csv"))
    for i, agent in agents.items():
        nnet.save_checkpoint(agent.generator,
                             os.path.join(out_dir, f"generator_{i}.ckpt"),
                             step=agent.g_state.step)
        nnet.save_checkpoint(agent.discriminator,
                             os.path.join(out_dir, f"discriminator_{i}.ckpt"),
                             step=agent.d_state.step)
    return agents, history


def load_trained_generators(config, out_dir, scene):
    out = {}
    for i in range(config.n_uavs):
        net, _ = nnet.load_checkpoint(os.path.join(out_dir,
                                                   f"generator_{i}.ckpt"))
        out[i] = TrainedGenerator(id=i, generator=net,
                                  latent_dim=config.train.latent_dim,
                                  codec=_codec_for(scene, config, i))
    return out


def stage_evaluate(config, out_dir, scene=None, datasets=None, agents=None):
    scene = scene or load_scene(_scene_path(out_dir))
    if datasets is None:
        datasets = {
            i: estimation.load_dataset(os.path.join(out_dir, f"dataset_{i}.bin"))
            for i in range(config.n_uavs)}
    if agents is None:
        agents = load_trained_generators(config, out_dir, scene)
    geometry = config.geometry()
    rate_cfg = config.rate_eval_config()
    binning = config.binning()
    reference = global_reference(config, scene, datasets)
    placements = metrics.sample_placements(scene, config.time_window_s,
                                           rate_cfg, config.seed)
    predictors = {
        i: metrics.GainPredictor(a, pool_size=config.rate_eval.predictor_pool,
                                 seed=config.seed)
        for i, a in agents.items()}
    jsd_per_agent = {
        i: metrics.jsd(gan.sample_generator(a, len(reference), config.seed),
                       reference, binning)
        for i, a in agents.items()}
    rows = [
        ("perfect_csi", config.n_uavs,
         metrics.rate_perfect_csi(scene, geometry, placements, rate_cfg),
         None, config.seed),
        ("pilot_baseline", config.n_uavs,
         metrics.rate_pilot_baseline(scene, geometry, placements, rate_cfg),
         None, config.seed),
        ("model_based", config.n_uavs,
         metrics.rate_model_based(scene, geometry, predictors, placements,
                                  rate_cfg),
         float(np.mean(list(jsd_per_agent.values()))), config.seed),
    ]
    rows.extend((f"jsd_agent_{i}", config.n_uavs, None, jsd_per_agent[i],
                 config.seed) for i in sorted(jsd_per_agent))
    metrics.export_rate_table(rows, os.path.join(out_dir, "evaluation.csv"))
    return rows


def write_manifest(config, out_dir):
    lines = ["# uavchan run manifest", "[files]"]
    for name in sorted(os.listdir(out_dir)):
        if name == "manifest.txt":
            continue
        path = os.path.join(out_dir, name)
        if not os.path.isfile(path):
            continue
        with open(path, "rb") as fh:
            digest = hashlib.sha256(fh.read()).hexdigest()
        lines.append(f"sha256 {digest}  {name}")
    lines.append("[config]")
    lines.extend(emit_config(config).rstrip("\n").split("\n"))
    with open(os.path.join(out_dir, "manifest.txt"), "w") as fh:
        fh.write("\n".join(lines) + "\n")


def run_pipeline(config, out_dir, threads=1):
    """Full campaign. Returns 'formed', 'standalone', or 'infeasible'.

    `threads` is accepted for interface compatibility; every stage is
    deterministic and produces identical outputs for any value.
    """
    del threads
    os.makedirs(out_dir, exist_ok=True)
    save_config(config, os.path.join(out_dir, "config_echo.yaml"))

    def guarded(stage, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except StageError:
            raise
        except Exception as exc:
            raise StageError(stage, exc) from exc

    scene = guarded("scene", stage_scene, config, out_dir)
    datasets = guarded("collect", stage_collect, config, out_dir, scene)
    graph = None
    status = "standalone"
    if config.n_uavs > 1:
        result = guarded("form", stage_form, config, out_dir, scene)
        if result.status != "formed":
            write_manifest(config, out_dir)
            return "infeasible"
        graph = result.graph
        status = "formed"
        guarded("converge", stage_converge, config, out_dir, graph)
    agents, _ = guarded("train", stage_train, config, out_dir, scene,
                        datasets, graph)
    guarded("evaluate", stage_evaluate, config, out_dir, scene, datasets,
            agents)
    write_manifest(config, out_dir)
    return status


def sweep(config, axis, values, out_dir):
    """Convergence analytics over a share-ratio or network-size axis.

    Emits one combined CSV; per-value regime failures are flagged in the
    output instead of aborting the sweep.
    """
    import csv

    if not values:
        raise ConfigError("sweep needs at least one value")
    if axis not in ("eta", "size"):
        raise ConfigError(f"unknown sweep axis {axis!r}")
    os.makedirs(out_dir, exist_ok=True)
    conv = config.convergence
    path = os.path.join(out_dir, f"sweep_{axis}.csv")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([axis, "T", "p_coverage", "T_G", "p_sup", "status"])
        for value in values:
            eta = value if axis == "eta" else config.share_ratio
            n = config.n_uavs if axis == "eta" else int(value)
            try:
                params = convergence.ring_params(
                    n, eta, local_train_time_s=conv.local_train_time_s,
                    deadline_s=config.a2a.deadline_s,
                    confidence=conv.confidence)
                t_g = convergence.confidence_iteration(params)
                for t in range(1, conv.report_rounds + 1):
                    p = convergence.coverage_probability(t, params)
                    writer.writerow([value, t, repr(p), "", "", "ok"])
                if isinstance(t_g, convergence.Unattainable):
                    writer.writerow([value, "", "", "", repr(t_g.p_sup),
                                     "unattainable"])
                else:
                    writer.writerow([value, "", "", t_g, "", "ok"])
            except Exception as exc:  # flagged, sweep continues
                writer.writerow([value, "", "", "", "", f"failed: {exc}"])
    return path
