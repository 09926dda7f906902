"""Distributed adversarial training with generated-sample exchange.

Each UAV trains a generator/discriminator pair on a mixture of its real
samples and generated samples received from its in-neighbors over the formed
ring. Rounds are synchronous: every agent generates and sends before any
agent updates. The only payload type crossing agent boundaries is
GeneratedBatch, which carries generated samples and nothing else.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import nnet
from .channel import ChannelSample
from .errors import ConfigError, DomainError, ProtocolError

DB_FLOOR_MARGIN = 10.0
DB_CEILING_MARGIN = 10.0


def round_half_up(x):
    return int(math.floor(x + 0.5))


# -- sample normalization ------------------------------------------------------

@dataclass
class SampleCodec:
    """Maps ChannelSamples to unit-scale 5-vectors and back.

    Coordinates: UE ground position pair and time, min-max scaled to
    [-1, 1]; gain as (magnitude in dB clamped to [db_floor, db_ceiling] then
    scaled to [-1, 1], phase / pi). NLOS maps to the dB floor. Out-of-range
    raw values are clamped and counted, not rejected.
    """

    bounds: tuple          # (x_min, x_max, y_min, y_max)
    time_window: tuple     # (t0, t1)
    db_floor: float
    db_ceiling: float
    uav_pos: tuple = (0.0, 0.0, 0.0)   # used to reconstruct decoded samples
    clamped: int = 0

    WIDTH = 5

    @classmethod
    def for_scene(cls, scene, time_window, uav_pos=None):
        b = scene.bounds
        max_dist = math.sqrt((b.x_max - b.x_min) ** 2
                             + (b.y_max - b.y_min) ** 2
                             + scene.uav_altitude ** 2)
        floor = (scene.reference_gain_db
                 - 10.0 * scene.pathloss_exponent * math.log10(max_dist)
                 - 4.0 * scene.shadowing_stddev_db - DB_FLOOR_MARGIN)
        ceiling = (scene.reference_gain_db
                   + 4.0 * scene.shadowing_stddev_db + DB_CEILING_MARGIN)
        if uav_pos is None:
            cx = 0.5 * (b.x_min + b.x_max)
            cy = 0.5 * (b.y_min + b.y_max)
            uav_pos = (cx, cy, scene.uav_altitude)
        return cls(bounds=b.as_tuple(), time_window=tuple(time_window),
                   db_floor=floor, db_ceiling=ceiling,
                   uav_pos=tuple(uav_pos))

    def _scale(self, v, lo, hi):
        n = 2.0 * (v - lo) / (hi - lo) - 1.0
        if n < -1.0 or n > 1.0:
            self.clamped += 1
            n = min(1.0, max(-1.0, n))
        return n

    def encode(self, sample):
        x_min, x_max, y_min, y_max = self.bounds
        t0, t1 = self.time_window
        mag = abs(sample.gain)
        if sample.los and mag > 0:
            db = 20.0 * math.log10(mag)
            nmag = self._scale(db, self.db_floor, self.db_ceiling)
            nphase = math.atan2(sample.gain.imag, sample.gain.real) / math.pi
        else:
            nmag = -1.0
            nphase = 0.0
        return np.array([
            self._scale(sample.ue_pos[0], x_min, x_max),
            self._scale(sample.ue_pos[1], y_min, y_max),
            self._scale(sample.t, t0, t1),
            nmag,
            nphase,
        ])

    def encode_many(self, samples):
        return np.vstack([self.encode(s) for s in samples])

    def decode(self, vec):
        x_min, x_max, y_min, y_max = self.bounds
        t0, t1 = self.time_window

        def unscale(n, lo, hi):
            return lo + (min(1.0, max(-1.0, n)) + 1.0) * (hi - lo) / 2.0

        ue = (unscale(vec[0], x_min, x_max), unscale(vec[1], y_min, y_max), 0.0)
        t = unscale(vec[2], t0, t1)
        if vec[3] <= -1.0 + 1e-9:
            gain, los = 0j, False
        else:
            mag = 10.0 ** (unscale(vec[3], self.db_floor, self.db_ceiling) / 20.0)
            phase = max(-1.0, min(1.0, vec[4])) * math.pi
            gain = mag * complex(math.cos(phase), math.sin(phase))
            los = True
        return ChannelSample(uav_pos=self.uav_pos, ue_pos=ue, t=t,
                             gain=gain, los=los)


# -- protocol types -------------------------------------------------------------

@dataclass(frozen=True)
class GeneratedBatch:
    """The only inter-agent payload: generated samples, nothing else."""

    sender: int
    samples: np.ndarray


@dataclass(frozen=True)
class TrainConfig:
    batch_size: int = 64            # u
    rounds: int = 1000
    share_ratio: float = 1.4        # eta
    latent_dim: int = 8
    gen_hidden: tuple = (64, 64)
    disc_hidden: tuple = (64, 64)
    learning_rate: float = nnet.DEFAULT_LR
    beta1: float = nnet.DEFAULT_BETA1
    beta2: float = nnet.DEFAULT_BETA2
    disc_steps: int = 3
    seed: int = 0
    eval_every: int = 0             # 0 disables periodic evaluation

    def __post_init__(self):
        if self.batch_size < 8:
            raise ConfigError("batch size must be >= 8")
        if not self.share_ratio > 0:
            raise ConfigError("share ratio must be positive")
        if self.rounds < 0:
            raise ConfigError("round count must be >= 0")


@dataclass
class GanAgent:
    id: int
    generator: nnet.DenseNet
    discriminator: nnet.DenseNet
    g_state: nnet.AdamState
    d_state: nnet.AdamState
    data: np.ndarray               # encoded local dataset, (S_i, 5)
    in_neighbors: tuple
    out_neighbors: tuple
    latent_dim: int
    rng: np.random.Generator
    codec: SampleCodec

    @property
    def dataset_size(self):
        return len(self.data)


def mixture_weights(local_size, neighbor_sizes, share_ratio):
    """pi_i = S_i / (S_i + eta sum S_j); pi_ij = eta S_j / (same)."""
    if local_size <= 0 or any(s <= 0 for s in neighbor_sizes.values()):
        raise DomainError("dataset sizes must be positive")
    if not share_ratio > 0:
        raise DomainError("share ratio must be positive")
    denom = local_size + share_ratio * sum(neighbor_sizes.values())
    pi_local = local_size / denom
    pi_neighbors = {j: share_ratio * s / denom
                    for j, s in neighbor_sizes.items()}
    return pi_local, pi_neighbors


def make_agent(agent_id, encoded_data, in_neighbors, out_neighbors, codec, cfg):
    sample_width = np.asarray(encoded_data).shape[1]
    seq = np.random.SeedSequence([int(cfg.seed), int(agent_id), 0xA9E7])
    gen_seed, disc_seed, stream_seed = seq.generate_state(3)
    gen = nnet.init_net((cfg.latent_dim, *cfg.gen_hidden, sample_width),
                        "identity", gen_seed)
    disc = nnet.init_net((sample_width, *cfg.disc_hidden, 1),
                         "logistic", disc_seed)
    return GanAgent(
        id=int(agent_id), generator=gen, discriminator=disc,
        g_state=nnet.adam_init(gen.params(), lr=cfg.learning_rate,
                               beta1=cfg.beta1, beta2=cfg.beta2),
        d_state=nnet.adam_init(disc.params(), lr=cfg.learning_rate,
                               beta1=cfg.beta1, beta2=cfg.beta2),
        data=np.asarray(encoded_data, dtype=np.float64),
        in_neighbors=tuple(sorted(in_neighbors)),
        out_neighbors=tuple(sorted(out_neighbors)),
        latent_dim=cfg.latent_dim,
        rng=np.random.default_rng(stream_seed),
        codec=codec,
    )


def make_agents(encoded_datasets, graph, codec, cfg):
    """One agent per dataset; neighbor sets from the graph (None = isolated)."""
    agents = {}
    for agent_id in sorted(encoded_datasets):
        if graph is None:
            n_in, n_out = (), ()
        else:
            n_in = graph.in_neighbors(agent_id)
            n_out = graph.out_neighbors(agent_id)
        agents[agent_id] = make_agent(agent_id, encoded_datasets[agent_id],
                                      n_in, n_out, codec, cfg)
    return agents


def neighbor_batch_counts(agent, agents, batch_size, share_ratio):
    """(n_real, {j: n_j}) with fractional counts rounded half-up and the
    residual assigned to the local-real share so the mix totals u."""
    sizes = {j: agents[j].dataset_size for j in agent.in_neighbors}
    _, pi_n = mixture_weights(agent.dataset_size, sizes, share_ratio) \
        if sizes else (1.0, {})
    counts = {j: round_half_up(pi_n[j] * batch_size) for j in sizes}
    n_real = batch_size - sum(counts.values())
    if n_real < 0:
        raise ProtocolError("neighbor shares exceed the batch size")
    return n_real, counts


def local_value(discriminator, mix_batch, generated_batch):
    """Empirical value: mean log D over the mixture batch plus
    mean log(1 - D) over the generated batch."""
    d_mix = nnet.forward(discriminator, mix_batch)
    d_gen = nnet.forward(discriminator, generated_batch)
    return float(np.log(d_mix).mean() + np.log(1.0 - d_gen).mean())


@dataclass
class RoundMetrics:
    round_index: int
    value: dict                 # agent id -> V_i
    mean_d_real: dict
    mean_d_fake: dict
    samples_sent: dict          # edge (i, j) -> generated samples delivered
    jsd: dict = field(default_factory=dict)   # agent id -> JSD when evaluated


@dataclass
class TrainingHistory:
    rounds: list

    def __len__(self):
        return len(self.rounds)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["round", "agent", "value", "mean_d_real",
                             "mean_d_fake", "jsd_to_global"])
            for rm in self.rounds:
                for aid in sorted(rm.value):
                    writer.writerow([
                        rm.round_index, aid, repr(rm.value[aid]),
                        repr(rm.mean_d_real[aid]), repr(rm.mean_d_fake[aid]),
                        repr(rm.jsd[aid]) if aid in rm.jsd else "",
                    ])


def train_round(agents, cfg, round_index):
    """One synchronous round: generate, exchange, then update every agent."""
    u = cfg.batch_size
    ids = sorted(agents)

    # (a)/(b) every agent generates before anyone updates
    latents = {}
    fakes = {}
    for aid in ids:
        a = agents[aid]
        z = a.rng.standard_normal((u, a.latent_dim))
        latents[aid] = z
        fakes[aid] = nnet.forward(a.generator, z)

    # (c) exchange: receiver-side counts decide each payload size
    inbox = {aid: [] for aid in ids}
    samples_sent = {}
    for aid in ids:
        receiver = agents[aid]
        for j in receiver.in_neighbors:
            if j not in agents:
                raise ProtocolError(f"agent {aid} expects unknown neighbor {j}")
        _, counts = neighbor_batch_counts(receiver, agents, u,
                                          cfg.share_ratio)
        for j in receiver.in_neighbors:
            batch = GeneratedBatch(sender=j, samples=fakes[j][:counts[j]])
            inbox[aid].append(batch)
            samples_sent[(j, aid)] = counts[j]

    # (d)/(e) per-agent updates
    value, mean_real, mean_fake = {}, {}, {}
    for aid in ids:
        a = agents[aid]
        senders = {b.sender for b in inbox[aid]}
        if senders != set(a.in_neighbors):
            raise ProtocolError(
                f"agent {aid} inbox {sorted(senders)} != neighbors "
                f"{list(a.in_neighbors)}")
        n_real, _ = neighbor_batch_counts(a, agents, u, cfg.share_ratio)
        idx = a.rng.choice(a.dataset_size, size=n_real, replace=False)
        parts = [a.data[idx]]
        parts.extend(b.samples for b in sorted(inbox[aid],
                                               key=lambda b: b.sender))
        mix = np.vstack(parts)
        fake = fakes[aid]

        for _ in range(cfg.disc_steps):
            batch = np.vstack([mix, fake])
            y, cache = nnet.forward_pass(a.discriminator, batch)
            y_mix, y_fake = y[:len(mix)], y[len(mix):]
            adjoint = np.vstack([1.0 / y_mix, -1.0 / (1.0 - y_fake)])
            adjoint /= len(batch)
            grads, _ = nnet.backprop(a.discriminator, cache, adjoint)
            nnet.opt_step(a.discriminator.params(), grads, a.d_state, "ascend")

        value[aid] = float(np.log(y_mix).mean() + np.log(1.0 - y_fake).mean())
        mean_real[aid] = float(y_mix.mean())
        mean_fake[aid] = float(y_fake.mean())

        # generator step against the freshly updated discriminator
        g_out, g_cache = nnet.forward_pass(a.generator, latents[aid])
        d_out, d_cache = nnet.forward_pass(a.discriminator, g_out)
        g_adjoint = (-1.0 / (1.0 - d_out)) / u
        _, d_input_adj = nnet.backprop(a.discriminator, d_cache, g_adjoint)
        g_grads, _ = nnet.backprop(a.generator, g_cache, d_input_adj)
        nnet.opt_step(a.generator.params(), g_grads, a.g_state, "descend")

    return RoundMetrics(round_index=round_index, value=value,
                        mean_d_real=mean_real, mean_d_fake=mean_fake,
                        samples_sent=samples_sent)


def train(agents, cfg, eval_hook=None):
    """Run cfg.rounds synchronous rounds; optional periodic evaluation.

    eval_hook(agents, round_index) -> {agent id: jsd} is called every
    cfg.eval_every rounds (and on the final round) when configured.
    """
    history = TrainingHistory(rounds=[])
    for r in range(cfg.rounds):
        metrics = train_round(agents, cfg, r)
        if eval_hook is not None and cfg.eval_every > 0 and (
                (r + 1) % cfg.eval_every == 0 or r == cfg.rounds - 1):
            metrics.jsd = eval_hook(agents, r)
        history.rounds.append(metrics)
    return history


def sample_generator(agent, count, seed):
    """Draw `count` generated samples (normalized space) from a fixed seed."""
    rng = np.random.default_rng(np.random.SeedSequence([int(seed),
                                                        int(agent.id), 0x5A3]))
    z = rng.standard_normal((count, agent.latent_dim))
    return nnet.forward(agent.generator, z)


def nash_indicator(mean_d_values, lo=0.4, hi=0.6):
    """True when every mean discriminator output sits in [lo, hi]."""
    return all(lo <= v <= hi for v in mean_d_values)
