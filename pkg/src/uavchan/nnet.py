"""Minimal dense network engine with reverse-mode gradients and Adam.

Hidden layers use a leaky rectifier (slope 0.2); the output layer is either
identity or logistic. Everything is float64 numpy, deterministic given
seeds. This is the substrate for the generators and discriminators.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DomainError

LEAKY_SLOPE = 0.2
LOGISTIC_FLOOR = 1e-7

DEFAULT_LR = 2e-4
DEFAULT_BETA1 = 0.5
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8


@dataclass
class DenseNet:
    layer_sizes: tuple
    output: str                 # "identity" | "logistic"
    weights: list               # per layer: (fan_in, fan_out) float64
    biases: list                # per layer: (fan_out,) float64

    @property
    def in_width(self):
        return self.layer_sizes[0]

    @property
    def out_width(self):
        return self.layer_sizes[-1]

    def params(self):
        out = []
        for w, b in zip(self.weights, self.biases):
            out.extend((w, b))
        return out


def init_net(layer_sizes, output, seed):
    """Glorot-uniform weights (bound sqrt(6/(fan_in+fan_out))), zero biases."""
    if len(layer_sizes) < 2:
        raise ConfigError("need at least input and output layer sizes")
    if output not in ("identity", "logistic"):
        raise ConfigError(f"unknown output activation {output!r}")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0xDededE]))
    weights, biases = [], []
    for fan_in, fan_out in zip(layer_sizes[:-1], layer_sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return DenseNet(layer_sizes=tuple(int(s) for s in layer_sizes),
                    output=output, weights=weights, biases=biases)


def _leaky(x):
    return np.where(x >= 0, x, LEAKY_SLOPE * x)


def _leaky_grad(x):
    return np.where(x >= 0, 1.0, LEAKY_SLOPE)


def forward_pass(net, x):
    """Forward the batch, returning (output, cache for backprop)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != net.in_width:
        raise DomainError(
            f"input width {x.shape} does not match first layer {net.in_width}")
    activations = [x]
    pre = []
    h = x
    last = len(net.weights) - 1
    for li, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        pre.append(z)
        if li < last:
            h = _leaky(z)
        elif net.output == "logistic":
            h = 1.0 / (1.0 + np.exp(-z))
            h = np.clip(h, LOGISTIC_FLOOR, 1.0 - LOGISTIC_FLOOR)
        else:
            h = z
        activations.append(h)
    return h, (activations, pre)


def forward(net, x):
    return forward_pass(net, x)[0]


def backprop(net, cache, out_adjoint):
    """Raw chain rule: loss = sum over the batch of adjoint-weighted outputs.

    Returns (param grads as a flat [dW0, db0, dW1, db1, ...] list,
    per-sample input adjoints). No batch normalization is applied; scale the
    adjoints for mean losses.
    """
    activations, pre = cache
    delta = np.asarray(out_adjoint, dtype=np.float64)
    if delta.shape != activations[-1].shape:
        raise DomainError("adjoint shape does not match the network output")
    if net.output == "logistic":
        y = activations[-1]
        delta = delta * y * (1.0 - y)
    grads = [None] * (2 * len(net.weights))
    for li in range(len(net.weights) - 1, -1, -1):
        grads[2 * li] = activations[li].T @ delta
        grads[2 * li + 1] = delta.sum(axis=0)
        delta = delta @ net.weights[li].T
        if li > 0:
            delta = delta * _leaky_grad(pre[li - 1])
    return grads, delta


def gradients(net, x, out_adjoint):
    """Gradients of the batch-mean loss given per-sample loss adjoints."""
    y, cache = forward_pass(net, x)
    scaled = np.asarray(out_adjoint, dtype=np.float64) / len(y)
    grads, _ = backprop(net, cache, scaled)
    return grads


@dataclass
class AdamState:
    """First/second-moment accumulators shaped like the parameter list."""

    m: list
    v: list
    step: int = 0
    lr: float = DEFAULT_LR
    beta1: float = DEFAULT_BETA1
    beta2: float = DEFAULT_BETA2
    eps: float = DEFAULT_EPS


def adam_init(params, lr=DEFAULT_LR, beta1=DEFAULT_BETA1, beta2=DEFAULT_BETA2,
              eps=DEFAULT_EPS):
    return AdamState(m=[np.zeros_like(p) for p in params],
                     v=[np.zeros_like(p) for p in params],
                     lr=lr, beta1=beta1, beta2=beta2, eps=eps)


def opt_step(params, grads, state, direction):
    """In-place adaptive-moment update; direction is 'ascend' or 'descend'."""
    if direction not in ("ascend", "descend"):
        raise DomainError(f"unknown direction {direction!r}")
    if len(params) != len(grads) or len(params) != len(state.m):
        raise DomainError("parameter/gradient/state length mismatch")
    sign = 1.0 if direction == "ascend" else -1.0
    state.step += 1
    t = state.step
    for p, g, m, v in zip(params, grads, state.m, state.v):
        if p.shape != g.shape:
            raise DomainError("gradient shape mismatch")
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * g * g
        m_hat = m / (1.0 - state.beta1 ** t)
        v_hat = v / (1.0 - state.beta2 ** t)
        p += sign * state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# -- checkpoint format --------------------------------------------------------
#
# JSON header line (layer sizes, output activation, optimizer step count,
# parameter count) followed by the flat float64 parameter block.

def save_checkpoint(net, path, step=0):
    flat = np.concatenate([p.ravel() for p in net.params()])
    header = {
        "format": "uavchan-net-v1",
        "layer_sizes": list(net.layer_sizes),
        "output": net.output,
        "step": int(step),
        "param_count": int(flat.size),
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
        fh.write(flat.tobytes())


def load_checkpoint(path):
    with open(path, "rb") as fh:
        header = json.loads(fh.readline())
        if header.get("format") != "uavchan-net-v1":
            raise ConfigError(f"not a checkpoint file: {path}")
        flat = np.frombuffer(fh.read(), dtype=np.float64)
    if flat.size != header["param_count"]:
        raise ConfigError("checkpoint parameter block is truncated")
    sizes = header["layer_sizes"]
    weights, biases = [], []
    off = 0
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(flat[off:off + fan_in * fan_out]
                       .reshape(fan_in, fan_out).copy())
        off += fan_in * fan_out
        biases.append(flat[off:off + fan_out].copy())
        off += fan_out
    net = DenseNet(layer_sizes=tuple(sizes), output=header["output"],
                   weights=weights, biases=biases)
    return net, header["step"]
