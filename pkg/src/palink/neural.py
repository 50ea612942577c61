"""Minimal dense neural-network engine.

Each layer is Dense -> BatchNorm -> activation (ReLU on hidden layers,
sigmoid on the output layer).  Backpropagation is exact, including the
batch-statistics terms of batch normalization, and is verified against
central finite differences in the test suite.  Optimization is standard
bias-corrected Adam.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

CHECKPOINT_MAGIC = b"PLNN"
CHECKPOINT_VERSION = 1

_ACTIVATIONS = ("relu", "sigmoid")


class TrainingDiverged(RuntimeError):
    pass


def relu(x):
    return np.maximum(x, 0.0)


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


@dataclass
class DenseBnLayer:
    """Dense weights plus batch-normalization state for one layer."""

    w: np.ndarray  # (fan_in, fan_out)
    b: np.ndarray  # (fan_out,)
    gamma: np.ndarray
    beta: np.ndarray
    run_mean: np.ndarray
    run_var: np.ndarray
    activation: str
    eps: float = 1e-5
    momentum: float = 0.1

    @property
    def fan_in(self) -> int:
        return self.w.shape[0]

    @property
    def fan_out(self) -> int:
        return self.w.shape[1]


@dataclass
class MlpNetwork:
    layers: list[DenseBnLayer]
    mode: str = "train"  # "train" | "inference"

    @property
    def input_dim(self) -> int:
        return self.layers[0].fan_in

    @property
    def output_dim(self) -> int:
        return self.layers[-1].fan_out

    def parameters(self) -> list[np.ndarray]:
        """Trainable arrays in a fixed order (w, b, gamma, beta per layer)."""
        params = []
        for layer in self.layers:
            params.extend([layer.w, layer.b, layer.gamma, layer.beta])
        return params


def init_network(dims: list[int], rng: np.random.Generator,
                 hidden_activation: str = "relu",
                 output_activation: str = "sigmoid") -> MlpNetwork:
    """Build a network with the given dimension chain.

    Weights are uniform with fan-in scaling, biases zero, gamma one,
    beta zero.
    """
    if len(dims) < 2:
        raise ValueError("need at least input and output dimensions")
    layers = []
    for i in range(len(dims) - 1):
        fan_in, fan_out = dims[i], dims[i + 1]
        bound = np.sqrt(1.0 / fan_in)
        act = output_activation if i == len(dims) - 2 else hidden_activation
        if act not in _ACTIVATIONS:
            raise ValueError(f"unknown activation {act!r}")
        layers.append(DenseBnLayer(
            w=rng.uniform(-bound, bound, size=(fan_in, fan_out)),
            b=np.zeros(fan_out),
            gamma=np.ones(fan_out),
            beta=np.zeros(fan_out),
            run_mean=np.zeros(fan_out),
            run_var=np.ones(fan_out),
            activation=act,
        ))
    return MlpNetwork(layers=layers)


def forward(net: MlpNetwork, x: np.ndarray, return_cache: bool = False):
    """Batched forward pass; x has shape (batch, input_dim).

    In train mode batch normalization uses batch statistics and updates the
    running averages; in inference mode it uses the stored running stats.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != net.input_dim:
        raise ValueError(f"input dim {x.shape[1]} != network input {net.input_dim}")
    caches = []
    h = x
    for layer in net.layers:
        z = h @ layer.w + layer.b
        if net.mode == "train":
            mean = z.mean(axis=0)
            var = z.var(axis=0)
            layer.run_mean = (1 - layer.momentum) * layer.run_mean + layer.momentum * mean
            layer.run_var = (1 - layer.momentum) * layer.run_var + layer.momentum * var
        else:
            mean, var = layer.run_mean, layer.run_var
        inv_std = 1.0 / np.sqrt(var + layer.eps)
        z_hat = (z - mean) * inv_std
        pre_act = layer.gamma * z_hat + layer.beta
        out = relu(pre_act) if layer.activation == "relu" else sigmoid(pre_act)
        if return_cache:
            caches.append((h, z_hat, inv_std, pre_act, out))
        h = out
    return (h, caches) if return_cache else h


def mse_loss(outputs: np.ndarray, labels: np.ndarray) -> float:
    """Mean over batch and output entries of the squared error."""
    outputs = np.atleast_2d(outputs)
    labels = np.atleast_2d(labels)
    if outputs.shape != labels.shape:
        raise ValueError(f"shape mismatch {outputs.shape} vs {labels.shape}")
    return float(np.mean((outputs - labels) ** 2))


def mse_loss_grad(outputs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    """d loss / d outputs for :func:`mse_loss`."""
    outputs = np.atleast_2d(outputs)
    labels = np.atleast_2d(np.asarray(labels, dtype=float))
    return 2.0 * (outputs - labels) / outputs.size


def backward(net: MlpNetwork, caches, d_out: np.ndarray) -> list[np.ndarray]:
    """Gradients for every trainable array, matching ``net.parameters()``.

    ``caches`` comes from ``forward(..., return_cache=True)`` and must be
    from the same mode the gradient is wanted in: train-mode gradients
    include the batch-statistics terms, inference-mode gradients treat the
    running stats as constants.
    """
    grads: list[np.ndarray] = []
    d_h = np.atleast_2d(d_out)
    train = net.mode == "train"
    for layer, (h_in, z_hat, inv_std, pre_act, out) in zip(
            reversed(net.layers), reversed(caches)):
        if layer.activation == "relu":
            d_pre = d_h * (pre_act > 0)
        else:
            d_pre = d_h * out * (1.0 - out)
        d_gamma = np.sum(d_pre * z_hat, axis=0)
        d_beta = np.sum(d_pre, axis=0)
        d_zhat = d_pre * layer.gamma
        if train:
            n = d_zhat.shape[0]
            d_z = (inv_std / n) * (
                n * d_zhat
                - np.sum(d_zhat, axis=0)
                - z_hat * np.sum(d_zhat * z_hat, axis=0)
            )
        else:
            d_z = d_zhat * inv_std
        d_w = h_in.T @ d_z
        d_b = np.sum(d_z, axis=0)
        d_h = d_z @ layer.w.T
        grads = [d_w, d_b, d_gamma, d_beta] + grads
    return grads


@dataclass
class AdamState:
    lr: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)


def adam_step(state: AdamState, params: list[np.ndarray], grads: list[np.ndarray]) -> None:
    """One bias-corrected Adam update, in place on ``params``."""
    if len(params) != len(grads):
        raise ValueError("params/grads length mismatch")
    if not state.m:
        state.m = [np.zeros_like(p) for p in params]
        state.v = [np.zeros_like(p) for p in params]
    state.t += 1
    b1t = 1.0 - state.beta1**state.t
    b2t = 1.0 - state.beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= state.beta1
        m += (1 - state.beta1) * g
        v *= state.beta2
        v += (1 - state.beta2) * g * g
        p -= state.lr * (m / b1t) / (np.sqrt(v / b2t) + state.eps)


@dataclass
class TrainResult:
    loss_trace: list[float]
    val_trace: list[float]


def train(net: MlpNetwork, inputs: np.ndarray, labels: np.ndarray, *,
          epochs: int, batch_size: int, rng: np.random.Generator,
          state: AdamState | None = None, shuffle: bool = True,
          val_fraction: float = 0.0) -> TrainResult:
    """Mini-batch Adam training; returns the per-epoch mean loss trace.

    The network is left in inference mode.  A NaN loss aborts with
    diagnostics.
    """
    inputs = np.asarray(inputs, dtype=float)
    labels = np.asarray(labels, dtype=float)
    if len(inputs) == 0:
        raise ValueError("empty dataset")
    if state is None:
        state = AdamState()
    n_val = int(round(val_fraction * len(inputs)))
    if n_val > 0:
        val_x, val_y = inputs[:n_val], labels[:n_val]
        inputs, labels = inputs[n_val:], labels[n_val:]
    n = len(inputs)
    params = net.parameters()
    loss_trace, val_trace = [], []
    for epoch in range(epochs):
        order = rng.permutation(n) if shuffle else np.arange(n)
        net.mode = "train"
        epoch_losses = []
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            out, caches = forward(net, inputs[idx], return_cache=True)
            loss = mse_loss(out, labels[idx])
            if not np.isfinite(loss):
                raise TrainingDiverged(
                    f"loss became {loss} at epoch {epoch}, batch offset {start}")
            grads = backward(net, caches, mse_loss_grad(out, labels[idx]))
            adam_step(state, params, grads)
            epoch_losses.append(loss)
        loss_trace.append(float(np.mean(epoch_losses)))
        if n_val > 0:
            net.mode = "inference"
            val_trace.append(mse_loss(forward(net, val_x), val_y))
    net.mode = "inference"
    return TrainResult(loss_trace=loss_trace, val_trace=val_trace)


def predict_bits(net: MlpNetwork, inputs: np.ndarray) -> np.ndarray:
    """Inference forward pass thresholded at 0.5 (ties decide 0)."""
    prev = net.mode
    net.mode = "inference"
    out = forward(net, inputs)
    net.mode = prev
    return (out > 0.5).astype(np.uint8)


_ACT_CODES = {"relu": 0, "sigmoid": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


def save_checkpoint(net: MlpNetwork, path) -> None:
    """Versioned binary checkpoint: header with dims, little-endian f64."""
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<II", CHECKPOINT_VERSION, len(net.layers)))
        for layer in net.layers:
            f.write(struct.pack("<IIB dd", layer.fan_in, layer.fan_out,
                                _ACT_CODES[layer.activation], layer.eps, layer.momentum))
            for arr in (layer.w, layer.b, layer.gamma, layer.beta,
                        layer.run_mean, layer.run_var):
                f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_checkpoint(path) -> MlpNetwork:
    with open(path, "rb") as f:
        data = f.read()
    if data[:4] != CHECKPOINT_MAGIC:
        raise ValueError("not a network checkpoint")
    version, n_layers = struct.unpack_from("<II", data, 4)
    if version != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {version}")
    offset = 12
    layers = []
    for _ in range(n_layers):
        fan_in, fan_out, act, eps, momentum = struct.unpack_from("<IIB dd", data, offset)
        offset += struct.calcsize("<IIB dd")
        arrays = []
        for size in (fan_in * fan_out, fan_out, fan_out, fan_out, fan_out, fan_out):
            arr = np.frombuffer(data, dtype="<f8", count=size, offset=offset).copy()
            offset += size * 8
            arrays.append(arr)
        w, b, gamma, beta, run_mean, run_var = arrays
        layers.append(DenseBnLayer(
            w=w.reshape(fan_in, fan_out), b=b, gamma=gamma, beta=beta,
            run_mean=run_mean, run_var=run_var,
            activation=_ACT_NAMES[act], eps=eps, momentum=momentum))
    if offset != len(data):
        raise ValueError("trailing or missing bytes in checkpoint")
    return MlpNetwork(layers=layers, mode="inference")
