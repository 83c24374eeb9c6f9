"""Feedforward softmax classifier trained with an adaptive-moment
optimizer using decoupled weight decay.

Parameters are stored as float32; every forward/backward pass and all
optimizer arithmetic run in float64 for reproducible accumulation. The
loss is categorical cross-entropy, optionally weighted per sample by a
fixed reward. ``loss_sign="verbatim"`` negates the reward-weighted loss
(kept only for fidelity experiments; it drives the likelihood the wrong
way and is not the default).
"""

from __future__ import annotations

import copy
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import BadMagic, Truncated, TrainingError, UnsupportedVersion

PROB_CLAMP = 1e-12
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

NET_MAGIC = b"NETV"
NET_VERSION = 1

PLAIN_CE = "plain-ce"
REWARD_CE = "reward-weighted-ce"


@dataclass
class NetworkLayout:
    input_dim: int
    hidden: tuple[int, ...] = (64,)
    classes: int = 2
    activation: str = "relu"

    def __post_init__(self):
        self.hidden = tuple(int(h) for h in self.hidden)
        if self.input_dim < 1 or self.classes < 2 or any(h < 1 for h in self.hidden):
            raise ValueError("all layer widths must be >= 1 and classes >= 2")
        if self.activation != "relu":
            raise ValueError(f"unsupported activation {self.activation!r}")

    @property
    def dims(self) -> tuple[int, ...]:
        return (self.input_dim, *self.hidden, self.classes)


@dataclass
class TrainConfig:
    batch_size: int = 8
    learning_rate: float = 2e-5
    weight_decay: float = 1e-6
    epochs: int = 20
    seed: int = 0
    loss: str = PLAIN_CE
    loss_sign: str = "fixed"  # fixed | verbatim

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be non-negative")
        if self.loss not in (PLAIN_CE, REWARD_CE):
            raise ValueError(f"unknown loss {self.loss!r}")
        if self.loss_sign not in ("fixed", "verbatim"):
            raise ValueError(f"unknown loss_sign {self.loss_sign!r}")


class Network:
    """Weights, biases, and optimizer state for one layout."""

    def __init__(self, layout: NetworkLayout, weights, biases):
        self.layout = layout
        self.weights = weights  # list of (fan_in, fan_out) float32
        self.biases = biases  # list of (fan_out,) float32
        self.step = 0
        self.m_state = [np.zeros(w.shape, dtype=np.float64) for w in weights] + [
            np.zeros(b.shape, dtype=np.float64) for b in biases
        ]
        self.v_state = [np.zeros_like(m) for m in self.m_state]
        self.loss_history: list[float] = []

    def clone(self) -> "Network":
        return copy.deepcopy(self)


def init(layout: NetworkLayout, seed: int) -> Network:
    """Fan-in-scaled uniform weight init, zero biases, deterministic per seed."""
    rng = np.random.Generator(np.random.PCG64(seed))
    weights, biases = [], []
    dims = layout.dims
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        limit = np.sqrt(6.0 / fan_in)
        weights.append(rng.uniform(-limit, limit, size=(fan_in, fan_out)).astype(np.float32))
        biases.append(np.zeros(fan_out, dtype=np.float32))
    return Network(layout, weights, biases)


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _forward_pass(weights, biases, X: np.ndarray):
    """Returns (probs, activations) with all arrays float64."""
    a = X
    acts = [a]
    last = len(weights) - 1
    for i, (W, b) in enumerate(zip(weights, biases)):
        z = a @ W + b
        a = _softmax(z) if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return a, acts


def forward(net: Network, x: np.ndarray) -> np.ndarray:
    """Probability vector (or matrix, for 2-D input) over the classes."""
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != net.layout.input_dim:
        raise ValueError(f"input has {X.shape[1]} features, expected {net.layout.input_dim}")
    if not np.isfinite(X).all():
        raise ValueError("non-finite input")
    w64 = [w.astype(np.float64) for w in net.weights]
    b64 = [b.astype(np.float64) for b in net.biases]
    probs, _ = _forward_pass(w64, b64, X)
    return probs[0] if single else probs


def loss_ce(probs: np.ndarray, gold: int) -> float:
    """-log probability of the gold class, clamped away from 0 and 1."""
    probs = np.asarray(probs, dtype=np.float64)
    if gold < 0 or gold >= probs.shape[-1]:
        raise ValueError(f"gold label {gold} out of range")
    p = float(np.clip(probs[gold], PROB_CLAMP, 1.0 - PROB_CLAMP))
    return -np.log(p)


def loss_reward_weighted(probs: np.ndarray, gold: int, reward: float) -> float:
    """Reward-scaled positive cross-entropy for one sample."""
    if not np.isfinite(reward):
        raise ValueError("reward must be finite")
    return reward * loss_ce(probs, gold)


def _batch_loss_and_grads(weights, biases, X, golds, sample_weights, sign):
    """Mean weighted cross-entropy over the batch plus parameter gradients."""
    B = X.shape[0]
    probs, acts = _forward_pass(weights, biases, X)
    p_gold = np.clip(probs[np.arange(B), golds], PROB_CLAMP, 1.0 - PROB_CLAMP)
    loss = sign * float(np.mean(sample_weights * -np.log(p_gold)))

    dlogits = probs.copy()
    dlogits[np.arange(B), golds] -= 1.0
    dlogits *= (sign * sample_weights / B)[:, None]

    grads_w = [None] * len(weights)
    grads_b = [None] * len(biases)
    delta = dlogits
    for i in range(len(weights) - 1, -1, -1):
        grads_w[i] = acts[i].T @ delta
        grads_b[i] = delta.sum(axis=0)
        if i > 0:
            delta = (delta @ weights[i].T) * (acts[i] > 0.0)
    return loss, grads_w, grads_b


def _loss_sign(cfg_sign: str) -> float:
    return -1.0 if cfg_sign == "verbatim" else 1.0


def train(
    net: Network,
    inputs: np.ndarray,
    golds,
    rewards,
    cfg: TrainConfig,
) -> Network:
    """Mini-batch training; returns a new trained network.

    Batches come from a per-epoch shuffle seeded by (cfg.seed, epoch), so
    identical inputs and config reproduce the final weights bitwise.
    Weight decay is decoupled: applied multiplicatively to the parameters,
    never through the gradient.
    """
    X = np.asarray(inputs, dtype=np.float64)
    y = np.asarray(golds, dtype=np.int64)
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("inputs and golds disagree in shape")
    if X.shape[0] == 0:
        raise TrainingError("empty training set")
    if X.shape[1] != net.layout.input_dim:
        raise ValueError(f"input has {X.shape[1]} features, expected {net.layout.input_dim}")
    if cfg.loss == REWARD_CE:
        if rewards is None:
            raise ValueError("reward-weighted loss needs a rewards vector")
        w = np.asarray(rewards, dtype=np.float64)
        if w.shape != y.shape:
            raise ValueError("rewards length must match sample count")
    else:
        if rewards is not None:
            raise ValueError("rewards given but loss is plain cross-entropy")
        w = np.ones_like(y, dtype=np.float64)

    out = net.clone()
    sign = _loss_sign(cfg.loss_sign)
    n = X.shape[0]
    decay = 1.0 - cfg.learning_rate * cfg.weight_decay
    out.loss_history = []
    for epoch in range(cfg.epochs):
        perm = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((cfg.seed, epoch)))
        ).permutation(n)
        epoch_losses = []
        for start in range(0, n, cfg.batch_size):
            idx = perm[start : start + cfg.batch_size]
            w64 = [wt.astype(np.float64) for wt in out.weights]
            b64 = [b.astype(np.float64) for b in out.biases]
            loss, gw, gb = _batch_loss_and_grads(w64, b64, X[idx], y[idx], w[idx], sign)
            if not np.isfinite(loss):
                raise TrainingError(f"non-finite loss at step {out.step}")
            epoch_losses.append(loss)
            out.step += 1
            t = out.step
            params = w64 + b64
            grads = gw + gb
            for j, (p, g) in enumerate(zip(params, grads)):
                m = out.m_state[j]
                v = out.v_state[j]
                m *= ADAM_BETA1
                m += (1.0 - ADAM_BETA1) * g
                v *= ADAM_BETA2
                v += (1.0 - ADAM_BETA2) * g * g
                m_hat = m / (1.0 - ADAM_BETA1**t)
                v_hat = v / (1.0 - ADAM_BETA2**t)
                p *= decay
                p -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + ADAM_EPS)
            k = len(out.weights)
            out.weights = [p.astype(np.float32) for p in params[:k]]
            out.biases = [p.astype(np.float32) for p in params[k:]]
        out.loss_history.append(float(np.mean(epoch_losses)))
    return out


def _flatten(arrays) -> np.ndarray:
    return np.concatenate([a.ravel() for a in arrays])


def _unflatten(flat: np.ndarray, shapes):
    out, pos = [], 0
    for shape in shapes:
        size = int(np.prod(shape))
        out.append(flat[pos : pos + size].reshape(shape))
        pos += size
    return out


def grad_check(
    net: Network,
    x: np.ndarray,
    gold: int,
    reward: float,
    loss: str = PLAIN_CE,
    eps: float = 1e-4,
    loss_sign: str = "fixed",
) -> float:
    """Max relative error between analytic and central-difference gradients.

    Weight decay is not part of the loss and is excluded. Everything runs
    in float64 from a float64 snapshot of the parameters.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    X = np.asarray(x, dtype=np.float64)[None, :]
    y = np.array([gold], dtype=np.int64)
    sw = np.array([reward if loss == REWARD_CE else 1.0], dtype=np.float64)
    sign = _loss_sign(loss_sign)

    shapes = [w.shape for w in net.weights] + [b.shape for b in net.biases]
    k = len(net.weights)
    flat = _flatten([w.astype(np.float64) for w in net.weights] + [b.astype(np.float64) for b in net.biases])

    def loss_at(p: np.ndarray) -> float:
        params = _unflatten(p, shapes)
        l, _, _ = _batch_loss_and_grads(params[:k], params[k:], X, y, sw, sign)
        return l

    params = _unflatten(flat, shapes)
    _, gw, gb = _batch_loss_and_grads(params[:k], params[k:], X, y, sw, sign)
    analytic = _flatten(gw + gb)

    numeric = np.empty_like(flat)
    for i in range(flat.size):
        p_hi = flat.copy()
        p_hi[i] += eps
        p_lo = flat.copy()
        p_lo[i] -= eps
        numeric[i] = (loss_at(p_hi) - loss_at(p_lo)) / (2.0 * eps)

    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric) / denom))


def to_bytes(net: Network) -> bytes:
    """Versioned binary blob: magic, layout, float32 LE parameters."""
    dims = net.layout.dims
    parts = [NET_MAGIC, struct.pack("<BBI", NET_VERSION, 0, len(dims))]
    parts.append(struct.pack(f"<{len(dims)}I", *dims))
    for arr in [*net.weights, *net.biases]:
        parts.append(np.ascontiguousarray(arr, dtype="<f4").tobytes())
    return b"".join(parts)


def from_bytes(blob: bytes) -> Network:
    if blob[:4] != NET_MAGIC:
        raise BadMagic(f"bad network magic {blob[:4]!r}")
    version, activation, n_dims = struct.unpack_from("<BBI", blob, 4)
    if version != NET_VERSION:
        raise UnsupportedVersion(f"network blob version {version}")
    if activation != 0:
        raise UnsupportedVersion(f"unknown activation code {activation}")
    pos = 10
    dims = struct.unpack_from(f"<{n_dims}I", blob, pos)
    pos += 4 * n_dims
    layout = NetworkLayout(input_dim=dims[0], hidden=tuple(dims[1:-1]), classes=dims[-1])
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        size = fan_in * fan_out * 4
        if pos + size > len(blob):
            raise Truncated("network blob truncated")
        weights.append(np.frombuffer(blob, dtype="<f4", count=fan_in * fan_out, offset=pos).reshape(fan_in, fan_out).copy())
        pos += size
    for _, fan_out in zip(dims[:-1], dims[1:]):
        size = fan_out * 4
        if pos + size > len(blob):
            raise Truncated("network blob truncated")
        biases.append(np.frombuffer(blob, dtype="<f4", count=fan_out, offset=pos).copy())
        pos += size
    if pos != len(blob):
        raise Truncated("trailing bytes in network blob")
    return Network(layout, weights, biases)
