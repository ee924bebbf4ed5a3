"""Small dense networks with hand-written gradients and Adam.

Every learned component (actor, twin critics, their targets, and the
risk blocker) is an MLP of the same family: input -> 16 -> 8 -> output,
ReLU hidden units, and a linear or sigmoid output. Parameters are
float64 numpy arrays. All ops accept a single vector or a (batch, dim)
matrix; :func:`backward` returns the gradients of ``sum_i <g_i, f(x_i)>``
so callers fold loss scaling into the upstream gradient.

Serialized layout (little-endian, see :func:`mlp_to_bytes`):

* ``uint32`` number of layer sizes, then that many ``uint32`` sizes;
* one ``uint8`` code for the hidden activation, one for the output
  activation (0 = linear, 1 = relu, 2 = sigmoid);
* per layer: the weight matrix ``(fan_in, fan_out)`` row-major, then the
  bias vector, all ``float64``.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

HIDDEN_SIZES = (16, 8)

_ACT_CODES = {"linear": 0, "relu": 1, "sigmoid": 2}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


@dataclass
class Mlp:
    sizes: tuple[int, ...]
    weights: list[np.ndarray]  # weights[i]: (sizes[i], sizes[i+1])
    biases: list[np.ndarray]  # biases[i]: (sizes[i+1],)
    hidden_activation: str = "relu"
    output_activation: str = "linear"

    @property
    def n_in(self) -> int:
        return self.sizes[0]

    @property
    def n_out(self) -> int:
        return self.sizes[-1]


def init_mlp(
    n_in: int,
    n_out: int,
    rng: np.random.Generator,
    hidden_sizes: tuple[int, ...] = HIDDEN_SIZES,
    output_activation: str = "linear",
) -> Mlp:
    """Uniform init in +-1/sqrt(fan_in) for weights and biases."""
    sizes = (n_in, *hidden_sizes, n_out)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Mlp(sizes, weights, biases, output_activation=output_activation)


def clone_mlp(net: Mlp) -> Mlp:
    return Mlp(
        net.sizes,
        [w.copy() for w in net.weights],
        [b.copy() for b in net.biases],
        net.hidden_activation,
        net.output_activation,
    )


def _apply_output(z: np.ndarray, activation: str) -> np.ndarray:
    if activation == "linear":
        return z
    if activation == "sigmoid":
        return 1.0 / (1.0 + np.exp(-z))
    raise ValueError(f"unknown output activation {activation!r}")


def _forward_cached(net: Mlp, x: np.ndarray) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """Returns pre-activations per layer and activations (acts[0] is the input)."""
    zs: list[np.ndarray] = []
    acts: list[np.ndarray] = [x]
    a = x
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = a @ w + b
        zs.append(z)
        a = _apply_output(z, net.output_activation) if i == last else np.maximum(z, 0.0)
        acts.append(a)
    return zs, acts


def _as_batch(net: Mlp, x: np.ndarray) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    batch = x[None, :] if single else x
    if batch.ndim != 2 or batch.shape[1] != net.n_in:
        raise ValueError(
            f"input shape {x.shape} incompatible with network input size {net.n_in}"
        )
    return batch, single


def forward(net: Mlp, x: np.ndarray) -> np.ndarray:
    batch, single = _as_batch(net, x)
    _, acts = _forward_cached(net, batch)
    out = acts[-1]
    return out[0] if single else out


def backward(
    net: Mlp, x: np.ndarray, upstream: np.ndarray
) -> tuple[list[tuple[np.ndarray, np.ndarray]], np.ndarray]:
    """Gradients of ``sum_i <upstream_i, f(x_i)>``.

    Returns per-layer ``(dW, db)`` pairs in layer order plus the gradient
    with respect to the input (same shape as ``x``).
    """
    batch, single = _as_batch(net, x)
    gy = np.asarray(upstream, dtype=float)
    gy = gy[None, :] if single else gy
    if gy.shape != (batch.shape[0], net.n_out):
        raise ValueError(
            f"upstream shape {upstream.shape} incompatible with output size {net.n_out}"
        )
    zs, acts = _forward_cached(net, batch)

    last = len(net.weights) - 1
    if net.output_activation == "sigmoid":
        s = acts[-1]
        delta = gy * s * (1.0 - s)
    else:
        delta = gy
    grads: list[tuple[np.ndarray, np.ndarray]] = [None] * len(net.weights)  # type: ignore[list-item]
    for i in range(last, -1, -1):
        grads[i] = (acts[i].T @ delta, delta.sum(axis=0))
        if i > 0:
            delta = (delta @ net.weights[i].T) * (zs[i - 1] > 0.0)
    gx = delta @ net.weights[0].T
    return grads, gx[0] if single else gx


@dataclass
class AdamState:
    lr: float = 3e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)
    v: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)


def init_adam(net: Mlp, lr: float = 3e-4) -> AdamState:
    m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
    v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in zip(net.weights, net.biases)]
    return AdamState(lr=lr, m=m, v=v)


def adam_step(
    net: Mlp, adam: AdamState, grads: list[tuple[np.ndarray, np.ndarray]]
) -> Mlp:
    """In-place Adam update with bias correction; returns the same net."""
    if len(grads) != len(net.weights):
        raise ValueError("gradient list does not match network depth")
    adam.step += 1
    b1c = 1.0 - adam.beta1**adam.step
    b2c = 1.0 - adam.beta2**adam.step
    for i, (gw, gb) in enumerate(grads):
        if gw.shape != net.weights[i].shape or gb.shape != net.biases[i].shape:
            raise ValueError(f"gradient shape mismatch at layer {i}")
        mw, mb = adam.m[i]
        vw, vb = adam.v[i]
        mw *= adam.beta1
        mw += (1.0 - adam.beta1) * gw
        mb *= adam.beta1
        mb += (1.0 - adam.beta1) * gb
        vw *= adam.beta2
        vw += (1.0 - adam.beta2) * gw * gw
        vb *= adam.beta2
        vb += (1.0 - adam.beta2) * gb * gb
        net.weights[i] -= adam.lr * (mw / b1c) / (np.sqrt(vw / b2c) + adam.eps)
        net.biases[i] -= adam.lr * (mb / b1c) / (np.sqrt(vb / b2c) + adam.eps)
    return net


def soft_update(target: Mlp, source: Mlp, tau: float) -> Mlp:
    """target <- tau * source + (1 - tau) * target, parameterwise, in place."""
    if target.sizes != source.sizes:
        raise ValueError("architecture mismatch in soft update")
    for tw, sw in zip(target.weights, source.weights):
        tw *= 1.0 - tau
        tw += tau * sw
    for tb, sb in zip(target.biases, source.biases):
        tb *= 1.0 - tau
        tb += tau * sb
    return target


def mlp_to_bytes(net: Mlp) -> bytes:
    parts = [struct.pack("<I", len(net.sizes))]
    parts.append(struct.pack(f"<{len(net.sizes)}I", *net.sizes))
    parts.append(
        struct.pack(
            "<BB", _ACT_CODES[net.hidden_activation], _ACT_CODES[net.output_activation]
        )
    )
    for w, b in zip(net.weights, net.biases):
        parts.append(np.ascontiguousarray(w, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(b, dtype="<f8").tobytes())
    return b"".join(parts)


def mlp_from_bytes(buf: bytes, offset: int = 0) -> tuple[Mlp, int]:
    (n_sizes,) = struct.unpack_from("<I", buf, offset)
    offset += 4
    sizes = struct.unpack_from(f"<{n_sizes}I", buf, offset)
    offset += 4 * n_sizes
    hidden_code, out_code = struct.unpack_from("<BB", buf, offset)
    offset += 2
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        n = fan_in * fan_out
        w = np.frombuffer(buf, dtype="<f8", count=n, offset=offset).reshape(
            fan_in, fan_out
        )
        offset += 8 * n
        b = np.frombuffer(buf, dtype="<f8", count=fan_out, offset=offset)
        offset += 8 * fan_out
        weights.append(w.astype(float))
        biases.append(b.astype(float))
    net = Mlp(
        tuple(sizes),
        weights,
        biases,
        hidden_activation=_ACT_NAMES[hidden_code],
        output_activation=_ACT_NAMES[out_code],
    )
    return net, offset


def save_mlp(path, net: Mlp) -> None:
    with open(path, "wb") as f:
        f.write(mlp_to_bytes(net))


def load_mlp(path) -> Mlp:
    with open(path, "rb") as f:
        net, _ = mlp_from_bytes(f.read())
    return net
