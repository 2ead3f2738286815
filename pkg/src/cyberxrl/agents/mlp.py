"""A small feed-forward network in numpy: ReLU hidden layers, identity output.

Parameters are a list of ``(W, b)`` pairs with ``W`` shaped ``(fan_in, fan_out)``.
Gradients come from a hand-written backward pass; the optimisers return new
parameter lists rather than mutating their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgument


@dataclass(frozen=True)
class MlpSpec:
    layer_sizes: tuple
    seed: int = 0

    def __post_init__(self):
        if len(self.layer_sizes) < 2 or any(int(n) < 1 for n in self.layer_sizes):
            raise InvalidArgument(f"bad layer sizes {self.layer_sizes}")

    @property
    def n_in(self):
        return self.layer_sizes[0]

    @property
    def n_out(self):
        return self.layer_sizes[-1]


def hidden_layers_for(n_nodes, small=3, large=5, threshold=50):
    """Depth rule: 3 hidden layers for small networks, 5 for large ones."""
    return small if n_nodes <= threshold else large


def init_params(spec):
    rng = np.random.default_rng(spec.seed)
    params = []
    sizes = spec.layer_sizes
    for i, (fan_in, fan_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        last = i == len(sizes) - 2
        scale = np.sqrt(1.0 / fan_in) if last else np.sqrt(2.0 / fan_in)
        W = rng.normal(0.0, scale, size=(fan_in, fan_out))
        if last:
            W *= 0.1
        params.append((W, np.zeros(fan_out)))
    return params


def copy_params(params):
    return [(W.copy(), b.copy()) for W, b in params]


def zeros_like(params):
    return [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]


def forward_cached(params, x):
    """Forward pass returning the output and the per-layer activations for backprop."""
    acts = [x]
    h = x
    last = len(params) - 1
    for i, (W, b) in enumerate(params):
        h = h @ W + b
        if i != last:
            h = np.maximum(h, 0.0)
        acts.append(h)
    return h, acts


def mlp_forward(spec, params, x):
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != spec.n_in:
        raise InvalidArgument(f"input dim {x.shape[-1]} != {spec.n_in}")
    out, _ = forward_cached(params, x)
    return out


def backward(params, acts, grad_out):
    """Gradients of ``sum(grad_out * output)`` with respect to every parameter."""
    grads = [None] * len(params)
    g = grad_out
    for i in range(len(params) - 1, -1, -1):
        W, _ = params[i]
        inp = acts[i]
        if inp.ndim == 1:
            grads[i] = (np.outer(inp, g), g.copy())
        else:
            grads[i] = (inp.T @ g, g.sum(axis=0))
        if i > 0:
            g = (g @ W.T) * (acts[i] > 0)
    return grads


class SGD:
    def __init__(self, lr):
        self.lr = lr

    def step(self, params, grads):
        return [(W - self.lr * gW, b - self.lr * gb) for (W, b), (gW, gb) in zip(params, grads)]


class Adam:
    def __init__(self, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.t = 0
        self.m = None
        self.v = None

    def step(self, params, grads):
        if self.m is None:
            self.m = zeros_like(params)
            self.v = zeros_like(params)
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        c1, c2 = 1 - b1 ** self.t, 1 - b2 ** self.t
        out, ms, vs = [], [], []
        for (W, b), (gW, gb), (mW, mb), (vW, vb) in zip(params, grads, self.m, self.v):
            mW = b1 * mW + (1 - b1) * gW
            mb = b1 * mb + (1 - b1) * gb
            vW = b2 * vW + (1 - b2) * gW * gW
            vb = b2 * vb + (1 - b2) * gb * gb
            W = W - self.lr * (mW / c1) / (np.sqrt(vW / c2) + self.eps)
            b = b - self.lr * (mb / c1) / (np.sqrt(vb / c2) + self.eps)
            out.append((W, b))
            ms.append((mW, mb))
            vs.append((vW, vb))
        self.m, self.v = ms, vs
        return out


def make_optimizer(name, lr):
    if name == "adam":
        return Adam(lr)
    if name == "sgd":
        return SGD(lr)
    raise InvalidArgument(f"unknown optimizer {name!r}")


def flatten(params):
    return np.concatenate([np.concatenate([W.ravel(), b.ravel()]) for W, b in params])


def unflatten(vec, like):
    out, pos = [], 0
    for W, b in like:
        nW, nb = W.size, b.size
        out.append((vec[pos:pos + nW].reshape(W.shape), vec[pos + nW:pos + nW + nb].copy()))
        pos += nW + nb
    return out


def params_to_arrays(params, prefix=""):
    arrays = {}
    for i, (W, b) in enumerate(params):
        arrays[f"{prefix}W{i}"] = W
        arrays[f"{prefix}b{i}"] = b
    return arrays


def params_from_arrays(arrays, prefix=""):
    params, i = [], 0
    while f"{prefix}W{i}" in arrays:
        params.append((np.array(arrays[f"{prefix}W{i}"]), np.array(arrays[f"{prefix}b{i}"])))
        i += 1
    return params
