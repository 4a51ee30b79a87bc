"""Parameterized layers: linear, layer norm, feed-forward, attention, FiLM.

Initialization conventions: weights use uniform fan-in scaling, biases start
at zero, and every *output* projection (attention out-proj, second FFN
linear, FiLM heads) starts at zero so a freshly built residual stack is the
identity map.
"""

from __future__ import annotations

import numpy as np

from .tensor import (
    Parameter,
    Tensor,
    dropout,
    gelu,
    layer_norm,
    linear,
    softmax,
    weighted_values,
)

ATTN_DROPOUT = 0.1
LAYER_NORM_EPS = 1e-5


class Module:
    """Minimal parameter container; children are discovered by attribute walk."""

    def parameters(self) -> list[Parameter]:
        out: list[Parameter] = []
        seen: set[int] = set()

        def visit(obj):
            if isinstance(obj, Parameter):
                if id(obj) not in seen:
                    seen.add(id(obj))
                    out.append(obj)
            elif isinstance(obj, Module):
                for v in vars(obj).values():
                    visit(v)
            elif isinstance(obj, (list, tuple)):
                for v in obj:
                    visit(v)

        visit(self)
        return out

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()


def _uniform_init(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Linear(Module):
    def __init__(self, d_in: int, d_out: int, rng: np.random.Generator, name: str,
                 zero_init: bool = False, bias: bool = True):
        w = np.zeros((d_out, d_in)) if zero_init else _uniform_init(rng, (d_out, d_in), d_in)
        self.weight = Parameter(f"{name}.weight", w)
        self.bias = Parameter(f"{name}.bias", np.zeros(d_out)) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        return linear(x, self.weight, self.bias)


class LayerNorm(Module):
    def __init__(self, dim: int, name: str, eps: float = LAYER_NORM_EPS):
        self.gamma = Parameter(f"{name}.gamma", np.ones(dim))
        self.beta = Parameter(f"{name}.beta", np.zeros(dim))
        self.eps = eps

    def __call__(self, x: Tensor) -> Tensor:
        return layer_norm(x, self.gamma, self.beta, self.eps)


class FeedForward(Module):
    """Two-layer MLP with GELU; hidden width is a multiple of the model dim."""

    def __init__(self, dim: int, rng: np.random.Generator, name: str,
                 mult: int = 4, zero_out: bool = True):
        hidden = dim * mult
        self.fc1 = Linear(dim, hidden, rng, f"{name}.fc1")
        self.fc2 = Linear(hidden, dim, rng, f"{name}.fc2", zero_init=zero_out)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(gelu(self.fc1(x)))


class MultiHeadAttention(Module):
    """Scaled dot-product attention with separate query/key/value inputs.

    ``ordered_keys=True`` makes the softmax normalizer and value contraction
    permutation-invariant bit-for-bit (used where keys index body regions).
    Weight dropout is applied to the post-softmax attention matrix in
    training mode only. Set ``record_weights`` to capture the (pre-dropout)
    attention weights of the next call.
    """

    def __init__(self, dim: int, heads: int, rng: np.random.Generator, name: str,
                 kv_dim: int | None = None, ordered_keys: bool = False,
                 attn_dropout: float = ATTN_DROPOUT):
        if dim % heads != 0:
            raise ValueError(f"dim {dim} not divisible by heads {heads}")
        kv_dim = kv_dim if kv_dim is not None else dim
        self.dim, self.heads, self.head_dim = dim, heads, dim // heads
        self.ordered_keys = ordered_keys
        self.attn_dropout = attn_dropout
        self.wq = Linear(dim, dim, rng, f"{name}.wq")
        self.wk = Linear(kv_dim, dim, rng, f"{name}.wk")
        self.wv = Linear(kv_dim, dim, rng, f"{name}.wv")
        self.wo = Linear(dim, dim, rng, f"{name}.wo", zero_init=True)
        self.record_weights = False
        self.last_weights: np.ndarray | None = None

    def _split_heads(self, x: Tensor, n: int) -> Tensor:
        b = x.shape[0]
        return x.reshape(b, n, self.heads, self.head_dim).transpose(0, 2, 1, 3)

    def __call__(self, q_in: Tensor, k_in: Tensor, v_in: Tensor | None = None,
                 training: bool = False, rng: np.random.Generator | None = None) -> Tensor:
        v_in = v_in if v_in is not None else k_in
        b, n_q = q_in.shape[0], q_in.shape[1]
        n_k = k_in.shape[1]
        q = self._split_heads(self.wq(q_in), n_q)
        k = self._split_heads(self.wk(k_in), n_k)
        v = self._split_heads(self.wv(v_in), n_k)
        scores = (q @ k.transpose(0, 1, 3, 2)) * (1.0 / np.sqrt(self.head_dim))
        attn = softmax(scores, axis=-1, ordered=self.ordered_keys)
        if self.record_weights:
            self.last_weights = attn.data.copy()
        if training and self.attn_dropout > 0.0:
            if rng is None:
                raise ValueError("training-mode attention needs an rng for dropout")
            attn = dropout(attn, self.attn_dropout, rng, training=True)
        ctx = weighted_values(attn, v, ordered=self.ordered_keys)
        merged = ctx.transpose(0, 2, 1, 3).reshape(b, n_q, self.dim)
        return self.wo(merged)


def multi_head_attention(q_in: Tensor, k_in: Tensor, v_in: Tensor, heads: int,
                         rng: np.random.Generator, name: str = "mha",
                         **kwargs) -> tuple[Tensor, "MultiHeadAttention"]:
    """One-shot attention helper: builds a layer, applies it, returns both."""
    layer = MultiHeadAttention(q_in.shape[-1], heads, rng, name, **kwargs)
    return layer(q_in, k_in, v_in), layer


class FiLM(Module):
    """Channelwise x * (1 + scale(t)) + shift(t); identity at initialization."""

    def __init__(self, dim: int, cond_dim: int, rng: np.random.Generator, name: str):
        self.scale = Linear(cond_dim, dim, rng, f"{name}.scale", zero_init=True)
        self.shift = Linear(cond_dim, dim, rng, f"{name}.shift", zero_init=True)

    def __call__(self, x: Tensor, cond: Tensor) -> Tensor:
        # cond is [B, C]; reshape to broadcast over all middle axes of x.
        b, d = cond.shape[0], x.shape[-1]
        target = (b,) + (1,) * (x.ndim - 2) + (d,)
        s = self.scale(cond).reshape(target)
        t = self.shift(cond).reshape(target)
        return x * (s + 1.0) + t


def film(x: Tensor, cond: Tensor, film_layer: FiLM) -> Tensor:
    """Functional wrapper over a FiLM layer (timestep-conditioned modulation)."""
    return film_layer(x, cond)


def sinusoidal_encoding(positions: np.ndarray, dim: int, max_period: float = 10000.0) -> np.ndarray:
    """Geometric-frequency sin/cos features of integer positions, [n, dim]."""
    positions = np.asarray(positions, dtype=np.float64)
    half = dim // 2
    exponents = np.arange(half, dtype=np.float64) / half
    freqs = max_period ** (-exponents)
    angles = positions[:, None] * freqs[None, :]
    enc = np.concatenate([np.sin(angles), np.cos(angles)], axis=1)
    if dim % 2 == 1:
        enc = np.concatenate([enc, np.zeros((len(positions), 1))], axis=1)
    return enc


class TimestepEmbedder(Module):
    """Sinusoidal timestep features refined by a small two-layer MLP."""

    def __init__(self, dim: int, rng: np.random.Generator, name: str):
        self.dim = dim
        self.fc1 = Linear(dim, dim, rng, f"{name}.fc1")
        self.fc2 = Linear(dim, dim, rng, f"{name}.fc2")

    def __call__(self, t: np.ndarray) -> Tensor:
        enc = Tensor(sinusoidal_encoding(np.atleast_1d(t), self.dim))
        return self.fc2(gelu(self.fc1(enc)))
