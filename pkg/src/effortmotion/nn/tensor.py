"""Float64 tensors with reverse-mode gradients for the fixed layer set used here.

Not a general autodiff system: only the operations the denoiser needs exist,
and every one of them is validated against central finite differences in the
test suite. Data lives in row-major numpy arrays; gradients accumulate into
``.grad`` during ``backward()``.
"""

from __future__ import annotations

import numpy as np

_debug_checks = False
_grad_enabled = True


def set_debug_checks(on: bool) -> None:
    """When on, every op asserts its output is finite (slow; used in tests)."""
    global _debug_checks
    _debug_checks = bool(on)


class no_grad:
    """Context manager that skips graph construction (fast eval forwards)."""

    def __enter__(self):
        global _grad_enabled
        self._prev = _grad_enabled
        _grad_enabled = False
        return self

    def __exit__(self, *exc):
        global _grad_enabled
        _grad_enabled = self._prev
        return False


def _checked(data: np.ndarray) -> np.ndarray:
    if _debug_checks and not np.all(np.isfinite(data)):
        raise FloatingPointError("non-finite values produced by a tensor op")
    return data


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to ``shape`` after numpy broadcasting."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_backward", "_parents")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=np.float64)
        self.requires_grad = bool(requires_grad) and _grad_enabled
        self.grad: np.ndarray | None = None
        self._backward = None
        self._parents: tuple[Tensor, ...] = ()

    # -- graph plumbing ----------------------------------------------------

    @staticmethod
    def _result(data: np.ndarray, parents: tuple["Tensor", ...], backward_fn):
        out = Tensor(_checked(data))
        if _grad_enabled and any(p.requires_grad for p in parents):
            out.requires_grad = True
            out._parents = parents
            out._backward = backward_fn
        return out

    def _accumulate(self, g: np.ndarray) -> None:
        if self.requires_grad:
            if self.grad is None:
                self.grad = np.zeros_like(self.data)
            self.grad += g

    def zero_grad(self) -> None:
        self.grad = None

    def backward(self, grad: np.ndarray | None = None) -> None:
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient needs a scalar output")
            grad = np.ones_like(self.data)
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, processed = stack.pop()
            if processed:
                topo.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if id(parent) not in seen:
                    stack.append((parent, False))
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += np.asarray(grad, dtype=np.float64)
        for node in reversed(topo):
            if node._backward is not None:
                node._backward(node.grad)

    # -- shape accessors ---------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- arithmetic ---------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)

        def bwd(g, a=self, b=other):
            a._accumulate(_unbroadcast(g, a.data.shape))
            b._accumulate(_unbroadcast(g, b.data.shape))

        return Tensor._result(self.data + other.data, (self, other), bwd)

    __radd__ = __add__

    def __neg__(self):
        def bwd(g, a=self):
            a._accumulate(-g)

        return Tensor._result(-self.data, (self,), bwd)

    def __sub__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)

        def bwd(g, a=self, b=other):
            a._accumulate(_unbroadcast(g, a.data.shape))
            b._accumulate(_unbroadcast(-g, b.data.shape))

        return Tensor._result(self.data - other.data, (self, other), bwd)

    def __rsub__(self, other):
        return Tensor(other) - self

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)

        def bwd(g, a=self, b=other):
            a._accumulate(_unbroadcast(g * b.data, a.data.shape))
            b._accumulate(_unbroadcast(g * a.data, b.data.shape))

        return Tensor._result(self.data * other.data, (self, other), bwd)

    __rmul__ = __mul__

    def __matmul__(self, other):
        """Batched matmul; leading (batch) dims of both operands must match."""
        other = other if isinstance(other, Tensor) else Tensor(other)
        if self.data.shape[:-2] != other.data.shape[:-2]:
            raise ValueError(
                f"matmul batch dims differ: {self.data.shape} vs {other.data.shape}"
            )

        def bwd(g, a=self, b=other):
            a._accumulate(g @ np.swapaxes(b.data, -1, -2))
            b._accumulate(np.swapaxes(a.data, -1, -2) @ g)

        return Tensor._result(self.data @ other.data, (self, other), bwd)

    # -- shape ops -----------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        old = self.data.shape

        def bwd(g, a=self, old=old):
            a._accumulate(g.reshape(old))

        return Tensor._result(self.data.reshape(shape), (self,), bwd)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        inverse = np.argsort(axes)

        def bwd(g, a=self, inverse=inverse):
            a._accumulate(np.transpose(g, inverse))

        return Tensor._result(np.transpose(self.data, axes), (self,), bwd)

    # -- reductions -----------------------------------------------------------

    def sum(self, axis=None, keepdims: bool = False):
        def bwd(g, a=self, axis=axis, keepdims=keepdims):
            if axis is None:
                a._accumulate(np.broadcast_to(g, a.data.shape).copy())
                return
            gg = g if keepdims else np.expand_dims(g, axis)
            a._accumulate(np.broadcast_to(gg, a.data.shape).copy())

        return Tensor._result(self.data.sum(axis=axis, keepdims=keepdims), (self,), bwd)

    def mean(self, axis=None, keepdims: bool = False):
        if axis is None:
            count = self.data.size
        else:
            count = self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)


class Parameter(Tensor):
    """Named leaf tensor; gradient buffer always allocated and shape-matched."""

    __slots__ = ("name",)

    def __init__(self, name: str, data):
        super().__init__(data, requires_grad=True)
        self.requires_grad = True  # parameters stay trainable even under no_grad
        self.name = str(name)
        self.grad = np.zeros_like(self.data)

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def __repr__(self) -> str:
        return f"Parameter({self.name!r}, shape={self.shape})"


# -- functional ops ---------------------------------------------------------


def linear(x: Tensor, weight: Tensor, bias: Tensor | None = None) -> Tensor:
    """Affine map along the last axis: y[..., o] = sum_i x[..., i] W[o, i] + b[o]."""
    if x.data.shape[-1] != weight.data.shape[1]:
        raise ValueError(
            f"linear: input dim {x.data.shape[-1]} != weight in-dim {weight.data.shape[1]}"
        )
    out = x.data @ weight.data.T
    if bias is not None:
        out = out + bias.data

    def bwd(g, x=x, weight=weight, bias=bias):
        g2 = g.reshape(-1, g.shape[-1])
        x2 = x.data.reshape(-1, x.data.shape[-1])
        x._accumulate((g2 @ weight.data).reshape(x.data.shape))
        weight._accumulate(g2.T @ x2)
        if bias is not None:
            bias._accumulate(g2.sum(axis=0))

    parents = (x, weight) if bias is None else (x, weight, bias)
    return Tensor._result(out, parents, bwd)


def _ordered_axis_sum(values: np.ndarray, axis: int) -> np.ndarray:
    """Sum along ``axis`` in ascending-value order.

    The result is invariant to any permutation of the entries along the axis,
    which plain sequential/pairwise summation is not. Used where region
    permutation equivariance must hold bit-level.
    """
    ordered = np.sort(values, axis=axis)
    return np.cumsum(ordered, axis=axis).take(-1, axis=axis)


def softmax(x: Tensor, axis: int = -1, ordered: bool = False) -> Tensor:
    shifted = x.data - x.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    if ordered:
        denom = np.expand_dims(_ordered_axis_sum(e, axis), axis)
    else:
        denom = e.sum(axis=axis, keepdims=True)
    y = e / denom

    def bwd(g, x=x, y=y, axis=axis):
        inner = (g * y).sum(axis=axis, keepdims=True)
        x._accumulate(y * (g - inner))

    return Tensor._result(y, (x,), bwd)


def weighted_values(attn: Tensor, values: Tensor, ordered: bool = False) -> Tensor:
    """Contract attention weights [..., Q, K] with values [..., K, E].

    With ``ordered=True`` the K-axis reduction uses ascending-value
    summation so the output is bit-identical under key permutation.
    """
    if attn.data.shape[:-2] != values.data.shape[:-2]:
        raise ValueError("weighted_values: batch dims differ")
    if attn.data.shape[-1] != values.data.shape[-2]:
        raise ValueError("weighted_values: key dims differ")
    if ordered:
        prod = attn.data[..., :, :, None] * values.data[..., None, :, :]
        out = _ordered_axis_sum(prod, axis=-2)
    else:
        out = attn.data @ values.data

    def bwd(g, attn=attn, values=values):
        attn._accumulate(g @ np.swapaxes(values.data, -1, -2))
        values._accumulate(np.swapaxes(attn.data, -1, -2) @ g)

    return Tensor._result(out, (attn, values), bwd)


def layer_norm(x: Tensor, gamma: Tensor, beta: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean / unit variance, then affine."""
    mu = x.data.mean(axis=-1, keepdims=True)
    xc = x.data - mu
    var = (xc * xc).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = xc * inv
    y = xhat * gamma.data + beta.data

    def bwd(g, x=x, gamma=gamma, beta=beta, xhat=xhat, inv=inv):
        lead = tuple(range(g.ndim - 1))
        gamma._accumulate((g * xhat).sum(axis=lead))
        beta._accumulate(g.sum(axis=lead))
        gh = g * gamma.data
        m1 = gh.mean(axis=-1, keepdims=True)
        m2 = (gh * xhat).mean(axis=-1, keepdims=True)
        x._accumulate(inv * (gh - m1 - xhat * m2))

    return Tensor._result(y, (x, gamma, beta), bwd)


_GELU_C = np.sqrt(2.0 / np.pi)
_GELU_A = 0.044715


def gelu(x: Tensor) -> Tensor:
    """Smooth GELU (tanh form)."""
    d = x.data
    inner = _GELU_C * (d + _GELU_A * d**3)
    t = np.tanh(inner)
    y = 0.5 * d * (1.0 + t)

    def bwd(g, x=x, d=d, t=t):
        dt = (1.0 - t * t) * _GELU_C * (1.0 + 3.0 * _GELU_A * d * d)
        x._accumulate(g * (0.5 * (1.0 + t) + 0.5 * d * dt))

    return Tensor._result(y, (x,), bwd)


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: zero with prob ``rate``, scale kept values by 1/(1-rate)."""
    if not training or rate == 0.0:
        return x
    if not 0.0 <= rate < 1.0:
        raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)

    def bwd(g, x=x, mask=mask):
        x._accumulate(g * mask)

    return Tensor._result(x.data * mask, (x,), bwd)


def take_rows(table: Tensor, ids: np.ndarray) -> Tensor:
    """Row lookup table[ids]; gradient scatter-adds into the table."""
    ids = np.asarray(ids, dtype=np.int64)

    def bwd(g, table=table, ids=ids):
        if table.requires_grad:
            acc = np.zeros_like(table.data)
            np.add.at(acc, ids, g)
            table._accumulate(acc)

    return Tensor._result(table.data[ids], (table,), bwd)
