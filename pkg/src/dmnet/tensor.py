"""Dense tensors with a recorded graph for reverse-mode differentiation.

Every operation returns a new :class:`Tensor`. When any input requires a
gradient (and recording is enabled), the result keeps references to its
inputs together with a closure mapping the output gradient to input
gradients. :func:`backward` walks that graph in reverse topological order.

Graphs are built per example and are confined to the thread that built them.
"""

from __future__ import annotations

import contextlib
import threading
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import ContractError, DimensionError, NumericError

__all__ = [
    "Tensor", "Graph", "tensor", "parameter", "constant", "zeros",
    "get_default_dtype", "set_default_dtype", "precision", "no_grad",
    "is_grad_enabled", "make_node", "graph_of", "backward",
    "add", "sub", "mul", "absdiff", "scale", "elementwise",
    "matmul", "sigmoid", "tanh", "softmax", "activation",
    "cross_entropy", "sum", "concat", "stack", "index", "take",
    "repeat_rows", "reshape", "transpose",
]

_state = threading.local()
_default_dtype = np.dtype(np.float32)


def get_default_dtype() -> np.dtype:
    return getattr(_state, "dtype", _default_dtype)


def set_default_dtype(dtype) -> None:
    """Set the process-wide floating point precision (float32 or float64)."""
    global _default_dtype
    dtype = np.dtype(dtype)
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported precision {dtype}")
    _default_dtype = dtype


@contextlib.contextmanager
def precision(dtype):
    """Temporarily override the default dtype for the current thread."""
    dtype = np.dtype(dtype)
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported precision {dtype}")
    prev = getattr(_state, "dtype", None)
    _state.dtype = dtype
    try:
        yield
    finally:
        if prev is None:
            del _state.dtype
        else:
            _state.dtype = prev


def is_grad_enabled() -> bool:
    return getattr(_state, "grad", True)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording (evaluation mode)."""
    prev = is_grad_enabled()
    _state.grad = False
    try:
        yield
    finally:
        _state.grad = prev


class Tensor:
    """A dense real array, optionally tracked for differentiation."""

    __slots__ = ("data", "grad", "requires_grad", "parents", "backward_fn",
                 "op", "name")

    def __init__(self, data, requires_grad: bool = False, dtype=None,
                 name: str | None = None):
        self.data = np.array(data, dtype=dtype or get_default_dtype())
        self.grad = None
        self.requires_grad = requires_grad
        self.parents = ()
        self.backward_fn = None
        self.op = "leaf"
        self.name = name

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return not self.parents

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data.reshape(-1)[0]) if self.data.size == 1 else float("nan")

    def zero_grad(self) -> None:
        self.grad = None

    def __repr__(self):
        label = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, op={self.op}{label})"

    def __len__(self):
        return len(self.data)

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(_lift(other, self), self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(_lift(other, self), self)

    def __mul__(self, other):
        if np.isscalar(other):
            return scale(self, other)
        return mul(self, other)

    def __rmul__(self, other):
        return self.__mul__(other)

    def __neg__(self):
        return scale(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return index(self, key)


def tensor(data, requires_grad: bool = False, name: str | None = None) -> Tensor:
    return Tensor(data, requires_grad=requires_grad, name=name)


def parameter(data, name: str | None = None) -> Tensor:
    """A trainable leaf."""
    return Tensor(data, requires_grad=True, name=name)


def constant(data) -> Tensor:
    return Tensor(data, requires_grad=False)


def zeros(*shape) -> Tensor:
    return Tensor(np.zeros(shape, dtype=get_default_dtype()))


def _lift(value, like: Tensor) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(np.asarray(value, dtype=like.data.dtype))


def make_node(data: np.ndarray, parents: Sequence[Tensor],
              backward_fn: Callable[[np.ndarray], Iterable], op: str) -> Tensor:
    """Wrap an op result and, when recording, link it into the graph.

    ``backward_fn`` receives the output gradient and returns one gradient (or
    ``None``) per parent, in order.
    """
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.op = op
    out.name = None
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out.parents = tuple(parents)
        out.backward_fn = backward_fn
    else:
        out.requires_grad = False
        out.parents = ()
        out.backward_fn = None
    return out


@dataclass
class Graph:
    """Nodes reachable from a root, in topological order (inputs first)."""

    root: Tensor
    order: list[Tensor] = field(default_factory=list)

    @property
    def leaves(self) -> list[Tensor]:
        return [n for n in self.order if n.is_leaf]

    def __len__(self):
        return len(self.order)


def graph_of(root: Tensor) -> Graph:
    order: list[Tensor] = []
    if not root.requires_grad:
        return Graph(root, order)
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node.parents:
            if p.requires_grad and id(p) not in visited:
                stack.append((p, False))
    return Graph(root, order)


def backward(root: Tensor) -> dict[Tensor, np.ndarray]:
    """Accumulate d(root)/d(leaf) into ``leaf.grad`` for every tracked leaf.

    Gradients add into any existing ``.grad``; callers zero them between
    updates. Returns the leaf -> gradient map.
    """
    if root.data.size != 1:
        raise ContractError(f"backward needs a scalar root, got shape {root.shape}")
    graph = graph_of(root)
    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}
    result: dict[Tensor, np.ndarray] = {}
    for node in reversed(graph.order):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node.is_leaf:
            node.grad = g.copy() if node.grad is None else node.grad + g
            result[node] = node.grad
            continue
        for parent, pg in zip(node.parents, node.backward_fn(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    return result


# ---------------------------------------------------------------------------
# elementwise


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _binary_shape(a: Tensor, b: Tensor, kind: str) -> None:
    if a.shape == b.shape or b.ndim == 0 or a.ndim == 0:
        return
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise DimensionError(f"{kind}: shapes {a.shape} and {b.shape} do not conform") from None


def add(a: Tensor, b) -> Tensor:
    b = _lift(b, a)
    _binary_shape(a, b, "add")
    sa, sb = a.shape, b.shape
    return make_node(a.data + b.data, (a, b),
                     lambda g: (_unbroadcast(g, sa), _unbroadcast(g, sb)), "add")


def sub(a: Tensor, b) -> Tensor:
    b = _lift(b, a)
    _binary_shape(a, b, "sub")
    sa, sb = a.shape, b.shape
    return make_node(a.data - b.data, (a, b),
                     lambda g: (_unbroadcast(g, sa), _unbroadcast(-g, sb)), "sub")


def mul(a: Tensor, b) -> Tensor:
    """Hadamard product."""
    b = _lift(b, a)
    _binary_shape(a, b, "hadamard")
    ad, bd = a.data, b.data
    return make_node(ad * bd, (a, b),
                     lambda g: (_unbroadcast(g * bd, ad.shape),
                                _unbroadcast(g * ad, bd.shape)), "hadamard")


def absdiff(a: Tensor, b) -> Tensor:
    """|a - b|; the subgradient at a == b is taken as zero."""
    b = _lift(b, a)
    _binary_shape(a, b, "absdiff")
    diff = a.data - b.data
    sign = np.sign(diff)
    sa, sb = a.shape, b.shape
    return make_node(np.abs(diff), (a, b),
                     lambda g: (_unbroadcast(g * sign, sa),
                                _unbroadcast(-g * sign, sb)), "absdiff")


def scale(a: Tensor, s: float) -> Tensor:
    s = float(s)
    return make_node(a.data * a.data.dtype.type(s), (a,), lambda g: (g * s,), "scale")


_ELEMENTWISE = {"add": add, "sub": sub, "hadamard": mul, "absdiff": absdiff}


def elementwise(kind: str, a: Tensor, b) -> Tensor:
    if kind == "scale":
        if isinstance(b, Tensor):
            if b.size != 1:
                raise DimensionError(f"scale: factor must be scalar, got shape {b.shape}")
            return mul(a, b)
        return scale(a, b)
    try:
        fn = _ELEMENTWISE[kind]
    except KeyError:
        raise ValueError(f"unknown elementwise kind {kind!r}") from None
    return fn(a, b)


# ---------------------------------------------------------------------------
# linear algebra


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product with numpy's 1-d promotion rules (matrix-vector etc.)."""
    if a.ndim == 0 or b.ndim == 0 or a.ndim > 2 or b.ndim > 2 or a.shape[-1] != b.shape[0]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} do not conform")
    ad, bd = a.data, b.data

    if ad.ndim == 2 and bd.ndim == 2:
        def fn(g):
            return g @ bd.T, ad.T @ g
    elif ad.ndim == 2:
        def fn(g):
            return np.outer(g, bd), ad.T @ g
    elif bd.ndim == 2:
        def fn(g):
            return bd @ g, np.outer(ad, g)
    else:
        def fn(g):
            return g * bd, g * ad

    return make_node(ad @ bd, (a, b), fn, "matmul")


def sum(a: Tensor) -> Tensor:  # noqa: A001 - mirrors numpy naming
    shape = a.shape
    dtype = a.data.dtype
    return make_node(np.asarray(a.data.sum(), dtype=dtype), (a,),
                     lambda g: (np.broadcast_to(g, shape).astype(dtype),), "sum")


# ---------------------------------------------------------------------------
# activations


def _check_finite(x: Tensor, op: str) -> None:
    if not np.isfinite(x.data).all():
        raise NumericError(f"{op}: non-finite input")


def sigmoid(x: Tensor) -> Tensor:
    _check_finite(x, "sigmoid")
    d = x.data
    # split by sign so exp never overflows
    out = np.empty_like(d)
    pos = d >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-d[pos]))
    e = np.exp(d[~pos])
    out[~pos] = e / (1.0 + e)
    return make_node(out, (x,), lambda g: (g * out * (1.0 - out),), "sigmoid")


def tanh(x: Tensor) -> Tensor:
    _check_finite(x, "tanh")
    out = np.tanh(x.data)
    return make_node(out, (x,), lambda g: (g * (1.0 - out * out),), "tanh")


def _softmax(d: np.ndarray) -> np.ndarray:
    e = np.exp(d - d.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


def softmax(x: Tensor) -> Tensor:
    """Softmax over the last axis."""
    _check_finite(x, "softmax")
    out = _softmax(x.data)

    def fn(g):
        return (out * (g - (g * out).sum(axis=-1, keepdims=True)),)

    return make_node(out, (x,), fn, "softmax")


_ACTIVATIONS = {"sigmoid": sigmoid, "tanh": tanh, "softmax": softmax}


def activation(kind: str, x: Tensor) -> Tensor:
    try:
        return _ACTIVATIONS[kind](x)
    except KeyError:
        raise ValueError(f"unknown activation {kind!r}") from None


def cross_entropy(logits: Tensor, target: int) -> Tensor:
    """-log softmax(logits)[target] for a 1-d logit vector."""
    if logits.ndim != 1:
        raise DimensionError(f"cross_entropy expects a vector, got shape {logits.shape}")
    k = logits.shape[0]
    if not 0 <= target < k:
        raise IndexError(f"target {target} out of range for {k} classes")
    _check_finite(logits, "cross_entropy")
    d = logits.data
    shifted = d - d.max()
    logz = np.log(np.exp(shifted).sum())
    loss = logz - shifted[target]
    p = np.exp(shifted - logz)

    def fn(g):
        grad = p.copy()
        grad[target] -= 1.0
        return (grad * g,)

    return make_node(np.asarray(loss, dtype=d.dtype), (logits,), fn, "cross_entropy")


# ---------------------------------------------------------------------------
# structural


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = list(tensors)
    datas = [t.data if t.ndim else t.data.reshape(1) for t in tensors]
    try:
        out = np.concatenate(datas, axis=axis)
    except ValueError as exc:
        raise DimensionError(f"concat: {exc}") from None
    sizes = [d.shape[axis] for d in datas]
    bounds = np.cumsum([0] + sizes)
    shapes = [t.shape for t in tensors]

    def fn(g):
        parts = []
        for lo, hi, shp in zip(bounds[:-1], bounds[1:], shapes):
            piece = np.take(g, np.arange(lo, hi), axis=axis)
            parts.append(piece.reshape(shp))
        return parts

    return make_node(out, tensors, fn, "concat")


def stack(tensors: Sequence[Tensor]) -> Tensor:
    tensors = list(tensors)
    try:
        out = np.stack([t.data for t in tensors])
    except ValueError as exc:
        raise DimensionError(f"stack: {exc}") from None
    return make_node(out, tensors, lambda g: list(g), "stack")


def index(a: Tensor, key) -> Tensor:
    """Basic or integer-array indexing; scatter-adds on backward."""
    shape = a.shape
    dtype = a.data.dtype
    out = a.data[key]

    def fn(g):
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full, key, g)
        return (full,)

    return make_node(np.array(out, copy=True), (a,), fn, "index")


def take(a: Tensor, idx: int, axis: int = 0) -> Tensor:
    """Single slice along ``axis`` (e.g. one embedding column)."""
    n = a.shape[axis]
    if not -n <= idx < n:
        raise IndexError(f"index {idx} out of range for axis of size {n}")
    shape = a.shape
    dtype = a.data.dtype
    out = np.take(a.data, idx, axis=axis)

    def fn(g):
        full = np.zeros(shape, dtype=dtype)
        sl = [slice(None)] * len(shape)
        sl[axis] = idx
        full[tuple(sl)] = g
        return (full,)

    return make_node(out, (a,), fn, "take")


def repeat_rows(v: Tensor, n: int) -> Tensor:
    """Tile a vector into an ``n x len(v)`` matrix."""
    if v.ndim != 1:
        raise DimensionError(f"repeat_rows expects a vector, got shape {v.shape}")
    out = np.broadcast_to(v.data, (n, v.shape[0])).copy()
    return make_node(out, (v,), lambda g: (g.sum(axis=0),), "repeat_rows")


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = a.shape
    try:
        out = a.data.reshape(shape)
    except ValueError:
        raise DimensionError(f"reshape: cannot view {old} as {shape}") from None
    return make_node(out, (a,), lambda g: (g.reshape(old),), "reshape")


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise DimensionError(f"transpose expects a matrix, got shape {a.shape}")
    return make_node(a.data.T.copy(), (a,), lambda g: (g.T,), "transpose")
