"""GRU cells, embeddings, initialization and embedding dropout."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Mapping, Sequence

import numpy as np

from . import tensor as T
from .errors import ConfigError, DimensionError, NumericError
from .tensor import Tensor

SCHEMES = ("uniform-fan", "zeros")


def glorot_bound(fan_in: int, fan_out: int) -> float:
    return float(np.sqrt(6.0 / (fan_in + fan_out)))


def init_array(rng: np.random.Generator, shape: tuple[int, ...], scheme: str) -> np.ndarray:
    """Weight matrices are Glorot-uniform; vectors (biases) start at zero."""
    if scheme not in SCHEMES:
        raise ConfigError(f"unknown init scheme {scheme!r}")
    if any(n <= 0 for n in shape):
        raise ConfigError(f"dimensions must be positive, got {shape}")
    dtype = T.get_default_dtype()
    if scheme == "zeros" or len(shape) == 1:
        return np.zeros(shape, dtype=dtype)
    fan_out, fan_in = shape[0], int(np.prod(shape[1:]))
    bound = glorot_bound(fan_in, fan_out)
    return rng.uniform(-bound, bound, size=shape).astype(dtype)


def init_params(seed: int, scheme: str, dims: Mapping[str, tuple[int, ...]]) -> dict[str, np.ndarray]:
    """Draw arrays for ``dims`` (name -> shape) in insertion order.

    A pure function of its arguments: identical inputs give identical arrays.
    """
    rng = np.random.default_rng(seed)
    return {name: init_array(rng, tuple(shape), scheme) for name, shape in dims.items()}


@dataclass
class GruParams:
    """The nine arrays of a GRU cell; ``W_*`` act on the input, ``U_*`` on the state."""

    W_z: Tensor
    W_r: Tensor
    W_h: Tensor
    U_z: Tensor
    U_r: Tensor
    U_h: Tensor
    b_z: Tensor
    b_r: Tensor
    b_h: Tensor

    @property
    def n_in(self) -> int:
        return self.W_z.shape[1]

    @property
    def n_hidden(self) -> int:
        return self.W_z.shape[0]

    def tensors(self) -> list[Tensor]:
        return [getattr(self, f.name) for f in fields(self)]

    def named(self, prefix: str) -> dict[str, Tensor]:
        return {f"{prefix}.{f.name}": getattr(self, f.name) for f in fields(self)}

    @classmethod
    def dims(cls, n_in: int, n_hidden: int) -> dict[str, tuple[int, ...]]:
        return {
            "W_z": (n_hidden, n_in), "W_r": (n_hidden, n_in), "W_h": (n_hidden, n_in),
            "U_z": (n_hidden, n_hidden), "U_r": (n_hidden, n_hidden), "U_h": (n_hidden, n_hidden),
            "b_z": (n_hidden,), "b_r": (n_hidden,), "b_h": (n_hidden,),
        }

    @classmethod
    def create(cls, n_in: int, n_hidden: int, rng: np.random.Generator,
               scheme: str = "uniform-fan") -> "GruParams":
        arrays = {k: init_array(rng, s, scheme) for k, s in cls.dims(n_in, n_hidden).items()}
        return cls(**{k: T.parameter(v, name=k) for k, v in arrays.items()})

    def validate(self) -> None:
        n_h, n_i = self.n_hidden, self.n_in
        for name, shape in self.dims(n_i, n_h).items():
            got = getattr(self, name).shape
            if got != shape:
                raise DimensionError(f"GRU {name}: expected {shape}, got {got}")


def _sig(a: np.ndarray) -> np.ndarray:
    return 0.5 * (np.tanh(0.5 * a) + 1.0)


def gru_step(p: GruParams, x: Tensor, h_prev: Tensor) -> Tensor:
    """One GRU update, recorded as a single fused graph node.

    z = sig(W_z x + U_z h + b_z), r = sig(W_r x + U_r h + b_r),
    h~ = tanh(W_h x + r * (U_h h) + b_h), h' = z * h + (1 - z) * h~.
    """
    if x.shape != (p.n_in,) or h_prev.shape != (p.n_hidden,):
        raise DimensionError(
            f"gru_step: input {x.shape} / state {h_prev.shape} do not match "
            f"W {p.W_z.shape}, U {p.U_z.shape}")
    xd, hd = x.data, h_prev.data
    Wz, Wr, Wh = p.W_z.data, p.W_r.data, p.W_h.data
    Uz, Ur, Uh = p.U_z.data, p.U_r.data, p.U_h.data
    z = _sig(Wz @ xd + Uz @ hd + p.b_z.data)
    r = _sig(Wr @ xd + Ur @ hd + p.b_r.data)
    uh = Uh @ hd
    c = np.tanh(Wh @ xd + r * uh + p.b_h.data)
    out = z * hd + (1.0 - z) * c
    if not np.isfinite(out).all():
        raise NumericError("gru_step: non-finite state")

    def fn(g):
        dz = g * (hd - c)
        dac = g * (1.0 - z) * (1.0 - c * c)
        daz = dz * z * (1.0 - z)
        dar = dac * uh * r * (1.0 - r)
        duh = dac * r
        dx = Wz.T @ daz + Wr.T @ dar + Wh.T @ dac
        dh = g * z + Uz.T @ daz + Ur.T @ dar + Uh.T @ duh
        return (dx, dh,
                np.outer(daz, xd), np.outer(dar, xd), np.outer(dac, xd),
                np.outer(daz, hd), np.outer(dar, hd), np.outer(duh, hd),
                daz, dar, dac)

    parents = (x, h_prev, p.W_z, p.W_r, p.W_h, p.U_z, p.U_r, p.U_h, p.b_z, p.b_r, p.b_h)
    return T.make_node(out, parents, fn, "gru_step")


def gru_sequence(p: GruParams, xs: Sequence[Tensor], h0: Tensor | None = None) -> list[Tensor]:
    """Run :func:`gru_step` over ``xs``; returns every hidden state."""
    h = T.zeros(p.n_hidden) if h0 is None else h0
    states = []
    for x in xs:
        h = gru_step(p, x, h)
        states.append(h)
    return states


def gru_run(p: GruParams, X: Tensor, h0: Tensor | None = None) -> Tensor:
    """All hidden states for the rows of ``X`` as one graph node, shape (T, n_H).

    Computes the same recurrence as repeated :func:`gru_step`; the input
    projections and all weight gradients are batched over time.
    """
    if X.ndim != 2 or X.shape[1] != p.n_in or X.shape[0] < 1:
        raise DimensionError(f"gru_run: inputs {X.shape} for W {p.W_z.shape}")
    n = p.n_hidden
    steps = X.shape[0]
    dtype = X.data.dtype
    h_init = np.zeros(n, dtype=dtype) if h0 is None else h0.data
    Xd = X.data
    Wz, Wr, Wh = p.W_z.data, p.W_r.data, p.W_h.data
    U = np.concatenate([p.U_z.data, p.U_r.data, p.U_h.data])
    XZ = Xd @ Wz.T + p.b_z.data
    XR = Xd @ Wr.T + p.b_r.data
    XH = Xd @ Wh.T + p.b_h.data
    H = np.empty((steps, n), dtype=dtype)
    Z = np.empty_like(H)
    R = np.empty_like(H)
    C = np.empty_like(H)
    UH = np.empty_like(H)
    h = h_init
    for t in range(steps):
        u = U @ h
        z = _sig(XZ[t] + u[:n])
        r = _sig(XR[t] + u[n:2 * n])
        uh = u[2 * n:]
        c = np.tanh(XH[t] + r * uh)
        h = z * h + (1.0 - z) * c
        H[t], Z[t], R[t], C[t], UH[t] = h, z, r, c, uh
    if not np.isfinite(H).all():
        raise NumericError("gru_run: non-finite state")
    H_prev = np.vstack([h_init[None, :], H[:-1]])

    def fn(G):
        DZ = np.empty_like(H)
        DR = np.empty_like(H)
        DC = np.empty_like(H)
        DU = np.empty_like(H)
        carry = np.zeros(n, dtype=dtype)
        for t in range(steps - 1, -1, -1):
            g = G[t] + carry
            z, c, r = Z[t], C[t], R[t]
            dac = g * (1.0 - z) * (1.0 - c * c)
            daz = g * (H_prev[t] - c) * z * (1.0 - z)
            dar = dac * UH[t] * r * (1.0 - r)
            duh = dac * r
            DZ[t], DR[t], DC[t], DU[t] = daz, dar, dac, duh
            carry = g * z + U.T @ np.concatenate([daz, dar, duh])
        dX = DZ @ Wz + DR @ Wr + DC @ Wh
        return (dX, carry,
                DZ.T @ Xd, DR.T @ Xd, DC.T @ Xd,
                DZ.T @ H_prev, DR.T @ H_prev, DU.T @ H_prev,
                DZ.sum(axis=0), DR.sum(axis=0), DC.sum(axis=0))

    h0_t = h0 if h0 is not None else T.constant(h_init)
    parents = (X, h0_t, p.W_z, p.W_r, p.W_h, p.U_z, p.U_r, p.U_h, p.b_z, p.b_r, p.b_h)
    return T.make_node(H, parents, fn, "gru_run")


@dataclass
class LinearParams:
    weight: Tensor
    bias: Tensor

    def __post_init__(self):
        if self.bias.shape != (self.weight.shape[0],):
            raise DimensionError(
                f"bias {self.bias.shape} does not match weight {self.weight.shape}")

    def __call__(self, x: Tensor) -> Tensor:
        return T.add(T.matmul(self.weight, x), self.bias)


@dataclass
class EmbeddingMatrix:
    """Column-per-token embedding table ``L`` of shape (n_I, |V|)."""

    L: Tensor
    trainable: bool = True

    def __post_init__(self):
        self.L.requires_grad = self.trainable

    @property
    def dim(self) -> int:
        return self.L.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.L.shape[1]


def embed(emb: EmbeddingMatrix, idx: int) -> Tensor:
    if not 0 <= idx < emb.vocab_size:
        raise IndexError(f"token id {idx} out of range for vocabulary of {emb.vocab_size}")
    return T.take(emb.L, idx, axis=1)


def embed_many(emb: EmbeddingMatrix, ids: Sequence[int]) -> Tensor:
    """Rows ``L[:, ids].T`` as one node, shape (len(ids), n_I)."""
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= emb.vocab_size):
        raise IndexError(f"token id out of range for vocabulary of {emb.vocab_size}")
    L = emb.L
    shape, dtype = L.shape, L.data.dtype
    out = L.data[:, ids].T.copy()

    def fn(g):
        full = np.zeros(shape, dtype=dtype)
        np.add.at(full.T, ids, g)
        return (full,)

    return T.make_node(out, (L,), fn, "embed")


def dropout_embed(v: Tensor, rate: float, rng: np.random.Generator | None,
                  training: bool) -> Tensor:
    """Inverted dropout: survivors are scaled by 1/(1-rate) at train time."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return v
    keep = rng.random(v.shape) >= rate
    mask = keep.astype(v.data.dtype) / v.data.dtype.type(1.0 - rate)
    return T.mul(v, T.constant(mask))
