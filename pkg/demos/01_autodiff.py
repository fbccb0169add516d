"""Build a tiny expression graph, backpropagate, and compare against finite differences.

Run: python demos/01_autodiff.py
"""

import numpy as np

from dmnet import tensor as T
from dmnet.nn import GruParams, gru_step

rng = np.random.default_rng(0)

with T.precision(np.float64):
    # A scalar loss through matmul, tanh and a cross-entropy head.
    W = T.parameter(rng.normal(size=(3, 4)), name="W")
    x = T.constant(rng.normal(size=4))

    def loss():
        return T.cross_entropy(T.tanh(T.matmul(W, x)), target=1)

    out = loss()
    T.backward(out)
    print(f"loss = {float(out.data):.6f}")
    print("analytic dL/dW:\n", np.round(W.grad, 6))

    # Central differences, one coordinate at a time.
    numeric = np.zeros_like(W.data)
    eps = 1e-5
    with T.no_grad():
        for idx in np.ndindex(W.shape):
            keep = W.data[idx]
            W.data[idx] = keep + eps
            up = float(loss().data)
            W.data[idx] = keep - eps
            down = float(loss().data)
            W.data[idx] = keep
            numeric[idx] = (up - down) / (2 * eps)
    print(f"max |analytic - numeric| = {np.abs(W.grad - numeric).max():.2e}")

    # The GRU cell is one fused node with its own backward rule.
    p = GruParams.create(4, 3, rng)
    h = T.tensor(np.zeros(3))
    for step in range(3):
        h = gru_step(p, T.constant(rng.normal(size=4)), h)
    T.backward(T.sum(h))
    print("after 3 GRU steps, h =", np.round(h.data, 4))
    print("dsum(h)/db_z =", np.round(p.b_z.grad, 4))
