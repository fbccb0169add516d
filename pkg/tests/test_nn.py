import numpy as np
import pytest

from dmnet import nn
from dmnet import tensor as T
from dmnet.errors import ConfigError, DimensionError

from gradcheck import check


def make_gru(n_in, n_h, seed=0, scale=1.0):
    rng = np.random.default_rng(seed)
    p = nn.GruParams.create(n_in, n_h, rng)
    for t in p.tensors():
        t.data = (rng.normal(size=t.shape) * 0.5 * scale).astype(t.data.dtype)
    return p


def gru_oracle(p, x, h):
    """The GRU equations spelled out with primitive ops."""
    z = T.sigmoid(T.add(T.add(T.matmul(p.W_z, x), T.matmul(p.U_z, h)), p.b_z))
    r = T.sigmoid(T.add(T.add(T.matmul(p.W_r, x), T.matmul(p.U_r, h)), p.b_r))
    cand = T.tanh(T.add(T.add(T.matmul(p.W_h, x), T.mul(r, T.matmul(p.U_h, h))), p.b_h))
    one_minus_z = T.sub(T.constant(np.ones(z.shape)), z)
    return T.add(T.mul(z, h), T.mul(one_minus_z, cand))


def zero_gru(n_in, n_h):
    p = nn.GruParams.create(n_in, n_h, np.random.default_rng(0))
    for t in p.tensors():
        t.data[...] = 0
    return p


def test_zero_params_halve_the_state():
    p = zero_gru(3, 4)
    h = T.tensor([1.0, -2.0, 0.5, 4.0])
    np.testing.assert_array_equal(nn.gru_step(p, T.tensor(np.ones(3)), h).data, 0.5 * h.data)
    np.testing.assert_array_equal(nn.gru_step(p, T.tensor(np.ones(3)), T.zeros(4)).data,
                                  np.zeros(4))


def test_gru_step_matches_primitive_oracle():
    with T.precision("float64"):
        p = make_gru(3, 5, seed=1)
        rng = np.random.default_rng(2)
        x, h = T.tensor(rng.normal(size=3)), T.tensor(rng.normal(size=5))
        np.testing.assert_allclose(nn.gru_step(p, x, h).data, gru_oracle(p, x, h).data,
                                   atol=1e-14)


def test_gru_step_gradients():
    with T.precision("float64"):
        p = make_gru(3, 4, seed=3)
        rng = np.random.default_rng(4)
        x = T.parameter(rng.normal(size=3))
        h = T.parameter(rng.normal(size=4))
        w = T.constant(rng.normal(size=4))
        err = check(lambda: T.sum(T.mul(nn.gru_step(p, x, h), w)), [x, h, *p.tensors()])
    assert err < 1e-4


def test_gru_step_shape_errors():
    p = make_gru(3, 4)
    with pytest.raises(DimensionError):
        nn.gru_step(p, T.zeros(4), T.zeros(4))


def test_gru_sequence_matches_step_loop():
    with T.precision("float64"):
        p = make_gru(3, 4, seed=5)
        rng = np.random.default_rng(6)
        xs = [T.tensor(rng.normal(size=3)) for _ in range(7)]
        h = T.zeros(4)
        oracle = []
        for x in xs:
            h = gru_oracle(p, x, h)
            oracle.append(h.data)
        out = nn.gru_sequence(p, xs)
        assert len(out) == 7
        for a, b in zip(out, oracle):
            np.testing.assert_allclose(a.data, b, atol=1e-14)
        one = nn.gru_sequence(p, xs[:1])
        np.testing.assert_array_equal(one[0].data, nn.gru_step(p, xs[0], T.zeros(4)).data)


def test_gru_run_matches_sequence_and_gradients():
    with T.precision("float64"):
        p = make_gru(3, 4, seed=7)
        rng = np.random.default_rng(8)
        X = T.parameter(rng.normal(size=(6, 3)))
        h0 = T.parameter(rng.normal(size=4))
        seq = nn.gru_sequence(p, [T.tensor(r) for r in X.data], h0)
        np.testing.assert_allclose(nn.gru_run(p, X, h0).data, np.stack([s.data for s in seq]),
                                   atol=1e-13)
        W = T.constant(rng.normal(size=(6, 4)))
        err = check(lambda: T.sum(T.mul(nn.gru_run(p, X, h0), W)), [X, h0, *p.tensors()])
    assert err < 1e-4


def test_embed_lookup_and_gradient():
    with T.precision("float64"):
        L = T.parameter(np.random.default_rng(0).normal(size=(4, 6)))
        emb = nn.EmbeddingMatrix(L)
        np.testing.assert_array_equal(nn.embed(emb, 2).data, L.data[:, 2])
        np.testing.assert_array_equal(nn.embed(emb, 2).data, nn.embed(emb, 2).data)
        assert check(lambda: T.sum(nn.embed(emb, 3)), [L]) < 1e-8
        L.grad = None
        T.backward(T.sum(nn.embed(emb, 3)))
        expected = np.zeros((4, 6))
        expected[:, 3] = 1
        np.testing.assert_array_equal(L.grad, expected)
        assert check(lambda: T.sum(T.tanh(nn.embed_many(emb, [1, 3, 1]))), [L]) < 1e-6
    with pytest.raises(IndexError):
        nn.embed(emb, 6)


def test_init_params_bounds_and_determinism():
    dims = {"W": (8, 5), "U": (8, 8), "b": (8,)}
    a = nn.init_params(3, "uniform-fan", dims)
    b = nn.init_params(3, "uniform-fan", dims)
    c = nn.init_params(4, "uniform-fan", dims)
    for name in dims:
        np.testing.assert_array_equal(a[name], b[name])
    assert np.abs(a["W"]).max() <= nn.glorot_bound(5, 8)
    assert np.abs(a["U"]).max() <= nn.glorot_bound(8, 8)
    assert not a["b"].any()
    differ = np.mean(np.concatenate([(a[k] != c[k]).ravel() for k in ("W", "U")]))
    assert differ >= 0.99
    z = nn.init_params(3, "zeros", dims)
    assert not any(v.any() for v in z.values())
    with pytest.raises(ConfigError):
        nn.init_params(3, "normal", dims)


def test_dropout_identity_cases():
    v = T.tensor(np.arange(5.0))
    rng = np.random.default_rng(0)
    assert nn.dropout_embed(v, 0.0, rng, True) is v
    assert nn.dropout_embed(v, 0.7, rng, False) is v
    with pytest.raises(ConfigError):
        nn.dropout_embed(v, 1.0, rng, True)


def test_dropout_preserves_mean_monte_carlo():
    with T.precision("float64"):
        v = T.tensor(np.full((100_000, 1), 2.0))
        out = nn.dropout_embed(v, 0.3, np.random.default_rng(1), True).data
    assert abs(out.mean() - 2.0) / 2.0 < 0.01


def test_linear_params():
    lin = nn.LinearParams(T.tensor([[1.0, 2.0]]), T.tensor([0.5]))
    np.testing.assert_array_equal(lin(T.tensor([1.0, 1.0])).data, [3.5])
    with pytest.raises(DimensionError):
        nn.LinearParams(T.tensor([[1.0, 2.0]]), T.tensor([0.5, 1.0]))
