import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from dmnet import tensor as T
from dmnet.errors import ContractError, DimensionError, NumericError

from gradcheck import check


@pytest.fixture
def f64():
    with T.precision("float64"):
        yield


def test_default_precision_is_float32():
    assert T.tensor([1.0]).data.dtype == np.float32
    with T.precision("float64"):
        assert T.tensor([1.0]).data.dtype == np.float64
    assert T.get_default_dtype() == np.float32


def test_matmul_small_cases():
    eye = T.tensor(np.eye(2))
    m = T.tensor([[1.0, 2.0], [3.0, 4.0]])
    np.testing.assert_array_equal(T.matmul(eye, m).data, m.data)
    np.testing.assert_array_equal(T.matmul(T.tensor([[2.0]]), T.tensor([[3.0]])).data, [[6.0]])


def test_matmul_matches_triple_loop(f64):
    rng = np.random.default_rng(0)
    a, b = rng.normal(size=(5, 4)), rng.normal(size=(4, 3))
    oracle = np.zeros((5, 3))
    for i in range(5):
        for j in range(3):
            for k in range(4):
                oracle[i, j] += a[i, k] * b[k, j]
    out = T.matmul(T.tensor(a), T.tensor(b)).data
    assert np.max(np.abs(out - oracle)) < 1e-12


def test_matmul_shape_mismatch():
    with pytest.raises(DimensionError):
        T.matmul(T.tensor(np.ones((2, 3))), T.tensor(np.ones((2, 3))))


def test_elementwise_values():
    np.testing.assert_array_equal(T.elementwise("hadamard", T.tensor([1.0, 2.0]),
                                                T.tensor([3.0, 4.0])).data, [3.0, 8.0])
    v = T.tensor([1.5, -2.0, 0.25])
    np.testing.assert_array_equal(T.elementwise("absdiff", v, v).data, np.zeros(3))
    np.testing.assert_array_equal(T.elementwise("scale", v, 2.0).data, [3.0, -4.0, 0.5])
    np.testing.assert_array_equal(T.elementwise("sub", v, v).data, np.zeros(3))


def test_elementwise_shape_mismatch():
    with pytest.raises(DimensionError):
        T.add(T.tensor(np.ones(3)), T.tensor(np.ones(4)))


def test_add_gradient_is_ones(f64):
    rng = np.random.default_rng(1)
    a = T.parameter(rng.normal(size=(3, 2)))
    b = T.parameter(rng.normal(size=(3, 2)))
    assert check(lambda: T.sum(T.add(a, b)), [a, b]) < 1e-8
    a.grad = None
    T.backward(T.sum(T.add(a, b)))
    np.testing.assert_array_equal(a.grad, np.ones((3, 2)))


@pytest.mark.parametrize("kind", ["add", "sub", "hadamard", "absdiff"])
def test_elementwise_gradients(f64, kind):
    rng = np.random.default_rng(2)
    a = T.parameter(rng.normal(size=4))
    b = T.parameter(rng.normal(size=4))
    w = T.constant(rng.normal(size=4))
    assert check(lambda: T.sum(T.mul(T.elementwise(kind, a, b), w)), [a, b]) < 1e-6


def test_activations_fixed_points():
    assert T.sigmoid(T.tensor(0.0)).item() == 0.5
    np.testing.assert_allclose(T.softmax(T.tensor([0.0, 0.0, 0.0])).data, [1 / 3] * 3)
    np.testing.assert_allclose(T.softmax(T.tensor([1000.0, 1000.0])).data, [0.5, 0.5])
    assert T.activation("tanh", T.tensor(0.0)).item() == 0.0


def test_activation_rejects_nonfinite():
    with pytest.raises(NumericError):
        T.sigmoid(T.tensor([np.nan]))
    with pytest.raises(NumericError):
        T.softmax(T.tensor([np.inf, 0.0]))


@pytest.mark.parametrize("kind", ["sigmoid", "tanh", "softmax"])
def test_activation_gradients(f64, kind):
    rng = np.random.default_rng(3)
    x = T.parameter(rng.normal(size=5))
    w = T.constant(rng.normal(size=5))
    assert check(lambda: T.sum(T.mul(T.activation(kind, x), w)), [x]) < 1e-6


def test_cross_entropy_values():
    assert T.cross_entropy(T.tensor(np.zeros(7)), 3).item() == pytest.approx(np.log(7), rel=1e-6)
    assert T.cross_entropy(T.tensor([40.0, -40.0]), 0).item() == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(IndexError):
        T.cross_entropy(T.tensor(np.zeros(3)), 3)


def test_cross_entropy_gradient(f64):
    rng = np.random.default_rng(4)
    logits = T.parameter(rng.normal(size=6))
    assert check(lambda: T.cross_entropy(logits, 2), [logits]) < 1e-6
    logits.grad = None
    T.backward(T.cross_entropy(logits, 2))
    expected = np.exp(logits.data) / np.exp(logits.data).sum()
    expected[2] -= 1
    np.testing.assert_allclose(logits.grad, expected, atol=1e-12)


def test_backward_product():
    x, y = T.parameter(3.0), T.parameter(5.0)
    grads = T.backward(x * y)
    assert grads[x] == 5.0 and grads[y] == 3.0


def test_backward_sum_gives_ones():
    v = T.parameter(np.arange(6.0).reshape(2, 3))
    T.backward(T.sum(v))
    np.testing.assert_array_equal(v.grad, np.ones((2, 3)))


def test_backward_needs_scalar():
    v = T.parameter(np.ones(3))
    with pytest.raises(ContractError):
        T.backward(T.mul(v, v))


def test_gradients_accumulate_over_shared_nodes(f64):
    x = T.parameter(2.0)
    y = x * x
    z = y * y  # x**4
    T.backward(z)
    assert x.grad == pytest.approx(32.0)


def test_shape_op_gradients(f64):
    rng = np.random.default_rng(5)
    a = T.parameter(rng.normal(size=(3, 4)))
    v = T.parameter(rng.normal(size=4))
    w = T.constant(rng.normal(size=(5, 4)))

    def f():
        rows = T.concat([a, T.reshape(T.take(a, 1), (1, 4)), T.repeat_rows(v, 1)], axis=0)
        mixed = T.add(T.index(rows, np.array([0, 2, 4, 3, 1])), T.transpose(T.transpose(w)))
        return T.sum(T.mul(T.tanh(mixed), w))

    assert check(f, [a, v]) < 1e-6


def test_no_grad_records_nothing():
    x = T.parameter(np.ones(3))
    with T.no_grad():
        y = T.mul(x, x)
    assert not y.requires_grad and not y.parents


def test_graph_of_lists_leaves():
    x, y = T.parameter(1.0), T.parameter(2.0)
    g = T.graph_of(T.add(T.mul(x, y), x))
    assert set(map(id, g.leaves)) == {id(x), id(y)}


finite = st.floats(-30, 30, allow_nan=False, width=64)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=finite))
def test_softmax_is_a_distribution(x):
    with T.precision("float64"):
        p = T.softmax(T.tensor(x)).data
    assert np.all(p >= 0) and abs(p.sum() - 1.0) < 1e-12


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, st.integers(1, 12), elements=finite))
def test_sigmoid_in_open_interval(x):
    with T.precision("float64"):
        g = T.sigmoid(T.tensor(x)).data
    assert np.all((g > 0) & (g < 1))
