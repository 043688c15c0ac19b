import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from credit_pricer.exceptions import NumericalError, ValidationError
from credit_pricer.nn import (
    AdamState,
    DenseLayer,
    MinMaxScaler,
    Network,
    adam_step,
    load_network,
    save_network,
)
from oracles import finite_difference_gradients, mlp_forward


def random_net(seed, activation="tanh"):
    rng = np.random.default_rng(seed)
    n_in = int(rng.integers(1, 5))
    sizes = [n_in] + [int(rng.integers(1, 6)) for _ in range(int(rng.integers(1, 3)))] + [int(rng.integers(1, 3))]
    return Network.build(sizes, activation=activation, rng=rng), rng


def gradient_check(seed, activation="tanh"):
    net, rng = random_net(seed, activation)
    x = rng.normal(size=(3, net.in_dim))
    upstream = rng.normal(size=(3, net.out_dim))
    net.forward(x)
    analytic = net.backward(upstream)
    numeric = finite_difference_gradients(net, x, upstream)
    return max(float(np.max(np.abs(a - n) / np.maximum(1.0, np.abs(a)))) for a, n in zip(analytic, numeric))


def test_identity_layer():
    net = Network([DenseLayer(np.eye(2), np.zeros(2), "identity")])
    np.testing.assert_array_equal(net.forward(np.array([1.0, 2.0])), [1.0, 2.0])


def test_relu_layer():
    net = Network([DenseLayer(np.eye(2), np.zeros(2), "relu")])
    np.testing.assert_array_equal(net.forward(np.array([-3.0, 5.0])), [0.0, 5.0])


def test_forward_matches_hand_rolled_trace():
    net = Network.build([3, 4, 2], activation="relu", rng=5)
    x = np.random.default_rng(1).normal(size=(4, 3))
    layers = [(l.weights, l.biases, l.activation) for l in net.layers]
    np.testing.assert_allclose(net.forward(x), mlp_forward(layers, x), rtol=1e-12, atol=1e-12)


def test_linear_gradient():
    net = Network([DenseLayer([[0.3]], [0.0], "identity")])
    net.forward(np.array([[2.0]]))
    gw, gb = net.backward(np.array([[1.0]]))
    assert gw[0, 0] == pytest.approx(2.0)
    assert gb[0] == pytest.approx(1.0)


def test_zero_upstream_gives_zero_gradients():
    net, rng = random_net(3)
    net.forward(rng.normal(size=(2, net.in_dim)))
    for g in net.backward(np.zeros((2, net.out_dim))):
        assert not np.any(g)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 10_000))
def test_gradient_check_property(seed):
    assert gradient_check(seed, "tanh") <= 1e-4


@pytest.mark.parametrize("seed", range(10))
def test_gradient_check_relu(seed):
    assert gradient_check(seed, "relu") <= 1e-4


def test_input_gradient():
    net = Network.build([3, 5, 1], activation="tanh", rng=2)
    x = np.array([[0.1, -0.4, 0.7]])
    net.forward(x)
    net.backward(np.ones((1, 1)))
    h = 1e-6
    for j in range(3):
        e = np.zeros_like(x)
        e[0, j] = h
        fd = (net.forward(x + e)[0, 0] - net.forward(x - e)[0, 0]) / (2 * h)
        assert net.input_grad[0, j] == pytest.approx(fd, rel=1e-6, abs=1e-9)


def test_dropout_only_in_training():
    net = Network.build([4, 16, 1], dropout=0.5, rng=0)
    x = np.ones((8, 4))
    np.testing.assert_array_equal(net.forward(x), net.forward(x))
    a = net.forward(x, training=True, rng=np.random.default_rng(0))
    b = net.forward(x, training=True, rng=np.random.default_rng(1))
    assert not np.array_equal(a, b)
    with pytest.raises(ValidationError):
        net.forward(x, training=True)


def test_dropout_gradient_uses_mask():
    net = Network.build([3, 6, 1], activation="tanh", dropout=0.3, rng=4)
    x = np.random.default_rng(0).normal(size=(5, 3))
    net.forward(x, training=True, rng=np.random.default_rng(9))
    analytic = net.backward(np.ones((5, 1)))
    masks = [m for (_, _, _, m) in net._cache]

    def loss():
        h = x
        for layer, m in zip(net.layers, masks):
            h = h @ layer.weights.T + layer.biases
            h = np.tanh(h) if layer.activation == "tanh" else h
            h = h * m if m is not None else h
        return h.sum()

    p = net.parameters()[0]
    eps = 1e-6
    old = p[0, 0]
    p[0, 0] = old + eps
    up = loss()
    p[0, 0] = old - eps
    down = loss()
    p[0, 0] = old
    assert analytic[0][0, 0] == pytest.approx((up - down) / (2 * eps), rel=1e-6, abs=1e-9)


def test_determinism():
    def trace(seed):
        net = Network.build([3, 8, 1], dropout=0.2, rng=seed)
        opt = AdamState.for_parameters(net.parameters(), 1e-2, weight_decay=1e-4)
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(5):
            x = rng.normal(size=(4, 3))
            y = net.forward(x, training=True, rng=rng)
            grads = net.backward(y)
            adam_step(net, grads, opt)
            out.append(np.concatenate([p.ravel() for p in net.parameters()]))
        return np.array(out)

    assert np.array_equal(trace(7), trace(7))


def test_dimension_mismatch():
    with pytest.raises(ValidationError):
        Network([DenseLayer(np.ones((3, 2)), np.zeros(3)), DenseLayer(np.ones((1, 2)), np.zeros(1))])
    with pytest.raises(ValidationError):
        Network.build([2, 1], rng=0).forward(np.ones((1, 3)))


def test_nonfinite_input_rejected():
    with pytest.raises(NumericalError):
        Network.build([2, 1], rng=0).forward(np.array([[np.nan, 1.0]]))


def test_adam_zero_gradient_no_decay():
    params = [np.array([1.0, -2.0])]
    state = AdamState.for_parameters(params, 1e-3)
    adam_step(params, [np.zeros(2)], state)
    np.testing.assert_array_equal(params[0], [1.0, -2.0])
    assert state.step == 1


def test_adam_first_step_is_sign():
    params = [np.array([0.5, 0.5, 0.5])]
    state = AdamState.for_parameters(params, 1e-3)
    adam_step(params, [np.array([3.0, -0.2, 1e-3])], state)
    np.testing.assert_allclose(params[0] - 0.5, [-1e-3, 1e-3, -1e-3], rtol=1e-4)


def test_adam_decoupled_decay():
    params = [np.array([2.0])]
    state = AdamState.for_parameters(params, 0.1, weight_decay=1e-4)
    adam_step(params, [np.zeros(1)], state)
    assert params[0][0] == pytest.approx(2.0 * (1 - 0.1 * 1e-4), rel=1e-14)


def test_adam_step_counter_and_shapes():
    params = [np.zeros((2, 2))]
    state = AdamState.for_parameters(params, 1e-3)
    for k in range(3):
        adam_step(params, [np.ones((2, 2))], state)
        assert state.step == k + 1
    assert state.m[0].shape == state.v[0].shape == (2, 2)
    with pytest.raises(NumericalError):
        adam_step(params, [np.full((2, 2), np.inf)], state)
    with pytest.raises(ValidationError):
        adam_step(params, [np.ones(3)], state)


def test_scaler_examples():
    s = MinMaxScaler().fit(np.array([[2.0], [4.0], [6.0]]))
    np.testing.assert_allclose(s.transform(np.array([[2.0], [4.0], [6.0]]))[:, 0], [0, 0.5, 1])
    c = MinMaxScaler().fit(np.array([[5.0], [5.0]]))
    np.testing.assert_array_equal(c.transform(np.array([[5.0], [5.0]]))[:, 0], [0.5, 0.5])
    np.testing.assert_array_equal(c.inverse_transform(np.array([[0.5]])), [[5.0]])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e6, 1e6), min_size=2, max_size=20), st.sampled_from([(0.0, 1.0), (-1.0, 1.0)]))
def test_scaler_round_trip(values, feature_range):
    X = np.array(values).reshape(-1, 1)
    s = MinMaxScaler(feature_range).fit(X)
    np.testing.assert_allclose(s.inverse_transform(s.transform(X)), X, atol=1e-9 * max(1.0, np.abs(X).max()))


def test_scaler_serialisation():
    s = MinMaxScaler((-1, 1)).fit(np.random.default_rng(0).normal(size=(10, 3)))
    t = MinMaxScaler.from_dict(json.loads(json.dumps(s.to_dict())))
    x = np.random.default_rng(1).normal(size=(4, 3))
    np.testing.assert_array_equal(s.transform(x), t.transform(x))


def test_network_save_load(tmp_path):
    net = Network.build([3, 4, 2], dropout=0.1, rng=0)
    opt = AdamState.for_parameters(net.parameters(), 1e-3)
    adam_step(net, [np.ones_like(p) for p in net.parameters()], opt)
    save_network(tmp_path / "net.json", net, opt)
    net2, opt2 = load_network(tmp_path / "net.json")
    x = np.ones((2, 3))
    np.testing.assert_array_equal(net.forward(x), net2.forward(x))
    assert opt2.step == 1
    with pytest.raises(ValidationError):
        Network.from_dict({"format": "other", "version": 1, "layers": []})
