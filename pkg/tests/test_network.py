import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import helpers
from grcert.network import (
    Network, FullyConnected, Convolutional, NetworkFormatError, ShapeError,
    forward, forward_batch, class_confidence, confidence_batch,
    load_network, save_network, load_dataset, save_dataset,
)


def test_forward_zero_network():
    net = Network(
        layers=(FullyConnected(np.zeros((3, 4)), np.zeros(3), relu=False),),
        input_shape=(1, 1, 4), num_classes=3)
    tr = forward(net, np.array([0.3, 0.9, 0.0, 1.0]))
    assert np.array_equal(tr.scores, np.zeros(3))


def test_forward_identity_layer():
    net = Network(
        layers=(FullyConnected(np.eye(4), np.zeros(4), relu=False),),
        input_shape=(1, 1, 4), num_classes=4)
    e1 = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.array_equal(forward(net, e1).scores, e1)


def test_forward_matches_dense_oracle(fixture_net):
    rng = np.random.default_rng(5)
    for _ in range(20):
        x = rng.uniform(size=16)
        got = forward(fixture_net, x).scores
        want = helpers.dense_forward_oracle(fixture_net, x)
        assert np.allclose(got, want, atol=1e-12)


def test_forward_batch_matches_single(fixture_net):
    rng = np.random.default_rng(6)
    X = rng.uniform(size=(17, 16))
    S = forward_batch(fixture_net, X)
    for i in range(len(X)):
        assert np.allclose(S[i], forward(fixture_net, X[i]).scores, atol=1e-12)


def test_forward_trace_relu_exact(fixture_net):
    rng = np.random.default_rng(7)
    for _ in range(10):
        tr = forward(fixture_net, rng.uniform(size=16))
        for m, layer in enumerate(fixture_net.layers):
            if layer.relu:
                assert np.array_equal(tr.post[m], np.maximum(tr.pre[m], 0.0))
            else:
                assert np.array_equal(tr.post[m], tr.pre[m])


def test_forward_deterministic(fixture_net):
    x = np.linspace(0, 1, 16)
    t1, t2 = forward(fixture_net, x), forward(fixture_net, x)
    assert all(np.array_equal(a, b) for a, b in zip(t1.pre, t2.pre))
    assert all(np.array_equal(a, b) for a, b in zip(t1.post, t2.post))


def test_forward_shape_mismatch(fixture_net):
    with pytest.raises(ShapeError):
        forward(fixture_net, np.zeros(15))


def test_class_confidence_values():
    assert class_confidence(np.array([3.0, 1.0, 0.0]), 0) == 2.0
    assert class_confidence(np.array([1.0, 1.0]), 0) == 0.0
    assert class_confidence(np.array([0.2, 0.9, 0.9]), 0) == pytest.approx(-0.7)


def test_class_confidence_out_of_range():
    with pytest.raises(IndexError):
        class_confidence(np.array([1.0, 2.0]), 2)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=-50, max_value=50), min_size=2, max_size=8))
def test_confidence_of_argmax_nonnegative(scores):
    s = np.array(scores)
    assert class_confidence(s, int(np.argmax(s))) >= 0.0


def test_confidence_batch_matches_scalar():
    rng = np.random.default_rng(8)
    S = rng.normal(size=(50, 5))
    for cls in range(5):
        got = confidence_batch(S, cls)
        want = [class_confidence(S[i], cls) for i in range(50)]
        assert np.allclose(got, want)


def test_save_load_round_trip(fixture_net, tmp_path):
    path = tmp_path / "net.json"
    save_network(fixture_net, path)
    back = load_network(path)
    assert back.input_shape == fixture_net.input_shape
    assert back.num_classes == fixture_net.num_classes
    for a, b in zip(back.layers, fixture_net.layers):
        assert type(a) is type(b)
        if isinstance(a, FullyConnected):
            assert np.array_equal(a.weights, b.weights)
            assert np.array_equal(a.biases, b.biases)
        else:
            assert np.array_equal(a.kernel, b.kernel)
            assert a.bias == b.bias and a.stride == b.stride
        assert a.relu == b.relu


def test_load_rejects_mismatched_weights(tmp_path):
    doc = {
        "input_shape": [1, 1, 3], "num_classes": 2,
        "layers": [{"kind": "fc", "weights": [[1, 2], [3, 4]],
                    "biases": [0, 0], "relu": False}],
    }
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(NetworkFormatError):
        load_network(path)


def test_load_rejects_single_class(tmp_path):
    doc = {
        "input_shape": [1, 1, 2], "num_classes": 1,
        "layers": [{"kind": "fc", "weights": [[1, 0]], "biases": [0], "relu": False}],
    }
    path = tmp_path / "one.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(NetworkFormatError):
        load_network(path)


def test_load_rejects_unknown_fields(tmp_path):
    doc = {
        "input_shape": [1, 1, 2], "num_classes": 2, "surprise": 1,
        "layers": [{"kind": "fc", "weights": [[1, 0], [0, 1]],
                    "biases": [0, 0], "relu": False}],
    }
    path = tmp_path / "extra.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(NetworkFormatError, match="surprise"):
        load_network(path)


def test_load_rejects_relu_output(tmp_path):
    doc = {
        "input_shape": [1, 1, 2], "num_classes": 2,
        "layers": [{"kind": "fc", "weights": [[1, 0], [0, 1]],
                    "biases": [0, 0], "relu": True}],
    }
    path = tmp_path / "relu_out.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(NetworkFormatError):
        load_network(path)


def test_load_bad_json_reports_line(tmp_path):
    path = tmp_path / "trunc.json"
    path.write_text('{"input_shape": [1, 1,\n')
    with pytest.raises(NetworkFormatError, match="line"):
        load_network(path)


def test_dataset_round_trip(tmp_path):
    X = np.random.default_rng(0).uniform(size=(5, 16))
    path = tmp_path / "ds.json"
    save_dataset(X, path)
    back = load_dataset(path)
    assert np.array_equal(back, X)


def test_conv_dense_expansion_agrees(fixture_net):
    # The dense form used by batched evaluation must agree with the
    # windowed convolution arithmetic.
    rng = np.random.default_rng(11)
    X = rng.uniform(size=(4, 16))
    W, b, relu = fixture_net.dense_layers()[0]
    for x in X:
        tr = forward(fixture_net, x)
        assert np.allclose(W @ x + b, tr.pre[0], atol=1e-12)
