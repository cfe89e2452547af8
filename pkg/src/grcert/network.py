"""Layered ReLU classifiers: exact evaluation, confidences, file format.

A network is a stack of fully-connected and convolutional layers over an
image domain [0,1]^(channels x height x width).  Layers are evaluated in
float64.  Class indices are 0-based throughout the package; pixel
coordinates in perturbation specs are 1-based (see perturb module).

Index flattening convention, shared by every module: a pixel (i, j) of a
single-channel image, 1-based, maps to k = (i-1)*d2 + j.  For multiple
channels the channel is the outermost axis.  This is exactly numpy's
C-order flattening of an (l, d1, d2) array.
"""

from dataclasses import dataclass
import json

import numpy as np


class NetworkFormatError(ValueError):
    """Malformed or invalid network/dataset file."""


class ShapeError(ValueError):
    """Input does not match the network's input shape."""


@dataclass(frozen=True)
class FullyConnected:
    weights: np.ndarray  # (n_out, n_in)
    biases: np.ndarray   # (n_out,)
    relu: bool

    def out_size(self, in_shape):
        n_in = int(np.prod(in_shape))
        if self.weights.ndim != 2 or self.weights.shape[1] != n_in:
            raise NetworkFormatError(
                f"fc weights shape {self.weights.shape} does not accept {n_in} inputs"
            )
        if self.biases.shape != (self.weights.shape[0],):
            raise NetworkFormatError(
                f"fc biases shape {self.biases.shape} does not match {self.weights.shape[0]} neurons"
            )
        return (self.weights.shape[0],)


@dataclass(frozen=True)
class Convolutional:
    kernel: np.ndarray   # (channels, t, t), one kernel
    bias: float
    stride: int
    relu: bool

    def out_size(self, in_shape):
        if len(in_shape) != 3:
            raise NetworkFormatError("conv layer needs a (channels, h, w) input")
        l, d1, d2 = in_shape
        c, t1, t2 = self.kernel.shape
        if c != l or t1 != t2:
            raise NetworkFormatError(
                f"conv kernel {self.kernel.shape} does not fit input {in_shape}"
            )
        if self.stride < 1:
            raise NetworkFormatError("conv stride must be >= 1")
        t, s = t1, self.stride
        if t > d1 or t > d2:
            raise NetworkFormatError("conv kernel larger than its input")
        return (1, (d1 - t) // s + 1, (d2 - t) // s + 1)


Layer = FullyConnected | Convolutional


@dataclass(frozen=True)
class Network:
    layers: tuple
    input_shape: tuple   # (l, d1, d2)
    num_classes: int

    def __post_init__(self):
        if self.num_classes <= 1:
            raise NetworkFormatError("classifier must have more than one class")
        shape = self.input_shape
        for idx, layer in enumerate(self.layers):
            shape = layer.out_size(shape)
        if int(np.prod(shape)) != self.num_classes:
            raise NetworkFormatError(
                f"output size {int(np.prod(shape))} != num_classes {self.num_classes}"
            )
        last = self.layers[-1]
        if last.relu:
            raise NetworkFormatError("output layer must not apply ReLU")

    @property
    def input_size(self):
        return int(np.prod(self.input_shape))

    def layer_shapes(self):
        """Per-layer output shapes, starting with the input shape."""
        shapes = [self.input_shape]
        for layer in self.layers:
            shapes.append(layer.out_size(shapes[-1]))
        return shapes

    def layer_widths(self):
        """Flattened neuron counts [n0, k_1, ..., k_L]."""
        return [int(np.prod(s)) for s in self.layer_shapes()]

    def dense_layers(self):
        """Each layer as an equivalent dense (W, b) over flattened vectors.

        Convolutions are expanded by placing the kernel at every strided
        window position; the expansion is cached on first use.
        """
        cached = getattr(self, "_dense_cache", None)
        if cached is not None:
            return cached
        dense = []
        shapes = self.layer_shapes()
        for layer, in_shape in zip(self.layers, shapes):
            if isinstance(layer, FullyConnected):
                dense.append((layer.weights, layer.biases, layer.relu))
            else:
                W, b = _conv_as_dense(layer, in_shape)
                dense.append((W, b, layer.relu))
        object.__setattr__(self, "_dense_cache", tuple(dense))
        return tuple(dense)


def _conv_as_dense(layer, in_shape):
    l, d1, d2 = in_shape
    t = layer.kernel.shape[1]
    s = layer.stride
    oh, ow = (d1 - t) // s + 1, (d2 - t) // s + 1
    W = np.zeros((oh * ow, l * d1 * d2))
    for oi in range(oh):
        for oj in range(ow):
            row = W[oi * ow + oj].reshape(l, d1, d2)
            row[:, oi * s:oi * s + t, oj * s:oj * s + t] = layer.kernel
    b = np.full(oh * ow, float(layer.bias))
    return W, b


@dataclass(frozen=True)
class Trace:
    """Full per-neuron record of one forward pass (flattened vectors)."""
    inputs: np.ndarray        # z_0
    pre: tuple                # hat z_m for m = 1..L
    post: tuple               # z_m for m = 1..L

    @property
    def scores(self):
        return self.post[-1]


def forward(net: Network, x: np.ndarray) -> Trace:
    """Evaluate the network exactly, recording every pre/post activation.

    `x` must match net.input_shape (a flat vector of the right size is
    also accepted).  No domain check is made: traces of out-of-range
    points are well-defined and used by the perturbation machinery.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape == (net.input_size,):
        x = x.reshape(net.input_shape)
    if x.shape != net.input_shape:
        raise ShapeError(f"input shape {x.shape} != network input {net.input_shape}")
    z = x
    pre, post = [], []
    shapes = net.layer_shapes()
    for layer, in_shape in zip(net.layers, shapes):
        if isinstance(layer, FullyConnected):
            zhat = layer.biases + layer.weights @ z.reshape(-1)
            out = zhat
        else:
            zc = z.reshape(in_shape)
            t, s = layer.kernel.shape[1], layer.stride
            oh = (in_shape[1] - t) // s + 1
            ow = (in_shape[2] - t) // s + 1
            out = np.empty((oh, ow))
            for oi in range(oh):
                for oj in range(ow):
                    win = zc[:, oi * s:oi * s + t, oj * s:oj * s + t]
                    out[oi, oj] = layer.bias + float(np.sum(layer.kernel * win))
            zhat = out.reshape(-1)
        pre.append(zhat)
        z = np.maximum(zhat, 0.0) if layer.relu else zhat
        post.append(z)
        z = z.reshape(-1)
    return Trace(inputs=x.reshape(-1).copy(), pre=tuple(pre), post=tuple(post))


def forward_batch(net: Network, X: np.ndarray) -> np.ndarray:
    """Scores for a batch of flattened inputs, shape (n, input_size) -> (n, c).

    Uses the dense expansion of every layer; equivalent to per-input
    forward() but vectorized for the attack and the grid oracle.
    """
    Z = np.asarray(X, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != net.input_size:
        raise ShapeError(f"batch shape {Z.shape} incompatible with input size {net.input_size}")
    for W, b, relu in net.dense_layers():
        Z = Z @ W.T + b
        if relu:
            Z = np.maximum(Z, 0.0)
    return Z


def class_confidence(scores: np.ndarray, c_prime: int) -> float:
    """Score of class c_prime minus the best score among the others.

    Positive iff the (unique) argmax is c_prime.  Classes are 0-based.
    """
    scores = np.asarray(scores, dtype=np.float64)
    c = scores.shape[0]
    if not 0 <= c_prime < c:
        raise IndexError(f"class {c_prime} out of range for {c} classes")
    others = np.delete(scores, c_prime)
    return float(scores[c_prime] - np.max(others))


def confidence_batch(scores: np.ndarray, c_prime: int) -> np.ndarray:
    """Vectorized class_confidence over a (n, c) score matrix."""
    c = scores.shape[1]
    if not 0 <= c_prime < c:
        raise IndexError(f"class {c_prime} out of range for {c} classes")
    others = np.delete(scores, c_prime, axis=1)
    return scores[:, c_prime] - np.max(others, axis=1)


# ---------------------------------------------------------------------------
# Canonical file format (JSON; documented in README)
#
# {
#   "input_shape": [l, d1, d2],
#   "num_classes": c,
#   "layers": [
#     {"kind": "fc", "weights": [[...], ...], "biases": [...], "relu": true},
#     {"kind": "conv", "kernel": [[[...]]], "bias": 0.0, "stride": 2, "relu": true}
#   ]
# }
#
# Weight matrices are row-major: weights[k] is the input weight row of
# neuron k.  Unknown fields anywhere are rejected.
# ---------------------------------------------------------------------------

_TOP_FIELDS = {"input_shape", "num_classes", "layers"}
_FC_FIELDS = {"kind", "weights", "biases", "relu"}
_CONV_FIELDS = {"kind", "kernel", "bias", "stride", "relu"}


def _reject_unknown(d, allowed, where):
    extra = set(d) - allowed
    if extra:
        raise NetworkFormatError(f"unknown field(s) {sorted(extra)} in {where}")


def _layer_from_dict(d, idx):
    where = f"layers[{idx}]"
    if not isinstance(d, dict) or "kind" not in d:
        raise NetworkFormatError(f"{where}: expected an object with a 'kind' field")
    kind = d["kind"]
    try:
        if kind == "fc":
            _reject_unknown(d, _FC_FIELDS, where)
            return FullyConnected(
                weights=np.array(d["weights"], dtype=np.float64),
                biases=np.array(d["biases"], dtype=np.float64),
                relu=bool(d["relu"]),
            )
        if kind == "conv":
            _reject_unknown(d, _CONV_FIELDS, where)
            return Convolutional(
                kernel=np.array(d["kernel"], dtype=np.float64),
                bias=float(d["bias"]),
                stride=int(d["stride"]),
                relu=bool(d["relu"]),
            )
    except KeyError as e:
        raise NetworkFormatError(f"{where}: missing field {e}") from None
    except (TypeError, ValueError) as e:
        raise NetworkFormatError(f"{where}: {e}") from None
    raise NetworkFormatError(f"{where}: unknown layer kind {kind!r}")


def load_network(path) -> Network:
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise NetworkFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise NetworkFormatError(f"{path}: top level must be an object")
    _reject_unknown(doc, _TOP_FIELDS, "top level")
    try:
        input_shape = tuple(int(v) for v in doc["input_shape"])
        num_classes = int(doc["num_classes"])
        raw_layers = doc["layers"]
    except KeyError as e:
        raise NetworkFormatError(f"{path}: missing field {e}") from None
    if len(input_shape) != 3 or any(v < 1 for v in input_shape):
        raise NetworkFormatError(f"{path}: input_shape must be three positive ints")
    layers = tuple(_layer_from_dict(d, i) for i, d in enumerate(raw_layers))
    return Network(layers=layers, input_shape=input_shape, num_classes=num_classes)


def save_network(net: Network, path) -> None:
    out = {"input_shape": list(net.input_shape), "num_classes": net.num_classes, "layers": []}
    for layer in net.layers:
        if isinstance(layer, FullyConnected):
            out["layers"].append({
                "kind": "fc",
                "weights": layer.weights.tolist(),
                "biases": layer.biases.tolist(),
                "relu": layer.relu,
            })
        else:
            out["layers"].append({
                "kind": "conv",
                "kernel": layer.kernel.tolist(),
                "bias": float(layer.bias),
                "stride": layer.stride,
                "relu": layer.relu,
            })
    with open(path, "w") as f:
        json.dump(out, f, indent=1)
        f.write("\n")


def load_dataset(path) -> np.ndarray:
    """Dataset file: JSON array of input tensors (or flat vectors)."""
    with open(path) as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise NetworkFormatError(f"{path}: invalid JSON at line {e.lineno}: {e.msg}") from None
    if not isinstance(doc, list):
        raise NetworkFormatError(f"{path}: dataset must be a JSON array of tensors")
    arr = np.array(doc, dtype=np.float64)
    return arr.reshape(arr.shape[0], -1)


def save_dataset(X: np.ndarray, path) -> None:
    with open(path, "w") as f:
        json.dump(np.asarray(X).tolist(), f)
        f.write("\n")
