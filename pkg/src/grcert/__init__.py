"""grcert: anytime global-robustness bound certification for small ReLU
classifiers, via an exact two-copy mixed-integer encoding, dependency
pruning, and a hyper-adversarial warm-start attack."""

from .network import (
    Network, FullyConnected, Convolutional, Trace,
    forward, forward_batch, class_confidence, confidence_batch,
    load_network, save_network, load_dataset, save_dataset,
    NetworkFormatError, ShapeError,
)
from .perturb import PerturbationSpec, PerturbationCase, parse_spec, apply, SpecError

__version__ = "0.1.0"
