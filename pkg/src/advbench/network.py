"""Dense ReLU networks: inference and reverse-mode input gradients.

Models are immutable stacks of dense layers. `forward` records every layer
input and pre-activation in a `ForwardTrace`, which `gradient` replays in
reverse to accumulate the vector-Jacobian product seedᵀ·∂logits/∂x.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionError, StateError


class Activation(str, Enum):
    """Element-wise layer activations."""

    RELU = "relu"
    IDENTITY = "identity"


@dataclass(frozen=True)
class DenseLayer:
    """One dense layer: activation(W @ h + b)."""

    weight: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)
    activation: Activation = Activation.RELU

    @property
    def in_dim(self) -> int:
        return int(self.weight.shape[1])

    @property
    def out_dim(self) -> int:
        return int(self.weight.shape[0])


@dataclass(frozen=True)
class ModelParams:
    """A classifier f(x, θ) mapping [0,1]^d to C logits."""

    layers: tuple[DenseLayer, ...]

    def __post_init__(self) -> None:
        if not self.layers:
            raise DimensionError("Model needs at least one layer")
        previous = None
        for index, layer in enumerate(self.layers):
            if layer.weight.ndim != 2 or layer.bias.shape != (layer.out_dim,):
                raise DimensionError(f"Layer {index}: bias does not match weight rows")
            if previous is not None and layer.in_dim != previous:
                raise DimensionError(
                    f"Layer {index}: expects {layer.in_dim} inputs, previous layer gives {previous}"
                )
            if not (np.all(np.isfinite(layer.weight)) and np.all(np.isfinite(layer.bias))):
                raise DimensionError(f"Layer {index}: non-finite parameters")
            previous = layer.out_dim
        if self.num_classes < 2:
            raise DimensionError("Model needs at least two classes")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def num_classes(self) -> int:
        return self.layers[-1].out_dim

    def as_float32(self) -> "ModelParams":
        """Round every parameter to the stored 32-bit width."""
        return ModelParams(
            layers=tuple(
                DenseLayer(
                    weight=layer.weight.astype(np.float32).astype(np.float64),
                    bias=layer.bias.astype(np.float32).astype(np.float64),
                    activation=layer.activation,
                )
                for layer in self.layers
            )
        )

    def equals(self, other: "ModelParams") -> bool:
        """Bitwise parameter equality."""
        if len(self.layers) != len(other.layers):
            return False
        return all(
            a.activation == b.activation
            and np.array_equal(a.weight, b.weight)
            and np.array_equal(a.bias, b.bias)
            for a, b in zip(self.layers, other.layers)
        )


@dataclass(frozen=True)
class ForwardTrace:
    """Activations cached by `forward` for gradient replay."""

    inputs: tuple[np.ndarray, ...]  # input to each layer, batch-shaped
    pre_activations: tuple[np.ndarray, ...]
    outputs: np.ndarray  # (n, C)

    @property
    def logits(self) -> np.ndarray:
        return self.outputs[0]


def _check_input(model: ModelParams, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.input_dim or x.ndim not in (1, 2):
        raise DimensionError(f"Expected input of dim {model.input_dim}, got shape {x.shape}")
    return x


def forward_batch(model: ModelParams, inputs: np.ndarray) -> ForwardTrace:
    """Run a batch of shape (n, d) through the network."""
    h = _check_input(model, inputs)
    if h.ndim == 1:
        h = h[None, :]
    layer_inputs = []
    pre_activations = []
    for layer in model.layers:
        layer_inputs.append(h)
        z = h @ layer.weight.T + layer.bias
        pre_activations.append(z)
        h = np.maximum(z, 0.0) if layer.activation == Activation.RELU else z
    return ForwardTrace(
        inputs=tuple(layer_inputs), pre_activations=tuple(pre_activations), outputs=h
    )


def forward(model: ModelParams, x: np.ndarray) -> ForwardTrace:
    """Evaluate the logits of a single input and keep the trace."""
    x = _check_input(model, x)
    if x.ndim != 1:
        raise DimensionError("forward takes a single vector; use forward_batch for batches")
    return forward_batch(model, x)


def backward_batch(
    model: ModelParams, trace: ForwardTrace | None, seed: np.ndarray
) -> tuple[np.ndarray, list[tuple[np.ndarray, np.ndarray]]]:
    """Reverse accumulation through a trace.

    Returns the input gradient (n, d) and per-layer (∂W, ∂b) summed over the
    batch. ReLU units with non-positive pre-activation pass no gradient.
    """
    if trace is None:
        raise StateError("No forward trace available; call forward first")
    if len(trace.pre_activations) != len(model.layers):
        raise StateError("Trace does not belong to this model")
    grad = np.asarray(seed, dtype=np.float64)
    if grad.ndim == 1:
        grad = grad[None, :]
    if grad.shape != trace.outputs.shape:
        raise DimensionError(f"Seed shape {grad.shape} does not match logits {trace.outputs.shape}")

    layer_grads: list[tuple[np.ndarray, np.ndarray]] = []
    for layer, h, z in zip(
        reversed(model.layers), reversed(trace.inputs), reversed(trace.pre_activations)
    ):
        if layer.activation == Activation.RELU:
            grad = grad * (z > 0.0)
        layer_grads.append((grad.T @ h, grad.sum(axis=0)))
        grad = grad @ layer.weight
    layer_grads.reverse()
    return grad, layer_grads


def gradient(model: ModelParams, trace: ForwardTrace | None, seed: np.ndarray) -> np.ndarray:
    """∂(seedᵀ·logits)/∂x for the input recorded in `trace`."""
    seed = np.asarray(seed, dtype=np.float64)
    if seed.shape != (model.num_classes,):
        raise DimensionError(f"Seed must have length {model.num_classes}")
    input_grad, _ = backward_batch(model, trace, seed)
    return input_grad[0]


def predict(model: ModelParams, x: np.ndarray) -> int:
    """Predicted class; ties go to the smallest index."""
    return int(np.argmax(forward(model, x).logits))


def predict_batch(model: ModelParams, inputs: np.ndarray) -> np.ndarray:
    return np.argmax(forward_batch(model, inputs).outputs, axis=1)
