"""Minibatch trainer for the dense networks of the model zoo."""

import logging
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from .attacks.engine import run_attack
from .attacks.losses import softmax
from .benchmodel import BenchModel
from .datasets import Dataset
from .errors import DataError
from .models import AttackConfig
from .network import (
    Activation,
    DenseLayer,
    ModelParams,
    backward_batch,
    forward_batch,
    predict_batch,
)

logger = logging.getLogger(__name__)


class TrainConfig(BaseModel):
    """Architecture and optimisation hyperparameters."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    hidden: list[int] = Field(default_factory=lambda: [16])
    epochs: int = Field(default=100, ge=1)
    learning_rate: float = Field(default=0.5, gt=0.0)
    batch_size: int = Field(default=32, ge=1)


def init_params(dims: list[int], rng: np.random.Generator) -> ModelParams:
    """He-initialised ReLU stack with an identity output layer."""
    layers = []
    for index, (n_in, n_out) in enumerate(zip(dims[:-1], dims[1:])):
        last = index == len(dims) - 2
        layers.append(
            DenseLayer(
                weight=rng.standard_normal((n_out, n_in)) * np.sqrt(2.0 / n_in),
                bias=np.zeros(n_out),
                activation=Activation.IDENTITY if last else Activation.RELU,
            )
        )
    return ModelParams(layers=tuple(layers))


def cross_entropy_seed(logits: np.ndarray, labels: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean softmax cross-entropy over a batch and its gradient w.r.t. the logits."""
    probs = np.apply_along_axis(softmax, 1, logits)
    n = logits.shape[0]
    picked = probs[np.arange(n), labels]
    loss = float(-np.mean(np.log(np.maximum(picked, np.finfo(float).tiny))))
    seed = probs.copy()
    seed[np.arange(n), labels] -= 1.0
    return loss, seed / n


def accuracy(model: ModelParams, dataset: Dataset) -> float:
    if len(dataset) == 0:
        raise DataError("Cannot score an empty dataset")
    return float(np.mean(predict_batch(model, dataset.features) == dataset.labels))


def _perturb(
    model: ModelParams,
    attack: AttackConfig,
    features: np.ndarray,
    labels: np.ndarray,
    entropy: tuple[int, int],
) -> np.ndarray:
    budget = 2 * attack.steps + 2
    perturbed = np.empty_like(features)
    for row, (x, y) in enumerate(zip(features, labels)):
        bm = BenchModel(model, budget, attack.p, x, int(y))
        perturbed[row] = run_attack(attack, bm, x, int(y), entropy=(*entropy, row)).x_last
    return perturbed


def train(
    dataset: Dataset,
    config: TrainConfig = TrainConfig(),
    adversarial: Optional[AttackConfig] = None,
    seed: int = 0,
) -> ModelParams:
    """Fit a classifier by minibatch gradient descent on cross-entropy.

    With `adversarial` set, every minibatch is replaced by the attack's final
    iterates against the current parameters before the update.

    Returns:
        Parameters rounded to the stored 32-bit width

    Raises:
        DataError: If the dataset is empty
    """
    n = len(dataset)
    if n == 0:
        raise DataError("Cannot train on an empty dataset")
    rng = np.random.default_rng(seed)
    model = init_params([dataset.dim, *config.hidden, dataset.num_classes], rng)

    for epoch in range(config.epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for batch_index, begin in enumerate(range(0, n, config.batch_size)):
            rows = order[begin : begin + config.batch_size]
            features = dataset.features[rows]
            labels = dataset.labels[rows]
            if adversarial is not None:
                features = _perturb(model, adversarial, features, labels, (epoch, batch_index))
            trace = forward_batch(model, features)
            loss, seed_grad = cross_entropy_seed(trace.outputs, labels)
            epoch_loss += loss * len(rows)
            _, grads = backward_batch(model, trace, seed_grad)
            model = ModelParams(
                layers=tuple(
                    DenseLayer(
                        weight=layer.weight - config.learning_rate * d_weight,
                        bias=layer.bias - config.learning_rate * d_bias,
                        activation=layer.activation,
                    )
                    for layer, (d_weight, d_bias) in zip(model.layers, grads)
                )
            )
        logger.debug("Epoch %d: loss %.6f", epoch, epoch_loss / n)

    model = model.as_float32()
    logger.info("Trained %s: accuracy %.4f", config.hidden, accuracy(model, dataset))
    return model
