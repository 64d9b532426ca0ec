"""Pytest fixtures for advbench tests."""

import os
import tempfile
from pathlib import Path
from unittest.mock import patch

import numpy as np
import pytest


@pytest.fixture
def temp_dir():
    """Create a temporary directory for tests."""
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def mock_settings(temp_dir):
    """Small, fast settings shared by every module through get_settings()."""
    with patch.dict(os.environ, {
        "ATTACKBENCH_THREADS": "2",
        "ATTACKBENCH_DATASET_SIZE": "30",
    }):
        from advbench.config import Settings
        settings = Settings(
            _env_file=None,
            adv_steps=2,
            lock_attempts=2,
            lock_wait_max=0.01,
        )
        with patch("advbench.config._settings", settings):
            yield settings


@pytest.fixture
def linear_model():
    """Two-class identity model: class 1 wins where x1 > x0."""
    from advbench.network import Activation, DenseLayer, ModelParams

    return ModelParams(layers=(
        DenseLayer(weight=np.eye(2), bias=np.zeros(2), activation=Activation.IDENTITY),
    ))


@pytest.fixture
def relu_model():
    """Small random ReLU network with three classes."""
    from advbench.training import init_params

    return init_params([2, 8, 3], np.random.default_rng(11))


@pytest.fixture
def line_dataset():
    """Four correctly classified points under `linear_model`, one misclassified."""
    from advbench.datasets import Dataset

    features = np.array([
        [0.7, 0.3],
        [0.9, 0.2],
        [0.2, 0.6],
        [0.1, 0.8],
        [0.3, 0.4],
    ])
    labels = np.array([0, 0, 1, 1, 0], dtype=np.int64)
    return Dataset(features=features, labels=labels, num_classes=2)


def make_record(attack, distances, model="m", norm="l2", budget=2000, forwards=1, backwards=1):
    """AttackRecord from a hash → distance mapping."""
    from advbench.models import AttackRecord, Norm, SampleResult

    return AttackRecord(
        attack=attack,
        model=model,
        norm=Norm(norm),
        budget=budget,
        records={
            h: SampleResult(distance=d, forwards=forwards, backwards=backwards)
            for h, d in distances.items()
        },
    )
