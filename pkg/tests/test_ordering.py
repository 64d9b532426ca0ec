"""End-to-end ranking of attack families on a trained model."""

import math

import pytest

from advbench.attacks.presets import preset, preset_names
from advbench.datasets import generate_synthetic
from advbench.harness import benchmark, build_leaderboard, to_table
from advbench.metrics import asr
from advbench.models import Norm
from advbench.training import TrainConfig, accuracy, train


@pytest.fixture(scope="module")
def trained():
    """A plain network fitted to three blobs."""
    dataset = generate_synthetic("blobs", n=100, d=2, seed=0, classes=3)
    model = train(dataset, TrainConfig(hidden=[16], epochs=100), seed=0)
    return model, dataset


class TestOrdering:
    """Iterative attacks should rank at or above their single-step versions."""

    def test_trained_model_is_accurate(self, trained):
        """Test the model learns the blobs."""
        model, dataset = trained
        assert accuracy(model, dataset) >= 0.9

    def test_iterative_beats_single_step(self, mock_settings, trained):
        """Test PGD ranks at least as high as FGSM and DDN at least as high as FGM."""
        model, dataset = trained
        records = [
            benchmark(preset(name), model, dataset, budget=2000, model_id="plain")
            for name in ("FGSM", "PGD-Linf", "FGM", "DDN")
        ]
        for record in records:
            if record.attack in ("PGD-Linf", "DDN"):
                assert asr(to_table(record), math.inf) == 1.0

        board = build_leaderboard(records)
        linf = {e.attack: e.go for e in board.board(Norm.LINF).entries}
        l2 = {e.attack: e.go for e in board.board(Norm.L2).entries}
        assert linf["PGD-Linf"] >= linf["FGSM"]
        assert l2["DDN"] >= l2["FGM"]


@pytest.fixture(scope="module")
def trained_full():
    """The full-size run: 500 blob samples and a two-layer network."""
    dataset = generate_synthetic("blobs", n=500, d=2, seed=0, classes=3)
    model = train(dataset, TrainConfig(hidden=[16], epochs=100), seed=0)
    return model, dataset


@pytest.mark.slow
class TestFullOrdering:
    """Every preset at Q = 2000 against the undefended model."""

    @pytest.fixture(scope="class")
    def records(self, trained_full):
        model, dataset = trained_full
        return [
            benchmark(preset(name), model, dataset, budget=2000, model_id="plain")
            for name in preset_names()
        ]

    def test_every_attack_always_succeeds(self, records):
        """Test each preset eventually fools the model on every sample."""
        for record in records:
            assert asr(to_table(record), math.inf) == 1.0, record.attack

    def test_iterative_margin(self, records):
        """Test PGD and DDN beat their single-step versions by at least 0.05 GO."""
        board = build_leaderboard(records)
        assert [b.norm for b in board.boards] == [Norm.L0, Norm.L1, Norm.L2, Norm.LINF]
        linf = {e.attack: e.go for e in board.board(Norm.LINF).entries}
        l2 = {e.attack: e.go for e in board.board(Norm.L2).entries}
        assert linf["PGD-Linf"] - linf["FGSM"] >= 0.05
        assert l2["DDN"] - l2["FGM"] >= 0.05
