"""Tests for the unified attack loop."""

import math

import numpy as np
import pytest

from advbench.attacks.engine import run_attack
from advbench.attacks.presets import preset
from advbench.benchmodel import BenchModel
from advbench.errors import ConfigError
from advbench.metrics import distance
from advbench.models import (
    AttackConfig,
    AttackMode,
    DirectionKind,
    InitKind,
    InitSpec,
    LossKind,
    Norm,
    SchedulerSpec,
)
from advbench.network import predict

X = np.array([0.7, 0.3])
# ℓ2 distance from X to the tie line x0 = x1 of `linear_model`.
BOUNDARY_L2 = 0.4 / math.sqrt(2)


class RecordingModel(BenchModel):
    """BenchModel that remembers every point it was queried at."""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.queries = []

    def counted_forward(self, x_query):
        self.queries.append(np.array(x_query, dtype=float))
        return super().counted_forward(x_query)

    def counted_backward(self, x_query, seed):
        self.queries.append(np.array(x_query, dtype=float))
        return super().counted_backward(x_query, seed)


def _plain(**overrides):
    settings = {
        "mode": AttackMode.MIN_NORM,
        "p": Norm.L2,
        "loss": LossKind.NCE,
        "direction": DirectionKind.NORM,
        "steps": 50,
        "step_size": 0.01,
    }
    settings.update(overrides)
    return AttackConfig(**settings)


class TestSingleStep:
    """Tests for one-step attacks."""

    def test_fgsm_crosses_boundary(self, linear_model):
        """Test FGSM with ε above the margin flips the prediction."""
        attack = preset("FGSM").model_copy(update={"epsilon": 0.15, "step_size": 0.15})
        x = np.array([0.6, 0.4])
        bm = BenchModel(linear_model, 10, Norm.LINF, x, 0)
        result = run_attack(attack, bm, x, 0)
        assert result.x_adv is not None
        assert predict(linear_model, result.x_adv) == 1
        assert distance(x, result.x_adv, Norm.LINF) <= 0.15 + 1e-12

    def test_already_misclassified(self, linear_model):
        """Test a misclassified sample gives distance zero on the first query."""
        x = np.array([0.3, 0.7])
        bm = BenchModel(linear_model, 2000, Norm.L2, x, 0)
        run_attack(preset("FMN-L2"), bm, x, 0)
        assert bm.take_best()[0] == 0.0


class TestBudget:
    """Tests for query accounting inside the loop."""

    def test_full_budget_split(self, linear_model):
        """Test 1000 steps under Q = 2000 use exactly 1000 forwards and 1000 backwards."""
        bm = BenchModel(linear_model, 2000, Norm.L2, X, 0)
        run_attack(_plain(steps=1000), bm, X, 0)
        assert bm.num_queries() == (1000, 1000)

    def test_small_budget_halts(self, linear_model):
        """Test the loop stops once the budget is spent."""
        bm = BenchModel(linear_model, 7, Norm.L2, X, 0)
        run_attack(_plain(steps=1000), bm, X, 0)
        assert sum(bm.num_queries()) == 7

    def test_penalty_respects_budget(self, linear_model):
        """Test the penalty search never exceeds the budget."""
        bm = BenchModel(linear_model, 300, Norm.L2, X, 0)
        run_attack(preset("CW-L2"), bm, X, 0)
        assert sum(bm.num_queries()) <= 300


class TestFeasibility:
    """Tests that every query stays feasible."""

    @pytest.mark.parametrize("name", ["PGD-Linf", "PGD-L2", "PGD-L1", "BIM"])
    def test_queries_in_ball_and_box(self, relu_model, name):
        """Test fixed-budget attacks only query inside the ε-ball and the box."""
        attack = preset(name).model_copy(update={"steps": 50})
        x = np.array([0.4, 0.6])
        bm = RecordingModel(relu_model, 2000, attack.p, x, 1)
        run_attack(attack, bm, x, 1)
        for query in bm.queries:
            assert np.all(query >= 0.0) and np.all(query <= 1.0)
            assert distance(x, query, attack.p) <= attack.epsilon * (1 + 1e-12)

    def test_penalty_queries_in_box_from_face(self, relu_model):
        """Test the penalty attack stays in the box when the sample sits on a face."""
        attack = preset("CW-L2").model_copy(update={"steps": 100})
        x = np.array([0.2, 0.0])
        bm = RecordingModel(relu_model, 2000, Norm.L2, x, 1)
        run_attack(attack, bm, x, 1)
        for query in bm.queries:
            assert np.all(query >= 0.0) and np.all(query <= 1.0)


class TestDeterminism:
    """Tests for seeded, reproducible runs."""

    @pytest.mark.parametrize("name", ["PGD-Linf", "DDN", "FMN-L1", "CW-L2"])
    def test_same_transcript(self, relu_model, name):
        """Test two runs issue identical queries and find the same distance."""
        attack = preset(name).model_copy(update={"steps": 100})
        x = np.array([0.45, 0.55])
        runs = []
        for _ in range(2):
            bm = RecordingModel(relu_model, 2000, attack.p, x, 2)
            run_attack(attack, bm, x, 2, entropy=(99,))
            runs.append((bm.queries, bm.take_best()[0]))
        assert len(runs[0][0]) == len(runs[1][0])
        for a, b in zip(runs[0][0], runs[1][0]):
            np.testing.assert_array_equal(a, b)
        assert runs[0][1] == runs[1][1]

    def test_more_steps_never_worse(self, relu_model):
        """Test that a longer run never ends with a larger best distance."""
        x = np.array([0.45, 0.55])
        found = []
        for steps in (5, 20, 80, 320):
            bm = BenchModel(relu_model, 2000, Norm.L2, x, 2)
            run_attack(_plain(steps=steps, scheduler=SchedulerSpec()), bm, x, 2)
            best = bm.take_best()[0]
            found.append(math.inf if best is None else best)
        assert found == sorted(found, reverse=True)


class TestMinNorm:
    """Tests for the minimum-norm heuristics on a model with a known boundary."""

    def test_ddn_converges(self, linear_model):
        """Test DDN approaches the closest boundary point."""
        bm = BenchModel(linear_model, 2000, Norm.L2, X, 0)
        run_attack(preset("DDN"), bm, X, 0)
        best = bm.take_best()[0]
        assert BOUNDARY_L2 - 1e-9 <= best <= 1.06 * BOUNDARY_L2

    def test_fmn_converges(self, linear_model):
        """Test FMN approaches the closest boundary point."""
        bm = BenchModel(linear_model, 2000, Norm.L2, X, 0)
        result = run_attack(preset("FMN-L2"), bm, X, 0)
        best = bm.take_best()[0]
        assert result.x_adv is not None
        assert BOUNDARY_L2 - 1e-9 <= best <= 1.06 * BOUNDARY_L2

    def test_cw_finds_adversarial(self, linear_model):
        """Test the penalty attack crosses the boundary close to it."""
        bm = BenchModel(linear_model, 2000, Norm.L2, X, 0)
        result = run_attack(preset("CW-L2"), bm, X, 0)
        best = bm.take_best()[0]
        assert result.x_adv is not None
        assert BOUNDARY_L2 - 1e-9 <= best <= 0.4

    def test_cw_moves_off_a_face(self, linear_model):
        """Test the penalty attack still crosses when one coordinate starts at zero."""
        x = np.array([0.9, 0.0])
        bm = BenchModel(linear_model, 2000, Norm.L2, x, 0)
        run_attack(preset("CW-L2"), bm, x, 0)
        best = bm.take_best()[0]
        assert best is not None
        assert best >= 0.9 / math.sqrt(2) - 1e-9

    def test_adv_start_is_first_query(self, linear_model):
        """Test adv initialisation queries the supplied starting point first."""
        start = np.array([0.25, 0.75])
        bm = RecordingModel(linear_model, 2000, Norm.L2, X, 0)
        attack = _plain(init=InitSpec(kind=InitKind.ADV), steps=3)
        run_attack(attack, bm, X, 0, start=start)
        np.testing.assert_allclose(bm.queries[0], start)
        assert bm.take_best()[0] is not None


class TestErrors:
    """Tests for configuration errors surfacing from the loop."""

    def test_dlr_on_binary_model(self, linear_model):
        """Test DLR against a two-class model is a config error."""
        bm = BenchModel(linear_model, 100, Norm.L2, X, 0)
        with pytest.raises(ConfigError):
            run_attack(_plain(loss=LossKind.DLR), bm, X, 0)
