"""Tests for misclassification losses and their logit gradients."""

import math

import numpy as np
import pytest

from advbench.attacks.losses import eval_loss, logit_margin, runner_up
from advbench.errors import ConfigError, DimensionError
from advbench.models import LossKind


class TestLossValues:
    """Tests for loss values on known logits."""

    def test_dl(self):
        """Test the difference of logits against the runner-up."""
        loss, _ = eval_loss(LossKind.DL, np.array([2.0, 0.5, -1.0]), 0)
        assert loss == pytest.approx(1.5)

    def test_dlr(self):
        """Test the difference-of-logits ratio."""
        loss, _ = eval_loss(LossKind.DLR, np.array([3.0, 2.0, 1.0]), 0)
        assert loss == pytest.approx(0.5)

    def test_nce_confident(self):
        """Test log-softmax is zero when the true class takes all the mass."""
        loss, _ = eval_loss(LossKind.NCE, np.array([100.0, 0.0]), 0)
        assert loss == pytest.approx(0.0, abs=1e-12)

    def test_nce_uniform(self):
        """Test log-softmax of uniform logits is log(1/C)."""
        loss, _ = eval_loss(LossKind.NCE, np.zeros(4), 2)
        assert loss == pytest.approx(math.log(0.25))

    def test_logit_and_softmax(self):
        """Test the raw logit and softmax probability losses."""
        logits = np.array([1.0, 1.0])
        assert eval_loss(LossKind.LOGIT, logits, 1)[0] == 1.0
        assert eval_loss(LossKind.SOFTMAX, logits, 1)[0] == pytest.approx(0.5)

    def test_dlr_needs_three_classes(self):
        """Test that DLR on a binary model is a config error."""
        with pytest.raises(ConfigError):
            eval_loss(LossKind.DLR, np.array([1.0, 0.0]), 0)

    def test_label_out_of_range(self):
        """Test that the label must index a logit."""
        with pytest.raises(DimensionError):
            eval_loss(LossKind.NCE, np.array([1.0, 0.0]), 2)


class TestMargin:
    """Tests for the DL confidence margin."""

    def test_clamped_below_margin(self):
        """Test DL is clamped at −κ with a zero seed once past the margin."""
        loss, seed = eval_loss(LossKind.DL, np.array([0.0, 1.0]), 0, margin=0.5)
        assert loss == -0.5
        np.testing.assert_array_equal(seed, [0.0, 0.0])

    def test_inside_margin(self):
        """Test DL keeps its gradient while within the margin."""
        loss, seed = eval_loss(LossKind.DL, np.array([0.0, 0.25]), 0, margin=0.5)
        assert loss == pytest.approx(-0.25)
        np.testing.assert_array_equal(seed, [1.0, -1.0])


class TestRunnerUp:
    """Tests for runner-up selection."""

    def test_ties_lowest_index(self):
        """Test that tied runner-ups resolve to the lowest index."""
        assert runner_up(np.array([0.0, 2.0, 2.0]), 0) == 1

    def test_skips_true_class(self):
        """Test the true class is never its own runner-up."""
        assert runner_up(np.array([5.0, 1.0, 2.0]), 0) == 2
        assert logit_margin(np.array([5.0, 1.0, 2.0]), 0) == 3.0


class TestSeeds:
    """Tests that seeds are the gradients of the losses."""

    @pytest.mark.parametrize("kind", list(LossKind))
    def test_finite_differences(self, kind):
        """Test every seed against central differences on random logits."""
        rng = np.random.default_rng(7)
        h = 1e-6
        for _ in range(50):
            logits = rng.standard_normal(4) * 3
            y = int(rng.integers(0, 4))
            _, seed = eval_loss(kind, logits, y)
            for i in range(4):
                step = np.zeros(4)
                step[i] = h
                numeric = (eval_loss(kind, logits + step, y)[0]
                           - eval_loss(kind, logits - step, y)[0]) / (2 * h)
                assert numeric == pytest.approx(seed[i], abs=1e-5)
