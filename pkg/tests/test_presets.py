"""Tests for named attack presets."""

import json

import pytest

from advbench.attacks.presets import PRESETS, STEPS, preset, preset_names
from advbench.errors import ConfigError
from advbench.models import (
    DEFAULT_EPS_INIT,
    AttackConfig,
    AttackMode,
    DirectionKind,
    HeuristicKind,
    InitKind,
    LossKind,
    Norm,
    OptimizerKind,
)


class TestPresets:
    """Tests for the preset catalogue."""

    def test_catalogue(self):
        """Test every expected attack family is available."""
        assert set(preset_names()) == {
            "FGSM", "FGM", "BIM", "PGD-L1", "PGD-L2", "PGD-Linf", "DDN",
            "FMN-L0", "FMN-L1", "FMN-L2", "FMN-Linf", "CW-L2",
        }

    @pytest.mark.parametrize("name", list(PRESETS))
    def test_names_match(self, name):
        """Test each preset carries its own name as the label."""
        assert preset(name).label == name

    def test_unknown(self):
        """Test an unknown preset name is a config error."""
        with pytest.raises(ConfigError):
            preset("PGD-L3")

    def test_fgsm(self):
        """Test FGSM is one signed-gradient step at the initial ε."""
        attack = preset("FGSM")
        assert attack.mode == AttackMode.FIXED_BUDGET
        assert attack.p == Norm.LINF
        assert attack.direction == DirectionKind.PROJ
        assert attack.steps == 1
        assert attack.epsilon == DEFAULT_EPS_INIT[Norm.LINF]
        assert attack.step_size == attack.epsilon

    def test_pgd_random_start(self):
        """Test PGD starts inside the ε-ball while BIM starts at x."""
        assert preset("PGD-Linf").init.kind == InitKind.RANDOM
        assert preset("PGD-Linf").init.radius == pytest.approx(0.1 * preset("PGD-Linf").epsilon)
        assert preset("BIM").init.kind == InitKind.ZERO
        assert preset("PGD-L2").steps == STEPS

    def test_min_norm_families(self):
        """Test the minimum-norm presets use their heuristics."""
        assert preset("DDN").heuristic.kind == HeuristicKind.DDN
        assert preset("DDN").mode == AttackMode.MIN_NORM
        fmn = preset("FMN-L0")
        assert fmn.p == Norm.L0
        assert fmn.loss == LossKind.DL
        assert fmn.heuristic.kind == HeuristicKind.FMN
        cw = preset("CW-L2")
        assert cw.heuristic.kind == HeuristicKind.PENALTY
        assert cw.optimizer.kind == OptimizerKind.ADAM

    def test_config_json_fields(self):
        """Test a config document uses the slot field names."""
        document = json.loads(preset("PGD-L2").model_dump_json())
        assert {"mode", "p", "loss", "init", "direction", "optimizer", "scheduler",
                "steps", "step_size", "epsilon"} <= set(document)
        assert AttackConfig.model_validate(document) == preset("PGD-L2")

    def test_kind_strings_accepted(self):
        """Test component slots accept bare kind strings."""
        attack = AttackConfig.model_validate({
            "p": "l2", "init": "zero", "optimizer": "adam", "scheduler": "cos",
        })
        assert attack.optimizer.kind == OptimizerKind.ADAM

    def test_invalid_combinations(self):
        """Test slot combinations without a meaning are rejected."""
        with pytest.raises(ValueError):
            AttackConfig(p=Norm.L0, direction=DirectionKind.PROJ)
        with pytest.raises(ValueError):
            AttackConfig(p=Norm.L2, mode=AttackMode.FIXED_BUDGET)
