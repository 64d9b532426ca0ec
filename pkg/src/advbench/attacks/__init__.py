"""Gradient attacks built from interchangeable components."""

from .engine import AttackResult, run_attack
from .presets import PRESETS, preset, preset_names

__all__ = ["AttackResult", "PRESETS", "preset", "preset_names", "run_attack"]
