"""Evaluation harness: accuracy experiments and end-to-end scenarios."""

from .runner import (
    EvalConfig,
    ExtensionResult,
    LocalizationResult,
    RotationResult,
    eval_extension,
    eval_localization,
    eval_rotation,
)
from .scenario import ScenarioReport, run_scenario

__all__ = [
    "EvalConfig",
    "LocalizationResult",
    "RotationResult",
    "ExtensionResult",
    "eval_localization",
    "eval_rotation",
    "eval_extension",
    "ScenarioReport",
    "run_scenario",
]
