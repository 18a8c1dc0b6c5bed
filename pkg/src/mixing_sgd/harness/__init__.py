"""Configuration, seeded experiment orchestration and the CLI surface."""

from .config import ExperimentConfig, RunBlock, parse_config_file, parse_config_text
from .runner import (
    cmd_bias_sweep,
    cmd_bounds_report,
    cmd_compare,
    cmd_mixing_check,
    reference_minibatch_rate,
)

__all__ = [
    "ExperimentConfig", "RunBlock", "parse_config_file", "parse_config_text",
    "cmd_bias_sweep", "cmd_compare", "cmd_mixing_check", "cmd_bounds_report",
    "reference_minibatch_rate",
]
