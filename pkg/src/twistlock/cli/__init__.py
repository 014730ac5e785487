"""Experiment runner and command-line entry point."""
from .config import ConfigError, ExperimentConfig, parse_config, parse_config_text
from .experiments import run_experiment
from .output import write_outputs

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_config_text", "run_experiment", "write_outputs"]
