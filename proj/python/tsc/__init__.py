"""Python bindings for the traffic signal control toolkit."""

from ._tsc import (
    ConfigError,
    Dataset,
    NumericError,
    QNetwork,
    Scenario,
    collect,
    evaluate,
    grid_scenario,
    load_checkpoint,
    load_dataset,
    load_scenario,
    parse_scenario,
    train,
)

__all__ = [
    "ConfigError",
    "Dataset",
    "NumericError",
    "QNetwork",
    "Scenario",
    "collect",
    "evaluate",
    "grid_scenario",
    "load_checkpoint",
    "load_dataset",
    "load_scenario",
    "parse_scenario",
    "train",
]
