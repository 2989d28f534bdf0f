"""Code-graph embeddings and Gaussian-process active learning for test execution time."""

from ._core import (
    CodeGraph,
    ConfigError,
    DatasetSplit,
    Error,
    GprModel,
    ShapeError,
    default_experiment_json,
    embed,
    fit_gp,
    generate_synthetic,
    graph_from_json,
    make_splits,
    manual_embed,
    metric_names,
    parse_java,
    pearson,
    report,
    run_active,
    run_experiment,
    run_passive,
    write_synthetic,
)

__all__ = [
    "CodeGraph",
    "ConfigError",
    "DatasetSplit",
    "Error",
    "GprModel",
    "ShapeError",
    "default_experiment_json",
    "embed",
    "fit_gp",
    "generate_synthetic",
    "graph_from_json",
    "make_splits",
    "manual_embed",
    "metric_names",
    "parse_java",
    "pearson",
    "report",
    "run_active",
    "run_experiment",
    "run_passive",
    "write_synthetic",
]
