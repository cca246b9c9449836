"""Monte Carlo experiments over random inscribed polytopes."""

from .config import (
    CltResult,
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    RunRecord,
)
from .runner import (
    RUNNERS,
    efron_stein_estimate,
    run_caps_experiment,
    run_clt_experiment,
    run_containment_experiment,
    run_grassmannian_experiment,
    run_mean_deficit_experiment,
    run_replication,
    run_variance_experiment,
)
from .checks import evaluate_checks

__all__ = [
    "CltResult",
    "RUNNERS",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentReport",
    "RunRecord",
    "efron_stein_estimate",
    "evaluate_checks",
    "run_caps_experiment",
    "run_clt_experiment",
    "run_containment_experiment",
    "run_grassmannian_experiment",
    "run_mean_deficit_experiment",
    "run_replication",
    "run_variance_experiment",
]
