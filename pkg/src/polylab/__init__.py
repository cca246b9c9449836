"""Random inscribed polytopes: convex hulls, intrinsic volumes, and a
seeded Monte Carlo laboratory for their limit theorems.

The HTTP layer lives in :mod:`polylab.service` and the command line in
:mod:`polylab.cli`; importing the package root stays free of both.
"""

__version__ = "0.1.0"

from .bodies import ConvexBody, kappa, sample_boundary, sample_sphere
from .caps import (
    CapSpec,
    boundary_cap_measure,
    cap_volume,
    contains_surface_body,
    surface_body_radius,
    tau_threshold,
)
from .errors import (
    ConfigError,
    ContractViolation,
    DegeneracyError,
    LatticeError,
    MissingPanelError,
    PolylabError,
    UnsupportedReferenceError,
)
from .experiments import (
    ExperimentConfig,
    ExperimentKind,
    ExperimentReport,
    RunRecord,
    efron_stein_estimate,
    evaluate_checks,
    run_caps_experiment,
    run_clt_experiment,
    run_containment_experiment,
    run_grassmannian_experiment,
    run_mean_deficit_experiment,
    run_replication,
    run_variance_experiment,
)
from .hull import Facet, Polytope, convex_hull, facet_adjacency, polytope_to_json
from .measures import (
    KubotaEstimate,
    ProjectionPanel,
    Subspace,
    intrinsic_volume,
    kubota_estimate,
    project,
    sample_grassmannian,
    subspace_angle,
    surface_area_half,
    volume,
)
from .stats import (
    FitResult,
    fit_power_law,
    kolmogorov_distance,
    normal_cdf,
    sample_skewness,
    standardize,
    variance_with_jackknife,
)

__all__ = [
    "CapSpec",
    "ConfigError",
    "ContractViolation",
    "ConvexBody",
    "DegeneracyError",
    "ExperimentConfig",
    "ExperimentKind",
    "ExperimentReport",
    "Facet",
    "FitResult",
    "KubotaEstimate",
    "LatticeError",
    "MissingPanelError",
    "Polytope",
    "PolylabError",
    "ProjectionPanel",
    "RunRecord",
    "Subspace",
    "UnsupportedReferenceError",
    "__version__",
    "boundary_cap_measure",
    "cap_volume",
    "contains_surface_body",
    "convex_hull",
    "efron_stein_estimate",
    "evaluate_checks",
    "facet_adjacency",
    "fit_power_law",
    "intrinsic_volume",
    "kappa",
    "kolmogorov_distance",
    "kubota_estimate",
    "normal_cdf",
    "polytope_to_json",
    "project",
    "run_caps_experiment",
    "run_clt_experiment",
    "run_containment_experiment",
    "run_grassmannian_experiment",
    "run_mean_deficit_experiment",
    "run_replication",
    "run_variance_experiment",
    "sample_boundary",
    "sample_grassmannian",
    "sample_skewness",
    "sample_sphere",
    "standardize",
    "subspace_angle",
    "surface_area_half",
    "surface_body_radius",
    "tau_threshold",
    "variance_with_jackknife",
    "volume",
]
