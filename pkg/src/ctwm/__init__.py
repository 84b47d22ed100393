"""Continuous-time weighted-median opinion dynamics toolkit."""

from .net import (
    GraphGenConfig,
    GraphModel,
    InfluenceMatrix,
    gen_network,
    load_matrix,
    save_matrix,
    validate_and_normalize,
)
from .median import MedianResult, median_operator, weighted_median
from .cohesion import (
    CohesionReport,
    DecisiveGraph,
    cohesive_closure,
    decisive_links,
    enumerate_minimal_cohesive,
    has_globally_reachable_node,
    is_cohesive,
    is_maximal_cohesive,
)
from .dynamics import (
    EquilibriumClass,
    EquilibriumReport,
    PinningConfig,
    Trajectory,
    classify_equilibrium,
    ctwm_rhs,
    integrate,
    integrate_batch,
    order_statistics,
    pinned_rhs,
)
from .control import (
    PinningSolution,
    minimal_pinning_set,
    pinning_feasible,
    verify_pinning_by_simulation,
)
from .experiments import SweepConfig, SweepResult, run_sweep, trend_violations
from .empirical import (
    EstimationDataset,
    FitResult,
    fit_inertia,
    fit_report,
    load_dataset,
    predict_and_score,
    save_dataset,
    synthesize_dataset,
    wilcoxon_signed_rank,
)

__version__ = "0.1.0"

__all__ = [
    "CohesionReport",
    "DecisiveGraph",
    "EquilibriumClass",
    "EquilibriumReport",
    "EstimationDataset",
    "FitResult",
    "GraphGenConfig",
    "GraphModel",
    "InfluenceMatrix",
    "MedianResult",
    "PinningConfig",
    "PinningSolution",
    "SweepConfig",
    "SweepResult",
    "Trajectory",
    "classify_equilibrium",
    "cohesive_closure",
    "ctwm_rhs",
    "decisive_links",
    "enumerate_minimal_cohesive",
    "fit_inertia",
    "fit_report",
    "gen_network",
    "has_globally_reachable_node",
    "integrate",
    "integrate_batch",
    "is_cohesive",
    "is_maximal_cohesive",
    "load_dataset",
    "load_matrix",
    "median_operator",
    "minimal_pinning_set",
    "order_statistics",
    "pinned_rhs",
    "pinning_feasible",
    "predict_and_score",
    "run_sweep",
    "save_dataset",
    "save_matrix",
    "synthesize_dataset",
    "trend_violations",
    "validate_and_normalize",
    "verify_pinning_by_simulation",
    "weighted_median",
]
