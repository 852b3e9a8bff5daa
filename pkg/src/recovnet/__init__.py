"""Threshold-diffusion modeling of post-disaster recovery on spatial
contiguity networks: threshold fitting from observed recovery durations and
search for recovery-multiplier seed sets."""

from .analysis import (
    AttributeRow,
    AttributeTable,
    CorrelationResult,
    DistributionSummary,
    MultiplierComparisonReport,
    TertileReport,
    ThresholdSummary,
    correlate,
    multiplier_attribute_comparison,
    split_tertiles,
    tertile_attribute_report,
    threshold_summary,
)
from .diffusion import (
    DiffusionSchedule,
    ThresholdVector,
    all_affected,
    diffusion_step,
    recovered_counts,
    recovered_neighbor_fraction,
    run_diffusion,
)
from .empirical import (
    VisitSeries,
    compute_recovery_duration,
    durations_to_trajectory,
    weekly_difference,
    zero_one_loss,
)
from .errors import ConfigError, DataError, RecovnetError
from .fitting import (
    BaselineStats,
    FitProblem,
    FitResult,
    build_fit_problem,
    fit_fitness,
    fit_thresholds,
    random_baseline,
)
from .ga import (
    GaConfig,
    GaResult,
    GenerationRecord,
    PerformanceRecord,
    RealVectorEncoding,
    SubsetEncoding,
    performance_index,
    run_ga,
)
from .graph import (
    ContiguityRule,
    GraphMetrics,
    SpatialGraph,
    SpatialUnit,
    build_contiguity_graph,
    graph_metrics,
    load_edge_list,
)
from .multipliers import (
    MultiplierProblem,
    MultiplierResult,
    brute_force_multipliers,
    increment_rate,
    multiplier_objective,
    natural_outcome,
    search_multipliers,
)
from .synthetic import (
    SynthSpec,
    SyntheticInstance,
    generate_instance,
    grid_units,
    write_instance,
)

__version__ = "0.1.0"
