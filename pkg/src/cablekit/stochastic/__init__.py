from .groups import (
    CayleyTruncation,
    GroupSpec,
    GrowthTable,
    RecurrenceClass,
    cayley_cable_system,
    cayley_graph,
    classify_recurrence,
    growth_function,
)
from .recurrence import (
    RecurrenceIndicator,
    UltracontractivityFit,
    VolumeGrowthReport,
    WeightConditionReport,
    recurrence_indicator,
    ultracontractivity_fit,
    volume_growth_test,
    weight_condition_check,
)
from .walks import (
    ReturnProbabilities,
    WalkKernel,
    WalkStatistics,
    monte_carlo_walk,
    return_probability_dp,
    transition_kernel,
)

__all__ = [
    "CayleyTruncation", "GroupSpec", "GrowthTable", "RecurrenceClass",
    "cayley_cable_system", "cayley_graph", "classify_recurrence", "growth_function",
    "RecurrenceIndicator", "UltracontractivityFit", "VolumeGrowthReport",
    "WeightConditionReport", "recurrence_indicator", "ultracontractivity_fit",
    "volume_growth_test", "weight_condition_check",
    "ReturnProbabilities", "WalkKernel", "WalkStatistics", "monte_carlo_walk",
    "return_probability_dp", "transition_kernel",
]
