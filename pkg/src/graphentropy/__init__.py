"""Entropy of set systems, finite graphs and step graphons."""

__version__ = "0.1.0"

from .core import (
    Distribution,
    DomainError,
    EntropyError,
    FiniteGraph,
    InvalidWeightsError,
    PackingPoint,
    SetSystem,
    SizeError,
    complete_graph,
    cycle_graph,
    empty_graph,
    evaluate_packing_point,
    independent_sets,
    maximal_independent_sets,
    phi,
    shannon_entropy,
)
from .covering import (
    CountableFamilySampler,
    CoverReport,
    exact_min_cover,
    greedy_cover_count,
    independent_events_system,
    random_cover_rate,
    rate_lower_bound,
    single_box_coverage,
    typical_set_check,
)
from .graphon import (
    ArcDensity,
    StepGraphon,
    arc_entropy,
    circle_graphon_entropy,
    differential_entropy,
    discretize_circle,
    independent_events_allbutone,
    interval_graphon_entropy,
    quotient_system,
    smooth_density,
)
from .lp import (
    LpResult,
    entropy_maximizing_distribution,
    frac_chromatic,
    frac_clique,
    lp_residuals,
)
from .solver import (
    EntropyCertificate,
    PreconditionFailure,
    ZeroOnSupportError,
    cycle_entropy,
    fw_gap,
    lmo,
    solve_entropy,
    verify_certificate,
)

__all__ = [
    "ArcDensity",
    "CountableFamilySampler",
    "CoverReport",
    "Distribution",
    "DomainError",
    "EntropyCertificate",
    "EntropyError",
    "FiniteGraph",
    "InvalidWeightsError",
    "LpResult",
    "PackingPoint",
    "PreconditionFailure",
    "SetSystem",
    "SizeError",
    "StepGraphon",
    "ZeroOnSupportError",
    "arc_entropy",
    "circle_graphon_entropy",
    "complete_graph",
    "cycle_entropy",
    "cycle_graph",
    "differential_entropy",
    "discretize_circle",
    "empty_graph",
    "entropy_maximizing_distribution",
    "evaluate_packing_point",
    "exact_min_cover",
    "frac_chromatic",
    "frac_clique",
    "fw_gap",
    "greedy_cover_count",
    "independent_events_allbutone",
    "independent_events_system",
    "independent_sets",
    "interval_graphon_entropy",
    "lmo",
    "lp_residuals",
    "maximal_independent_sets",
    "phi",
    "quotient_system",
    "random_cover_rate",
    "rate_lower_bound",
    "shannon_entropy",
    "single_box_coverage",
    "smooth_density",
    "solve_entropy",
    "typical_set_check",
    "verify_certificate",
]
