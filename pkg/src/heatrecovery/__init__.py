"""Sparse recovery of point masses on weighted graphs from heat-smoothed data."""

from .bounds import (
    FeasibilityReport,
    GraphConstants,
    SupportProfile,
    check_certificate_condition,
    check_invertibility,
    diagonal_bounds,
    folz_bound,
    graph_constants,
    inverse_norm_bound,
    max_admissible_time,
    support_profile,
)
from .certificate import Certificate, CertificateVerdict, certify_uniqueness, construct, verify
from .estimator import HeatSpikeRecovery
from .graph import (
    CompatibleMetric,
    WeightedGraph,
    build_graph,
    compatible_metric,
    laplacian,
    metric_from_matrix,
    min_separation,
    min_vertex_distance,
)
from .heat import (
    HeatOperator,
    RestrictedOperator,
    SpectralData,
    decompose,
    heat_operator,
    invert_restricted,
    operator_norm,
    restrict,
    spectral_gap,
)
from .recovery import (
    ErrorBudget,
    Observation,
    RecoveryResult,
    SolverOptions,
    audit_recovery,
    brute_force,
    delta_from_inverse,
    error_budget,
    solve,
)

__version__ = "0.1.0"

__all__ = [
    "audit_recovery",
    "brute_force",
    "build_graph",
    "Certificate",
    "CertificateVerdict",
    "certify_uniqueness",
    "check_certificate_condition",
    "check_invertibility",
    "compatible_metric",
    "CompatibleMetric",
    "construct",
    "decompose",
    "delta_from_inverse",
    "diagonal_bounds",
    "error_budget",
    "ErrorBudget",
    "FeasibilityReport",
    "folz_bound",
    "graph_constants",
    "GraphConstants",
    "heat_operator",
    "HeatOperator",
    "HeatSpikeRecovery",
    "inverse_norm_bound",
    "invert_restricted",
    "laplacian",
    "max_admissible_time",
    "metric_from_matrix",
    "min_separation",
    "min_vertex_distance",
    "Observation",
    "operator_norm",
    "RecoveryResult",
    "restrict",
    "RestrictedOperator",
    "solve",
    "SolverOptions",
    "spectral_gap",
    "SpectralData",
    "support_profile",
    "SupportProfile",
    "verify",
    "WeightedGraph",
]
