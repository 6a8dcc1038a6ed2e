"""Mini-batch k-means with early stopping, plus audits of its termination behavior.

Thin Python surface over the C++ core. Point sets are 2-d float64 arrays with
one point per row; traces come back as dicts with the same layout as the
trace JSON files written by the ``mbk`` command-line tool.
"""

from ._core import (
    ContractViolation,
    IoError,
    MissingAuditData,
    assign,
    audit_concentration,
    audit_trace,
    brute_force_optimal,
    center_movement,
    center_of_mass,
    cost,
    delta_set,
    generate_synthetic,
    ingest_csv,
    init_kmeanspp,
    init_random,
    naive_cost,
    recommended_batch_size,
    run,
    sample_batch,
    squared_distance,
    termination_bound,
    termination_bound_sklearn,
)

__all__ = [
    "ContractViolation",
    "IoError",
    "MissingAuditData",
    "assign",
    "audit_concentration",
    "audit_trace",
    "brute_force_optimal",
    "center_movement",
    "center_of_mass",
    "cost",
    "delta_set",
    "generate_synthetic",
    "ingest_csv",
    "init_kmeanspp",
    "init_random",
    "naive_cost",
    "recommended_batch_size",
    "run",
    "sample_batch",
    "squared_distance",
    "termination_bound",
    "termination_bound_sklearn",
]
