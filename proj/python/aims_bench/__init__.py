"""Malicious-transaction benchmark, security-driven partition planner, and
intrusion detect/respond/recover simulator."""

from ._core import (
    AimsError,
    EpisodeSummary,
    Metrics,
    PartitionPlan,
    SearchResult,
    SimResult,
    StoreGraph,
    Transaction,
    Workload,
    WorkloadSpec,
    audit_admission_safety,
    build_dependency_graph,
    clean_replay,
    closure_for_episode,
    communication_cost,
    exhaustive_partition,
    generate_workload,
    plan_objective,
    randomized_search,
    read_plan_file,
    read_store_graph_file,
    read_workload_file,
    run_simulation,
    single_store_plan,
    span,
    synthetic_store_graph,
    table2_spec,
    validate_plan,
    write_plan_file,
    write_store_graph_file,
    write_workload_file,
)

__all__ = [
    "AimsError",
    "EpisodeSummary",
    "Metrics",
    "PartitionPlan",
    "SearchResult",
    "SimResult",
    "StoreGraph",
    "Transaction",
    "Workload",
    "WorkloadSpec",
    "audit_admission_safety",
    "build_dependency_graph",
    "clean_replay",
    "closure_for_episode",
    "communication_cost",
    "exhaustive_partition",
    "generate_workload",
    "plan_objective",
    "randomized_search",
    "read_plan_file",
    "read_store_graph_file",
    "read_workload_file",
    "run_simulation",
    "single_store_plan",
    "span",
    "synthetic_store_graph",
    "table2_spec",
    "validate_plan",
    "write_plan_file",
    "write_store_graph_file",
    "write_workload_file",
]
