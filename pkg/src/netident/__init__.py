"""Generic local identifiability of partially excited, partially measured networks."""

from ._version import __version__
from .engine import (
    IdentifiabilityReport,
    KMatrix,
    NetworkSample,
    SamplingError,
    SingularNetworkError,
    analyze,
    build_K,
    compute_transfer,
    edge_verdict_by_rank_drop,
    edge_verdicts_from_kernel,
    kernel_basis,
    numeric_rank,
    reduce_full_excitation,
    reduce_full_measurement,
    sample_network_matrix,
)
from .report import (
    ReportDocument,
    ReportError,
    ReportSample,
    build_document,
    export_dot,
    export_json,
    parse_document,
)
from .topology import (
    NetworkTopology,
    SelectionMatrices,
    SelectionSets,
    TopologyError,
    build_selection_matrices,
    graph_dict,
    parse_graph,
    validate_selections,
    validate_topology,
)

__all__ = [
    "IdentifiabilityReport",
    "KMatrix",
    "NetworkSample",
    "NetworkTopology",
    "ReportDocument",
    "ReportError",
    "ReportSample",
    "SamplingError",
    "SelectionMatrices",
    "SelectionSets",
    "SingularNetworkError",
    "TopologyError",
    "analyze",
    "build_document",
    "build_K",
    "build_selection_matrices",
    "compute_transfer",
    "edge_verdict_by_rank_drop",
    "edge_verdicts_from_kernel",
    "export_dot",
    "export_json",
    "graph_dict",
    "kernel_basis",
    "numeric_rank",
    "parse_document",
    "parse_graph",
    "reduce_full_excitation",
    "reduce_full_measurement",
    "sample_network_matrix",
    "validate_selections",
    "validate_topology",
    "__version__",
]
