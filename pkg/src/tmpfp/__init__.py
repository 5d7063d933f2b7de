"""Temporal multipersistence fingerprints of time-dependent graphs.

Pipeline: temporal edge lists -> filtration grids of clique complexes ->
zigzag persistence diagrams per filtration slice -> fixed-size tensor
fingerprints, with diagram/tensor distances and a stability harness.
"""

from .bench import BenchConfig, BenchResult, generate_synthetic, run_bench
from .cli_io import (
    canonical_json,
    read_diagram_dump,
    read_tensor,
    render_diagram_dump,
    render_temporal_edge_list,
    write_temporal_edge_list,
    write_tensor,
)
from .distance import (
    StabilityPair,
    StabilityReport,
    stability_check,
    tmp_distance,
    wasserstein,
    wasserstein_bruteforce,
    zpd_matching_distance,
)
from .errors import ComputationError, ContractViolation, IngestionError, ValidationError
from .filtration import (
    Bifiltration,
    FilterKind,
    Orientation,
    SimplicialComplex,
    ThresholdGrid,
    build_bifiltration,
    clique_complex,
    node_filter_values,
    quantile_thresholds,
)
from .graph_model import (
    EdgeListSchema,
    Snapshot,
    TemporalGraph,
    induced_subgraph,
    parse_temporal_edge_list,
    restrict_to_nodes,
    top_active_nodes,
    union_graph,
    window,
)
from .pipeline import FingerprintResult, PipelineConfig, fingerprint, fingerprint_windows
from .vectorization import (
    EvaluationGrid,
    TMPTensor,
    VectorKind,
    assemble_tmp,
    betti_vector_fast,
    betti_vector_zigzag,
    entropy_vector,
    landscape_vector,
    persistence_image,
    silhouette_vector,
)
from .zigzag import (
    ZigzagComplexSequence,
    ZigzagDiagram,
    ZigzagIndex,
    ZigzagPoint,
    build_zigzag_sequence,
    generalized_rank_oracle,
    homology_dimension_oracle,
    interval_multiplicity_oracle,
    zigzag_diagrams,
    zigzag_persistence,
)

__version__ = "0.1.0"

__all__ = [
    "BenchConfig",
    "BenchResult",
    "Bifiltration",
    "ComputationError",
    "ContractViolation",
    "EdgeListSchema",
    "EvaluationGrid",
    "FilterKind",
    "FingerprintResult",
    "IngestionError",
    "Orientation",
    "PipelineConfig",
    "SimplicialComplex",
    "Snapshot",
    "StabilityPair",
    "StabilityReport",
    "TMPTensor",
    "TemporalGraph",
    "ThresholdGrid",
    "ValidationError",
    "VectorKind",
    "ZigzagComplexSequence",
    "ZigzagDiagram",
    "ZigzagIndex",
    "ZigzagPoint",
    "assemble_tmp",
    "betti_vector_fast",
    "betti_vector_zigzag",
    "build_bifiltration",
    "build_zigzag_sequence",
    "canonical_json",
    "clique_complex",
    "entropy_vector",
    "fingerprint",
    "fingerprint_windows",
    "generalized_rank_oracle",
    "generate_synthetic",
    "homology_dimension_oracle",
    "induced_subgraph",
    "interval_multiplicity_oracle",
    "landscape_vector",
    "node_filter_values",
    "parse_temporal_edge_list",
    "persistence_image",
    "quantile_thresholds",
    "read_diagram_dump",
    "read_tensor",
    "render_diagram_dump",
    "render_temporal_edge_list",
    "restrict_to_nodes",
    "run_bench",
    "silhouette_vector",
    "stability_check",
    "tmp_distance",
    "top_active_nodes",
    "union_graph",
    "wasserstein",
    "wasserstein_bruteforce",
    "window",
    "write_temporal_edge_list",
    "write_tensor",
    "zigzag_diagrams",
    "zigzag_persistence",
    "zpd_matching_distance",
]
