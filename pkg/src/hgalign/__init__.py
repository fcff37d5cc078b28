"""Relation-aware feature alignment for multi-domain heterogeneous graphs.

Maps per-type node features into a shared latent space through fixed
random bilinear relation operators and a two-stage alternating solver,
and quantifies type collapse and relation confusion against per-type
SVD/PCA baselines.
"""

from .baselines import BaselineConfig, align_features, pca_align, svd_align
from .diagnostics import (
    DiagnosticsReport,
    RelationError,
    relation_recon_error,
    type_separation_score,
)
from .estimators import BaselineAligner, RelationSubspaceAligner
from .graph import (
    FeatureBlock,
    HeteroGraph,
    NodeType,
    Relation,
    RelationBlock,
    SchemaError,
    densify_relation,
    validate_schema,
)
from .io import load_graph, save_embeddings, save_graph
from .operators import (
    BilinearOperatorSet,
    OperatorVariant,
    build_operator,
    init_projections,
    reconstruct_relation,
)
from .solver import (
    AlignmentState,
    SolverConfig,
    feature_decompose,
    init_state,
    objective,
    run_alignment,
    structure_objective,
    structure_update,
)
from .synth import SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AlignmentState",
    "BaselineAligner",
    "BaselineConfig",
    "BilinearOperatorSet",
    "DiagnosticsReport",
    "FeatureBlock",
    "HeteroGraph",
    "NodeType",
    "OperatorVariant",
    "Relation",
    "RelationBlock",
    "RelationError",
    "RelationSubspaceAligner",
    "SchemaError",
    "SolverConfig",
    "SynthSpec",
    "align_features",
    "build_operator",
    "densify_relation",
    "feature_decompose",
    "generate",
    "init_projections",
    "init_state",
    "load_graph",
    "objective",
    "pca_align",
    "reconstruct_relation",
    "relation_recon_error",
    "run_alignment",
    "save_embeddings",
    "save_graph",
    "structure_objective",
    "structure_update",
    "svd_align",
    "type_separation_score",
    "validate_schema",
]
