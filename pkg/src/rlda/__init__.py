"""Discriminant subspace learning by Riemannian manifold optimization.

Learns a D x d projection frame that separates labeled classes by minimizing
tr(U^T (S_w - S_b) U), optionally with an elementwise L1 term, over the
Stiefel or Grassmann manifold (plain or metric-generalized), using Riemannian
conjugate-gradient or trust-region solvers.  Ships a clustering and
classification evaluation pipeline and a small CLI (`rlda`).
"""

from .cost import DiscriminantProblem, HessianMode, scatter_metric
from .datasets import (
    RawImageSet,
    bilinear_resize,
    load_csv,
    load_idx,
    preprocess,
    synth_gaussian_classes,
    write_csv,
    write_idx,
)
from .errors import (
    ConfigError,
    ContractViolation,
    ParseError,
    RetractionError,
    SolverError,
)
from .evaluation import (
    EvaluationReport,
    PipelineConfig,
    clustering_accuracy,
    euclidean_lda_basis,
    kmeans,
    knn_classify,
    nmi,
    project_features,
    run_experiment,
)
from .manifolds import (
    ManifoldKind,
    ManifoldVariant,
    StiefelPoint,
    TangentVector,
    check_point,
    check_tangent,
    generalized_grassmann,
    generalized_stiefel,
    grassmann,
    inner,
    project_tangent,
    random_point,
    retract,
    stiefel,
    transport,
)
from .optimizers import (
    CgConfig,
    OptimizationResult,
    Termination,
    TrConfig,
    solve_cg,
    solve_tr,
)
from .scatter import LabeledDataset, ScatterPair, class_means, scatter_matrices

__version__ = "0.1.0"

__all__ = [
    "CgConfig",
    "ConfigError",
    "ContractViolation",
    "DiscriminantProblem",
    "EvaluationReport",
    "HessianMode",
    "LabeledDataset",
    "ManifoldKind",
    "ManifoldVariant",
    "OptimizationResult",
    "ParseError",
    "PipelineConfig",
    "RawImageSet",
    "RetractionError",
    "ScatterPair",
    "SolverError",
    "StiefelPoint",
    "TangentVector",
    "Termination",
    "TrConfig",
    "bilinear_resize",
    "check_point",
    "check_tangent",
    "class_means",
    "clustering_accuracy",
    "euclidean_lda_basis",
    "generalized_grassmann",
    "generalized_stiefel",
    "grassmann",
    "inner",
    "kmeans",
    "knn_classify",
    "load_csv",
    "load_idx",
    "nmi",
    "preprocess",
    "project_features",
    "project_tangent",
    "random_point",
    "retract",
    "run_experiment",
    "scatter_matrices",
    "scatter_metric",
    "solve_cg",
    "solve_tr",
    "stiefel",
    "synth_gaussian_classes",
    "transport",
    "write_csv",
    "write_idx",
]
