"""dtifuse: multi-source drug-target interaction scoring.

Three independent scorers (an ML predictor, a literature-search evidence
scorer and a knowledge-graph hop scorer) are fused into one interaction
score by a convex weight combination; the weights themselves can be fitted
from scored examples by simplex-constrained least squares.
"""

from . import errors
from .core import (
    DrugRecord,
    EntityId,
    FusionConfig,
    ScoreBundle,
    TargetRecord,
    load_fusion_config,
    normalize_entity,
)
from .fusion import WeightVector, merge, merge_with_weights
from .kg import (
    InteractionEdge,
    KnowledgeGraph,
    Provenance,
    build_graph,
    build_graph_from_files,
    kg_dti_score,
    load_graph,
    save_graph,
    shortest_hops,
)
from .metrics import PairedSeries, correlation, mse, r2
from .pipeline import Coordinator, Query, QueryOptions, ScoreReport, run_batch, run_query
from .predictor import (
    EntityCatalog,
    MlScore,
    PredictionRequest,
    RemotePredictor,
    SurrogatePredictor,
    load_catalog,
)
from .search import (
    CorpusSearchBackend,
    SearchResultRecord,
    formulate_query,
    search_dti_score,
)
from .weightfit import FitProblem, FitResult, fit_weights

__version__ = "0.1.0"

__all__ = [
    "errors",
    "EntityId",
    "DrugRecord",
    "TargetRecord",
    "FusionConfig",
    "ScoreBundle",
    "normalize_entity",
    "load_fusion_config",
    "WeightVector",
    "merge",
    "merge_with_weights",
    "Provenance",
    "InteractionEdge",
    "KnowledgeGraph",
    "build_graph",
    "build_graph_from_files",
    "shortest_hops",
    "kg_dti_score",
    "save_graph",
    "load_graph",
    "SearchResultRecord",
    "formulate_query",
    "search_dti_score",
    "CorpusSearchBackend",
    "MlScore",
    "PredictionRequest",
    "SurrogatePredictor",
    "RemotePredictor",
    "EntityCatalog",
    "load_catalog",
    "FitProblem",
    "FitResult",
    "fit_weights",
    "PairedSeries",
    "mse",
    "r2",
    "correlation",
    "Query",
    "QueryOptions",
    "ScoreReport",
    "Coordinator",
    "run_query",
    "run_batch",
]
