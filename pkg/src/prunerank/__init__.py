"""PCA-based static dimension pruning for dense retrieval indexes."""
from prunerank._backend import BACKEND
from prunerank.evaluation import (
    EvalConfig,
    MetricReport,
    average_precision,
    evaluate_run,
    mrr_at_k,
    ndcg_at_k,
)
from prunerank.index import EmbeddingIndex, Ranking, ScoredHit, score_all, search, search_many, top_k
from prunerank.linalg import EigenDecomposition, gram_matrix, project, sym_eigendecomposition
from prunerank.pca import (
    PcaModel,
    PrunedTransform,
    cutoff_to_m,
    fit_pca,
    prune_model,
    reconstruction_error,
    sample_rows,
    transform_corpus,
    transform_query,
)
from prunerank.stats import WilcoxonResult, wilcoxon_signed_rank

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "EigenDecomposition",
    "EmbeddingIndex",
    "EvalConfig",
    "MetricReport",
    "PcaModel",
    "PrunedTransform",
    "Ranking",
    "ScoredHit",
    "WilcoxonResult",
    "average_precision",
    "cutoff_to_m",
    "evaluate_run",
    "fit_pca",
    "gram_matrix",
    "mrr_at_k",
    "ndcg_at_k",
    "project",
    "prune_model",
    "reconstruction_error",
    "sample_rows",
    "score_all",
    "search",
    "search_many",
    "sym_eigendecomposition",
    "top_k",
    "transform_corpus",
    "transform_query",
    "wilcoxon_signed_rank",
]
