"""Domain-specific sentiment lexicon induction from corpora and seed words.

Pipeline: count windowed co-occurrences, weight them with smoothed PPMI,
embed words by truncated SVD, connect nearest neighbors into a lexical
graph, and propagate sentiment from small seed sets with a restarting
random walk. Bootstrap resampling of the seeds yields per-word confidence
estimates, and the evaluation module scores induced lexicons against gold
standards.
"""

__version__ = "0.1.0"

from .corpus import (
    SparseCountMatrix,
    Vocabulary,
    build_vocabulary,
    count_cooccurrences,
    load_counts,
    load_stopwords,
    load_vocabulary,
    read_corpus,
    save_counts,
    save_vocabulary,
)
from .embeddings import (
    EmbeddingSet,
    PpmiMatrix,
    cosine_similarity,
    load_embeddings,
    nearest_neighbors,
    ppmi,
    save_embeddings,
    svd_embed,
    truncated_svd,
)
from .errors import ConfigError, ConvergenceError, DataError, LexpropError
from .evaluation import (
    ClassDistribution,
    GoldLexicon,
    PolaritySwitchReport,
    auc_binary,
    class_mass_labels,
    kendall_tau,
    lexicon_tau_top,
    polarity_switch_report,
    ternary_f1,
)
from .graph import LexicalGraph, build_knn_graph, graph_from_edges, load_graph, save_graph
from .propagation import (
    Lexicon,
    SeedSet,
    WalkParams,
    bestpath_scores,
    bootstrap,
    clamped_propagation,
    combine_polarity,
    load_ppmi,
    load_seed_set,
    load_seed_words,
    pmi_baseline,
    random_walk,
    random_walk_scores,
    save_ppmi,
    standardize,
)

__all__ = [
    "__version__",
    "Vocabulary",
    "SparseCountMatrix",
    "PpmiMatrix",
    "EmbeddingSet",
    "LexicalGraph",
    "SeedSet",
    "WalkParams",
    "Lexicon",
    "GoldLexicon",
    "ClassDistribution",
    "PolaritySwitchReport",
    "LexpropError",
    "ConfigError",
    "DataError",
    "ConvergenceError",
    "build_vocabulary",
    "count_cooccurrences",
    "read_corpus",
    "load_stopwords",
    "save_vocabulary",
    "load_vocabulary",
    "save_counts",
    "load_counts",
    "ppmi",
    "truncated_svd",
    "svd_embed",
    "cosine_similarity",
    "nearest_neighbors",
    "save_embeddings",
    "load_embeddings",
    "build_knn_graph",
    "graph_from_edges",
    "save_graph",
    "load_graph",
    "random_walk",
    "random_walk_scores",
    "combine_polarity",
    "standardize",
    "bootstrap",
    "clamped_propagation",
    "bestpath_scores",
    "pmi_baseline",
    "load_seed_words",
    "load_seed_set",
    "save_ppmi",
    "load_ppmi",
    "auc_binary",
    "class_mass_labels",
    "ternary_f1",
    "kendall_tau",
    "lexicon_tau_top",
    "polarity_switch_report",
]
