"""Unified concept embeddings from graph-relatedness views.

Pairwise relatedness measures over an inlink graph build one matrix per
view; masked non-negative factorization completes the missing entries;
generalized canonical correlation fuses the views into one orthonormal
embedding that drives the cosine concept graph and label clusters.
"""

from .graphdata import LinkGraph, load_link_graph
from .measures import (
    barabasi_albert,
    cond_prob,
    jaccard,
    milne_witten,
    pmi,
)
from .views import MEASURE_NAMES, RelatednessView, build_views, shift_nonnegative
from .completion import NmfResult, nmf_complete
from .fusion import ConceptEmbedding, gcca_fuse, standardize_columns
from .graph import ConceptEdge, cosine_graph
from .clusters import LabelCluster, cluster_labels
from .pipeline import ConceptConfig, build_concept_embedding, load_embedding_file, save_embedding_file

__all__ = [
    "LinkGraph",
    "load_link_graph",
    "milne_witten",
    "jaccard",
    "cond_prob",
    "pmi",
    "barabasi_albert",
    "MEASURE_NAMES",
    "RelatednessView",
    "build_views",
    "shift_nonnegative",
    "NmfResult",
    "nmf_complete",
    "ConceptEmbedding",
    "gcca_fuse",
    "standardize_columns",
    "ConceptEdge",
    "cosine_graph",
    "LabelCluster",
    "cluster_labels",
    "ConceptConfig",
    "build_concept_embedding",
    "save_embedding_file",
    "load_embedding_file",
]
