"""Faceted company segmentation engine.

Core pipeline: web-page corpus building (`corpus`), an embedded knowledge
graph with event-log ingestion (`kg`), pre-trained word-vector encoding
(`embed`), per-facet multi-label classifiers with page aggregation
(`model`), iterative pseudo-labeling (`semisup`), unified concept
embeddings from graph-relatedness views (`concept`), evaluation harnesses
(`evaluation`, `experiments`), and an HTTP service plus CLI (`service`,
`cli`).
"""

__version__ = "0.1.0"
