"""Semi-supervised node classification on graphs with node features.

Spatial autocorrelation indexes and the spectral embeddings that optimize
them, bag-of-paths and commute-time kernel classifiers, a linear SVM with
graph-derived features, autoSVM, double kernel SVM, a spatial autoregressive
model, and a benchmark harness with nested cross-validation and rank tests.
"""

from .graph import DatasetBundle, Graph, GraphError, build_graph, from_undirected
from .io import load_dataset, save_dataset
from .spatial import (AutocorrReport, class_autocorrelation_report, contiguity_ratio,
                      geary_index, moran_index)
from .embeddings import Embedding, EmbeddingSpec, embed
from .bop import BopContext, bop_fundamental, bop_group_betweenness_classify
from .kernels import KernelError, rctk, sum_of_similarities_classify
from .svm import LinearSvmModel, predict, train_linear_svm
from .classifiers import METHODS, ModelSpec, Workspace, make_model

__version__ = "0.1.0"

__all__ = [
    "Graph", "GraphError", "DatasetBundle", "build_graph", "from_undirected",
    "load_dataset", "save_dataset",
    "moran_index", "geary_index", "contiguity_ratio", "AutocorrReport",
    "class_autocorrelation_report",
    "EmbeddingSpec", "Embedding", "embed",
    "BopContext", "bop_fundamental", "bop_group_betweenness_classify",
    "KernelError", "rctk", "sum_of_similarities_classify",
    "LinearSvmModel", "train_linear_svm", "predict",
    "METHODS", "ModelSpec", "Workspace", "make_model",
]
