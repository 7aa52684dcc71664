"""Two-sample hypothesis tests for populations of graphs.

Given two samples of graphs, decide whether they come from the same
distribution. Two complementary tests are provided: a kernel
two-sample test built on the unbiased MMD^2 statistic, and a
classification-based test built on cross-validated SVM balanced
accuracy; both calibrate against a label-permutation null. Graphs can
be compared through vector embeddings with a Gaussian kernel or through
structural graph kernels.
"""

from .errors import ConvergenceError, ValidationError
from .graphs import (Graph, LabeledGraphDataset, load_dataset, save_dataset,
                     split_by_label, validate)
from .embeddings import (EmbeddedDataset, KernelMatrix, dce_embed, dce_to_graph,
                         dre_embed, gaussian_gram, median_heuristic)
from .graph_kernels import (DiscreteGraph, discretize, normalize_gram,
                            sp_feature_counts, sp_kernel_matrix,
                            wl_kernel_matrix)
from .svm import SvmModel, svm_decision, svm_predict, svm_train
from .cbt import (CbtConfig, CbtReport, balanced_accuracy, cbt,
                  nested_cv_accuracy, stratified_kfold)
from .ktst import (KtstConfig, TestReport, ktst, ktst_null, mmd2u, p_value)
from .pipeline import RepresentationConfig, default_gram, gram_from_dataset
from .simulation import (SimConfig, SimulationReport, gen_star_dataset,
                         paper_scale, run_error_experiment, star_graph)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError", "ValidationError",
    "Graph", "LabeledGraphDataset", "load_dataset", "save_dataset",
    "split_by_label", "validate",
    "EmbeddedDataset", "KernelMatrix", "dce_embed", "dce_to_graph",
    "dre_embed", "gaussian_gram", "median_heuristic",
    "DiscreteGraph", "discretize", "normalize_gram", "sp_feature_counts",
    "sp_kernel_matrix", "wl_kernel_matrix",
    "SvmModel", "svm_decision", "svm_predict", "svm_train",
    "CbtConfig", "CbtReport", "balanced_accuracy", "cbt",
    "nested_cv_accuracy", "stratified_kfold",
    "KtstConfig", "TestReport", "ktst", "ktst_null", "mmd2u", "p_value",
    "RepresentationConfig", "default_gram", "gram_from_dataset",
    "SimConfig", "SimulationReport", "gen_star_dataset", "paper_scale",
    "run_error_experiment", "star_graph",
    "__version__",
]
