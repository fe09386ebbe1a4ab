"""Multi-person, multi-class EEG recognition pipeline.

Building blocks: dataset model and synthetic fixtures, per-column
normalization, Pearson similarity profiling, a single-hidden-layer
autoencoder for feature learning, regularized gradient-boosted trees,
and classification metrics; plus an experiment runner and CLI on top.
"""

from .autoencoder import Activation, AutoencoderConfig, AutoencoderModel
from .boosting import BoostConfig, BoostedModel, TreeNode
from .data import (
    Dataset,
    LabeledSample,
    SplitSpec,
    SynthSpec,
    class_histogram,
    load_csv,
    save_csv,
    split,
    synth_generate,
)
from .metrics import (
    ClassMetrics,
    ConfusionMatrix,
    RocCurve,
    accuracy,
    class_metrics,
    confusion,
    one_vs_rest_auc,
    roc_and_auc,
)
from .normalize import FeatureStats, NormalizationMethod
from .pipeline import ExperimentConfig, run_pipeline, run_similarity, run_sweep
from .similarity import (
    CorrelationMatrix,
    HypothesisCheck,
    SimilarityReport,
    SimilarityRow,
    check_hypotheses,
    inter_class_matrix,
    inter_person_matrix,
    pearson,
    similarity_stats,
)

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "AutoencoderConfig",
    "AutoencoderModel",
    "BoostConfig",
    "BoostedModel",
    "ClassMetrics",
    "ConfusionMatrix",
    "CorrelationMatrix",
    "Dataset",
    "ExperimentConfig",
    "FeatureStats",
    "HypothesisCheck",
    "LabeledSample",
    "NormalizationMethod",
    "RocCurve",
    "SimilarityReport",
    "SimilarityRow",
    "SplitSpec",
    "SynthSpec",
    "TreeNode",
    "accuracy",
    "check_hypotheses",
    "class_histogram",
    "class_metrics",
    "confusion",
    "inter_class_matrix",
    "inter_person_matrix",
    "load_csv",
    "one_vs_rest_auc",
    "pearson",
    "roc_and_auc",
    "run_pipeline",
    "run_similarity",
    "run_sweep",
    "save_csv",
    "similarity_stats",
    "split",
    "synth_generate",
    "__version__",
]
