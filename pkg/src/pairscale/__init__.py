"""Pairwise quality comparisons to continuous scores.

Pipeline: ingest per-dataset MOS metadata, label image pairs with five
comparative levels, aggregate comparator logits into preference
probabilities over a small anchor set, and solve for latent quality scores
by MAP estimation under Thurstone's Case V model.
"""

from . import _kernels as kernels
from .anchors import AnchorSet, partition_intervals, select_anchors, select_anchors_random
from .comparators import (
    CacheComparator,
    ComparatorConfig,
    ComparisonLogits,
    OracleComparator,
    RemoteComparator,
    build_comparator,
)
from .corpus import (
    ComparativeLevel,
    InstructionPair,
    QualityDifference,
    classify_level,
    emit_corpus,
    generate_corpus,
    quality_difference,
    render_pair,
    sample_pairs,
)
from .dataset import ImageRecord, SplitAssignment, load_dataset, save_dataset, split_dataset
from .experiment import (
    ExperimentConfig,
    MetricReport,
    MetricSummary,
    run_experiment,
    synthetic_records,
)
from .metrics import level_accuracy, plcc, srcc
from .scaling import (
    CountMatrix,
    PreferenceMatrix,
    ScaleScores,
    SolverConfig,
    build_anchor_matrix,
    build_count_matrix,
    extend_matrix,
    log_norm_cdf,
    score_image,
    score_many,
    soft_preference,
    solve_map,
)

__version__ = "0.1.0"

__all__ = [
    "AnchorSet",
    "CacheComparator",
    "ComparativeLevel",
    "ComparatorConfig",
    "ComparisonLogits",
    "CountMatrix",
    "ExperimentConfig",
    "ImageRecord",
    "InstructionPair",
    "MetricReport",
    "MetricSummary",
    "OracleComparator",
    "PreferenceMatrix",
    "QualityDifference",
    "RemoteComparator",
    "ScaleScores",
    "SolverConfig",
    "SplitAssignment",
    "build_anchor_matrix",
    "build_comparator",
    "build_count_matrix",
    "classify_level",
    "emit_corpus",
    "extend_matrix",
    "generate_corpus",
    "kernels",
    "level_accuracy",
    "load_dataset",
    "log_norm_cdf",
    "partition_intervals",
    "plcc",
    "quality_difference",
    "render_pair",
    "run_experiment",
    "sample_pairs",
    "save_dataset",
    "score_image",
    "score_many",
    "select_anchors",
    "select_anchors_random",
    "soft_preference",
    "solve_map",
    "split_dataset",
    "srcc",
    "synthetic_records",
]
