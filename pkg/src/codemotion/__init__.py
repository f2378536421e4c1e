"""Coordination-based action descriptors (CODE) and the correlation-based
similarity measure (CSM) for skeletal action classification."""

from .descriptor import (
    ActionMatrix,
    CodeDescriptor,
    DegenerateActionError,
    MijRanking,
    compute_descriptor,
    extreme_velocities,
    joint_variances,
    joint_velocities,
    pairwise_correlation,
    rank_joints,
    rank_mij,
    stack_descriptor,
    stacked_length,
    unstack_descriptor,
)
from .evaluation import (
    EvalReport,
    NoiseRow,
    SplitPlan,
    SweepCell,
    evaluate,
    inject_agwn,
    knn1_classify,
    mij_sweep,
    noise_sweep,
)
from .ingest import (
    DatasetError,
    DatasetManifest,
    FilterSpec,
    ManifestEntry,
    SyntheticConfig,
    butterworth_filter,
    generate_synthetic,
    load_dataset,
    load_manifest,
    save_dataset,
)
from .similarity import (
    FeatureSet,
    Metric,
    MetricSpec,
    baseline_distance,
    common_pairs,
    correlation_weight,
    csm,
    similarity_matrix,
)

__version__ = "0.1.0"
