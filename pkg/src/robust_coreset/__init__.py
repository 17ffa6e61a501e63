"""Coresets for robust (k, z, m)-clustering with outliers."""
from .approx import OutlierSet, TriCriteriaSolution, find_outliers, tri_criteria_approx
from .baselines import outlier_aware_uniform, sensitivity_sampling_coreset, uniform_sampling_coreset
from .core import (
    Dataset,
    InputError,
    RobustCostResult,
    brute_force_robust_cost,
    check_triangle_lemma,
    cost_vanilla,
    nearest_center,
    robust_cost,
    robust_cost_integral,
)
from .coreset import (
    CoresetBuildReport,
    CoresetSizeError,
    WeightedCoreset,
    build_coreset,
    solve_sample_size,
    two_point_coreset,
    uniform_sample_ring,
)
from .data import DataError, SynthSpec, load_csv, synth, write_csv
from .decompose import NEG_INF, Decomposition, decompose, decompose_cluster, partition_clusters, ring_index
from .evaluation import (
    max_empirical_error,
    outlier_error_sweep,
    random_center_sets,
    size_error_sweep,
    speedup_benchmark,
    suggest_outlier_count,
)
from .solvers import (
    SolveResult,
    candidate_pool,
    lloyd_with_outliers,
    local_search_robust_median,
    robust_seed,
)

__version__ = "0.1.0"
