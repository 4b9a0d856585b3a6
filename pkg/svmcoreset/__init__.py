# ========================================================= #
from . import enums
from .data import (
    LabeledPoint,
    Hyperplane,
    WeightedDataset,
    embed_bias,
    standardize,
    split_by_label,
    load_csv,
    export_csv,
    iter_csv_chunks,
    running_moments,
    running_scaler,
)
from .datagen import (
    GenSpec,
    generate,
    gen_blobs,
    gen_pathological,
    gen_lower_bound,
    lower_bound_queries,
    lower_bound_sensitivity,
    adversarial_sensitivity_sum,
)
from .objective import ObjectiveContext, hinge_loss, point_cost, svm_objective, subgradient
from .solver import SolverConfig, approx_svm, reference_solve, opt_tilde, estimate_xi
from .clustering import Clustering, kmeanspp_seed, lloyd, cluster_per_label, p_delta
from .sensitivity import (
    SensitivityTable,
    compute_alpha,
    gamma,
    closed_form_bound,
    total_sensitivity,
    compute_sensitivities,
    sensitivity_oracle,
    GridSpec,
)
from .coreset import (
    Coreset,
    CoresetConfig,
    sample_size,
    importance_sample,
    uniform_coreset,
    build_coreset,
    corollary_factor,
)
from .streaming import StreamingCoreset, adjusted_params, leaf_size_hint, compounding_bounds, stream_dataset
from .bench import SweepSpec, SweepResult, geometric_sizes, relative_error, run_sweep, report, sensitivity_profile

# ========================================================= #


__version__ = "0.1.0"

# ========================================================= #
