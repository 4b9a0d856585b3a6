# ========================================================= #
from .coreset import (
    Coreset,
    CoresetConfig,
    raw_sample_size,
    sample_size,
    sample_size_capped,
    corollary_factor,
    importance_sample,
    uniform_coreset,
    build_coreset,
    sidecar_paths,
    DEFAULT_C_CONST,
)

# ========================================================= #
