# ========================================================= #
from .streaming import (
    StreamingCoreset,
    adjusted_params,
    leaf_size_hint,
    compounding_bounds,
    memory_bound,
    doubling_estimate,
    iter_chunks,
    stream_dataset,
    stream_csv,
)

# ========================================================= #
