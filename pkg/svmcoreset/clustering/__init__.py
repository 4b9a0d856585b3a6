# ========================================================= #
from .kmeans import (
    Clustering,
    default_k,
    kmeans_cost,
    kmeanspp_seed,
    lloyd,
    cluster_per_label,
    p_delta,
    LLOYD_MAX_ITERS,
    LLOYD_TOL,
)

# ========================================================= #
