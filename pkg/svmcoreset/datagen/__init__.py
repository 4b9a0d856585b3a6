# ========================================================= #
from .generators import (
    GenSpec,
    generate,
    gen_blobs,
    gen_pathological,
    gen_lower_bound,
    lower_bound_queries,
    lower_bound_sensitivity,
    adversarial_sensitivity_sum,
)

# ========================================================= #
