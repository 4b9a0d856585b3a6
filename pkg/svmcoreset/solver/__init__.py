# ========================================================= #
from .solver import (
    SolverConfig,
    approx_svm,
    reference_solve,
    opt_tilde,
    opt_tilde_clamped,
    estimate_xi,
    long_objective,
    OPT_TILDE_FLOOR,
    REFERENCE_EPOCHS,
)

# ========================================================= #
