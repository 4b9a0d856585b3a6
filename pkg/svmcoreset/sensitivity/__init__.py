# ========================================================= #
from .sensitivity import (
    SensitivityTable,
    compute_alpha,
    gamma,
    gamma_rearranged,
    closed_form_bound,
    sufficient_condition,
    build_table,
    total_sensitivity,
    compute_sensitivities,
)
from .oracle import GridSpec, OracleResult, sensitivity_oracle

# ========================================================= #
