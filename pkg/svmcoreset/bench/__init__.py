# ========================================================= #
from .bench import (
    SweepSpec,
    SweepResult,
    REPORT_COLUMNS,
    MAX_FAILURE_RATE,
    geometric_sizes,
    relative_error,
    run_sweep,
    report,
    load_report,
    sensitivity_profile,
)

# ========================================================= #
