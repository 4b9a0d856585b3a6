# ========================================================= #
from .objective import (
    ObjectiveContext,
    hinge_loss,
    hinge_losses,
    margins,
    point_cost,
    point_costs,
    svm_objective,
    subgradient,
    objective_many,
)

# ========================================================= #
