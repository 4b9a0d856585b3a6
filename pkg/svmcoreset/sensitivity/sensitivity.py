# ========================================================= #
import logging
import math
from typing import Optional, Sequence, Union

import numpy as np
import pandas as pd

from ..base import spawn_seeds
from ..clustering.kmeans import Clustering, cluster_per_label
from ..data.dataset import LabeledPoint, WeightedDataset
from ..solver.solver import OPT_TILDE_FLOOR, SolverConfig, approx_svm, long_objective, opt_tilde, opt_tilde_clamped

# ========================================================= #


SLACK = 1e-9


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def compute_alpha(ds: Union[WeightedDataset, float], cluster_weight, lam: float):
    """
    ``alpha = (U - U_cluster) / (2 lambda U U_cluster)``, the weight outside a cluster relative to the cluster.

    :param ds: the data set (or its total weight ``U``)
    :param cluster_weight: total weight of the cluster (scalar or array)
    :param lam: regularization parameter
    """
    total = ds.U if isinstance(ds, WeightedDataset) else float(ds)
    cluster_weight = np.asarray(cluster_weight, dtype=np.float64)

    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")

    if np.any(cluster_weight <= 0):
        raise ValueError("alpha is undefined for a cluster of zero weight")

    alpha = (total - cluster_weight) / (2.0 * lam * total * cluster_weight)

    return float(alpha) if alpha.ndim == 0 else alpha


def gamma(p, alpha, p_delta_norm, opt_tilde: float, lam: float, cluster_weight):
    """
    The per point sensitivity bound

    ``u / U_cl + lambda u (9/2) max{(4/9) alpha, sqrt(4 alpha^2 + 2 ||p_delta||^2 / (9 opt)) - 2 alpha}``

    Vectorized: every argument may be an array.

    :param p: a :class:`LabeledPoint` or its weight ``u(p)``
    """
    if not np.all(np.asarray(opt_tilde) > 0):
        raise ValueError(f"opt_tilde must be positive, got {opt_tilde}")

    u = p.u if isinstance(p, LabeledPoint) else np.asarray(p, dtype=np.float64)
    alpha = np.asarray(alpha, dtype=np.float64)
    norm = np.asarray(p_delta_norm, dtype=np.float64)

    radical = np.sqrt(4.0 * alpha ** 2 + 2.0 * norm ** 2 / (9.0 * opt_tilde)) - 2.0 * alpha
    value = u / cluster_weight + lam * u * 4.5 * np.maximum((4.0 / 9.0) * alpha, radical)

    return float(value) if np.ndim(value) == 0 else value


def gamma_rearranged(u, alpha, p_delta_norm, opt_tilde: float, lam: float, cluster_weight):
    """
    The same bound written as ``u / U_cl + lambda u max{2 alpha, (9/2)(sqrt(...) - 2 alpha)}``.
    """
    alpha = np.asarray(alpha, dtype=np.float64)
    norm = np.asarray(p_delta_norm, dtype=np.float64)
    radical = np.sqrt(4.0 * alpha ** 2 + 2.0 * norm ** 2 / (9.0 * opt_tilde)) - 2.0 * alpha

    return u / cluster_weight + lam * u * np.maximum(2.0 * alpha, 4.5 * radical)


def closed_form_bound(clusterings: Sequence[Clustering], lam: float, opt_tilde: float) -> float:
    """
    ``4k + sum_i 3 lambda (Var_+^(i) + Var_-^(i)) / sqrt(2 opt)`` with ``k`` the largest number of non empty
    clusters of a label.
    """
    k = max((c.k_nonempty for c in clusterings), default=0)
    variance = sum(float(c.variance.sum()) for c in clusterings)

    return 4.0 * k + 3.0 * lam * variance / math.sqrt(2.0 * opt_tilde)


def sufficient_condition(n: int, lam: float) -> bool:
    """
    Whether ``lambda <= log2(n) / n``, the regime where the variance term of the total sensitivity stays small.
    """
    return n >= 2 and lam <= math.log2(n) / n


# ========================================================= #


class SensitivityTable:
    """
    Per point bounds ``gamma``, their total ``t`` and the sampling distribution ``q = gamma / t``.

    Arrays are aligned with the positions of the data set the table was built on; ``ids`` gives the origin ids.
    ``alpha`` maps ``(label, cluster index)`` to the alpha of that cluster.
    """

    def __init__(
        self,
        ids: np.ndarray,
        gammas: np.ndarray,
        alpha: dict,
        opt_tilde: float,
        lam: float,
        clusterings: Sequence[Clustering],
        conservative: bool = False,
    ):
        self.ids = np.asarray(ids, dtype=np.int64)
        self.gamma = np.asarray(gammas, dtype=np.float64)
        self.alpha = dict(alpha)
        self.opt_tilde = float(opt_tilde)
        self.lam = float(lam)
        self.clusterings = tuple(clusterings)
        self.conservative = bool(conservative)
        self.solver_objective = None
        self.xi = None
        # largest |gamma - gamma_rearranged| seen while building
        self.form_gap = 0.0

        self.t = float(np.sum(self.gamma))

        if not self.t > 0:
            raise ValueError("Total sensitivity is 0: every point has zero weight")

        self.q = self.gamma / self.t

        if abs(float(np.sum(self.q)) - 1.0) > SLACK:
            raise RuntimeError(f"Sampling probabilities sum to {np.sum(self.q)}, expected 1")

        self.bound = closed_form_bound(self.clusterings, self.lam, self.opt_tilde)

    @property
    def n(self) -> int:
        return self.gamma.shape[0]

    @property
    def k_nonempty(self) -> int:
        return max((c.k_nonempty for c in self.clusterings), default=0)

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"id": self.ids, "gamma": self.gamma, "q": self.q})

    def summary(self) -> dict:
        return {
            "n": self.n,
            "t": self.t,
            "t_over_n": self.t / self.n,
            "closed_form_bound": self.bound,
            "k_nonempty": self.k_nonempty,
            "opt_tilde": self.opt_tilde,
            "lambda": self.lam,
            "conservative": self.conservative,
            "gamma_form_gap": self.form_gap,
            "sufficient_condition": sufficient_condition(self.n, self.lam),
        }

    def __repr__(self):
        return f"SensitivityTable(n={self.n}, t={self.t:.6g}, bound={self.bound:.6g}, conservative={self.conservative})"


def build_table(
    ds: WeightedDataset,
    lam: float,
    clusterings: Sequence[Clustering],
    opt_value: float,
    conservative: bool = False,
) -> SensitivityTable:
    """
    Evaluates the per point bound for every point from its cluster.

    :param ds: the data set the clusterings were computed on
    :param lam: regularization parameter
    :param clusterings: the per label clusterings
    :param opt_value: the (clamped) optimum estimate
    :param conservative: whether the estimate was clamped
    """
    gammas = np.zeros(ds.n)
    alpha = {}
    form_gap = 0.0

    for clustering in clusterings:
        if clustering.is_empty:
            continue

        filled = np.flatnonzero(clustering.cluster_weight > 0)
        cluster_alpha = np.zeros(clustering.k)
        cluster_alpha[filled] = compute_alpha(ds, clustering.cluster_weight[filled], lam)

        for i in filled:
            alpha[(clustering.label, int(i))] = float(cluster_alpha[i])

        members = clustering.members
        weights = ds.u[members]
        owner = clustering.assignment
        cluster_weight = clustering.cluster_weight[owner]
        positive = weights > 0

        args = (
            weights[positive],
            cluster_alpha[owner][positive],
            clustering.delta_norms[positive],
            opt_value,
            lam,
            cluster_weight[positive],
        )
        values = np.zeros(members.size)
        values[positive] = gamma(*args)
        gammas[members] = values

        if positive.any():
            form_gap = max(form_gap, float(np.max(np.abs(values[positive] - gamma_rearranged(*args)))))

    table = SensitivityTable(ds.ids, gammas, alpha, opt_value, lam, clusterings, conservative)
    table.form_gap = form_gap

    return table


def total_sensitivity(table: SensitivityTable) -> float:
    """
    ``t = sum_p gamma(p)``, checked against the closed form bound of the same clustering.

    :raises RuntimeError: when ``t`` exceeds the bound
    """
    if table.t > table.bound * (1.0 + SLACK) + SLACK:
        raise RuntimeError(f"Total sensitivity {table.t} exceeds its closed form bound {table.bound}")

    return table.t


# ========================================================= #


def compute_sensitivities(
    ds: WeightedDataset,
    lam: float = 1.0,
    k: Optional[int] = None,
    seed=None,
    solver: Optional[SolverConfig] = None,
    xi: Optional[float] = None,
    opt_override: Optional[float] = None,
    max_workers: int = 1,
) -> SensitivityTable:
    """
    Solver, optimum estimate, per label clustering and the sensitivity table in one call.

    :param ds: the data set
    :param lam: regularization parameter
    :param k: clusters per label, defaults to ``ceil(log2 n)``
    :param seed: root seed, split into independent solver / xi / clustering streams
    :param solver: solver settings (``lam`` and ``seed`` are overridden)
    :param xi: the additive accuracy of the solver. Estimated when omitted
    :param opt_override: use this value as the optimum estimate and skip the solver
    :param max_workers: thread pool size for the per label clustering
    :return: the table, with ``solver_objective`` and ``xi`` attributes recording how ``opt_tilde`` came about
    """
    solver_seed, cluster_seed = spawn_seeds(seed, 2)
    solver = (solver or SolverConfig()).replace(lam=lam)

    if opt_override is not None:
        if not opt_override > 0:
            raise ValueError(f"The optimum estimate must be positive, got {opt_override}")
        f_value, xi, opt_value, clamped = None, None, float(opt_override), False
    else:
        _, f_value = approx_svm(ds, solver.replace(seed=solver_seed))
        long = None

        if xi is None and solver.xi_target is not None:
            xi = solver.xi_target

        if xi is None:
            long = long_objective(ds, solver)
            xi = max(0.0, f_value - long)
            get_logger().info(f"xi estimate {xi:.6g} (approx {f_value:.6g}, long {long:.6g})")

        clamped = opt_tilde_clamped(f_value, xi)

        if clamped:
            long = long_objective(ds, solver) if long is None else long

            # F(w_long) reaches 0 only on a single label set, where the floor stays
            if long > OPT_TILDE_FLOOR * f_value:
                get_logger().warning(f"opt_tilde clamped: F={f_value:g}, xi={xi:g}, using F(w_long)={long:g}")
                opt_value = long
            else:
                opt_value = opt_tilde(f_value, xi)
        else:
            opt_value = opt_tilde(f_value, xi)

    clusterings = cluster_per_label(ds, k, cluster_seed, max_workers=max_workers)
    table = build_table(ds, lam, clusterings, opt_value, conservative=clamped)
    table.solver_objective, table.xi = f_value, xi
    total_sensitivity(table)

    get_logger().info(f"{table} on {ds}")

    return table


# ========================================================= #
