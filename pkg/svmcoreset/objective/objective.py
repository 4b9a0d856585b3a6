# ========================================================= #
import logging
import math

import numpy as np

from ..data.dataset import LabeledPoint, WeightedDataset, as_vector

# ========================================================= #


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class ObjectiveContext:
    """
    Holds the regularization parameter and the normalization constant of the per point cost
    ``f(p, w) = ||w_{1:d}||^2 / (2 U_norm) + lambda * h(p, w)``.

    ``u_norm`` is the total weight of the ORIGIN set. Subsets and coresets keep the origin's value so that their
    objective is an unbiased estimate of the full one.
    """

    def __init__(self, lam: float, u_norm: float):
        """
        :param lam: the regularization parameter, in ``(0, 1]``
        :param u_norm: total weight of the origin set, must be positive
        """
        if not (0 < lam <= 1):
            raise ValueError(f"lambda must be in (0, 1], got {lam}")

        if not (u_norm > 0 and math.isfinite(u_norm)):
            raise ValueError(f"U_norm must be a positive finite number, got {u_norm}")

        self.lam = float(lam)
        self.u_norm = float(u_norm)

    @classmethod
    def for_dataset(cls, ds: WeightedDataset, lam: float) -> "ObjectiveContext":
        return cls(lam, ds.U)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "U_norm": self.u_norm}

    def __repr__(self):
        return f"ObjectiveContext(lambda={self.lam}, U_norm={self.u_norm})"


def _dataset_of(S) -> WeightedDataset:
    # coresets expose their sampled points as a data set
    return S if isinstance(S, WeightedDataset) else S.dataset


# ========================================================= #


def hinge_loss(p: LabeledPoint, w) -> float:
    w = as_vector(w, p.x.shape[0])
    return max(0.0, 1.0 - p.y * float(p.x @ w))


def point_cost(p: LabeledPoint, w, ctx: ObjectiveContext) -> float:
    w = as_vector(w, p.x.shape[0])
    normal = w[:-1]

    return float(normal @ normal) / (2.0 * ctx.u_norm) + ctx.lam * hinge_loss(p, w)


def margins(S, w) -> np.ndarray:
    """
    ``y <x, w>`` for every point of the collection.
    """
    ds = _dataset_of(S)
    return ds.y * (ds.X @ as_vector(w, ds.d + 1))


def hinge_losses(S, w) -> np.ndarray:
    return np.maximum(0.0, 1.0 - margins(S, w))


def point_costs(S, w, ctx: ObjectiveContext) -> np.ndarray:
    """
    Vector of ``f(p, w)`` over the collection (unweighted).
    """
    ds = _dataset_of(S)
    w = as_vector(w, ds.d + 1)

    return float(w[:-1] @ w[:-1]) / (2.0 * ctx.u_norm) + ctx.lam * hinge_losses(ds, w)


def svm_objective(S, w, ctx: ObjectiveContext) -> float:
    """
    The weighted SVM cost ``F(S, w) = sum_p weight(p) f(p, w)``.

    For the origin set the regularizer part adds up to exactly ``||w_{1:d}||^2 / 2``.

    :param S: a :class:`WeightedDataset` or a coreset
    :param w: the query, a :class:`Hyperplane` or an array of length ``d + 1``
    :param ctx: objective context whose ``u_norm`` is the origin's total weight
    :return: the objective value
    """
    ds = _dataset_of(S)

    if ds.n == 0:
        get_logger().warning("Evaluating the SVM objective on an empty collection, returning 0")
        return 0.0

    w = as_vector(w, ds.d + 1)
    sq = float(w[:-1] @ w[:-1])

    return (ds.U / ctx.u_norm) * 0.5 * sq + ctx.lam * float(ds.u @ hinge_losses(ds, w))


def subgradient(S, w, ctx: ObjectiveContext) -> np.ndarray:
    """
    A subgradient of :func:`svm_objective`. The bias entry is not regularized, and a point with margin exactly 1
    contributes nothing.

    :return: vector of length ``d + 1``
    """
    ds = _dataset_of(S)
    w = as_vector(w, ds.d + 1)

    if ds.n == 0:
        get_logger().warning("Subgradient of an empty collection, returning 0")
        return np.zeros_like(w)

    active = margins(ds, w) < 1.0
    grad = np.zeros_like(w)
    grad[:-1] = (ds.U / ctx.u_norm) * w[:-1]

    return grad - ctx.lam * ((ds.u[active] * ds.y[active]) @ ds.X[active])


def objective_many(S, W, ctx: ObjectiveContext) -> np.ndarray:
    """
    Evaluates the objective at many queries at once.

    :param S: the weighted collection
    :param W: ``Q x (d+1)`` matrix, one query per row
    :return: ``Q`` objective values
    """
    ds = _dataset_of(S)
    W = np.atleast_2d(np.asarray(W, dtype=np.float64))

    if W.shape[1] != ds.d + 1:
        raise ValueError(f"Dimension mismatch: queries have {W.shape[1]} entries, points have {ds.d + 1}")

    hinge = np.maximum(0.0, 1.0 - ds.signed @ W.T)
    reg = (ds.U / ctx.u_norm) * 0.5 * np.einsum("ij,ij->i", W[:, :-1], W[:, :-1])

    return reg + ctx.lam * (ds.u @ hinge)


# ========================================================= #
