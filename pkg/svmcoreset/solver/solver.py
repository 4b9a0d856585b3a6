# ========================================================= #
import logging
import math
from typing import Optional, Tuple

import numpy as np

from ..base import make_rng
from ..data.dataset import Hyperplane, WeightedDataset
from ..objective.objective import ObjectiveContext, objective_many

# ========================================================= #


# auto batch size keeps an SGD epoch at this many steps whatever n is
STEPS_PER_EPOCH = 100

# iteration budget of the ground truth solver
REFERENCE_EPOCHS = 2000

# relative floor of the optimum estimate, guards the division in the sensitivity bound
OPT_TILDE_FLOOR = 1e-12

XI_LONG_FACTOR = 10


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class SolverConfig:
    """
    Settings shared by :func:`approx_svm` and :func:`reference_solve`.

    For the SGD phase ``epochs`` counts passes over the data; for the reference solver it counts full batch
    iterations.
    """

    def __init__(
        self,
        epochs: int = 100,
        lam: float = 1.0,
        seed: Optional[int] = 0,
        projection_radius: Optional[float] = None,
        xi_target: Optional[float] = None,
        batch_size: Optional[int] = None,
        refine_epochs: Optional[int] = None,
    ):
        """
        :param epochs: number of passes (SGD) or iterations (reference). At least 1
        :param lam: the regularization parameter, in ``(0, 1]``
        :param seed: RNG seed. The SGD solver is deterministic given the seed
        :param projection_radius: radius of the ball the normal ``w_{1:d}`` is projected on. Defaults to
                                  ``sqrt(2 lambda U_norm)``, which always contains the optimum
        :param xi_target: the additive accuracy the caller wants to trust. ``None`` means estimate it
        :param batch_size: SGD mini batch size. Defaults to ``ceil(n / 100)`` so an epoch is 100 steps
        :param refine_epochs: full batch iterations :func:`approx_svm` runs from the SGD result. Defaults to
                              ``epochs``; 0 turns the refinement off
        """
        if epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {epochs}")

        if not (0 < lam <= 1):
            raise ValueError(f"lambda must be in (0, 1], got {lam}")

        if projection_radius is not None and projection_radius <= 0:
            raise ValueError(f"projection_radius must be positive, got {projection_radius}")

        if xi_target is not None and xi_target < 0:
            raise ValueError(f"xi_target must be >= 0, got {xi_target}")

        if batch_size is not None and batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {batch_size}")

        if refine_epochs is not None and refine_epochs < 0:
            raise ValueError(f"refine_epochs must be >= 0, got {refine_epochs}")

        self.epochs = int(epochs)
        self.lam = float(lam)
        self.seed = seed
        self.projection_radius = projection_radius
        self.xi_target = xi_target
        self.batch_size = batch_size
        self.refine_epochs = refine_epochs

    @property
    def refine_iterations(self) -> int:
        return self.epochs if self.refine_epochs is None else int(self.refine_epochs)

    def replace(self, **changes) -> "SolverConfig":
        values = self.as_dict()
        values.update(changes)
        return SolverConfig(**values)

    def as_dict(self) -> dict:
        return {
            "epochs": self.epochs,
            "lam": self.lam,
            "seed": self.seed,
            "projection_radius": self.projection_radius,
            "xi_target": self.xi_target,
            "batch_size": self.batch_size,
            "refine_epochs": self.refine_epochs,
        }

    def __repr__(self):
        return f"SolverConfig({self.as_dict()})"


# ========================================================= #


def _bounds(ds: WeightedDataset, cfg: SolverConfig, u_norm: float) -> Tuple[float, float]:
    """
    Radius for the normal and a bound on the bias. Both contain the minimizer: F(w*) <= F(0) = lambda U_S bounds the
    normal, and any larger bias only moves every point of one label further past the margin.
    """
    radius = cfg.projection_radius or math.sqrt(2.0 * cfg.lam * u_norm)
    reach = float(np.sqrt(np.max(np.einsum("ij,ij->i", ds.X[:, :-1], ds.X[:, :-1]))))

    return radius, radius * reach + 1.0


def _project(w: np.ndarray, radius: float, bias_bound: float) -> None:
    norm = float(np.sqrt(w[:-1] @ w[:-1]))

    if norm > radius:
        w[:-1] *= radius / norm

    w[-1] = min(max(w[-1], -bias_bound), bias_bound)


def _check(ds: WeightedDataset, u_norm: Optional[float], lam: float) -> ObjectiveContext:
    if ds.n == 0:
        raise ValueError("Cannot train an SVM on an empty data set")

    if ds.U <= 0:
        raise ValueError("Cannot train an SVM on a data set whose weights are all 0")

    if ds.single_label:
        get_logger().warning("Training on a single label; the solution only pushes the bias past the margin")

    return ObjectiveContext(lam, ds.U if u_norm is None else u_norm)


def _descend(
    ds: WeightedDataset,
    cfg: SolverConfig,
    ctx: ObjectiveContext,
    iterations: int,
    start: Optional[np.ndarray] = None,
) -> Tuple[np.ndarray, float]:
    """
    Full batch projected subgradient descent with steps ``1 / (mu t)``, ``mu = U_S / U_norm``.

    The raw iterates and their ``t``-weighted average are both candidates; the best value seen (``start`` included)
    is returned, so more iterations never give a worse result.
    """
    dim = ds.d + 1
    mu = ds.U / ctx.u_norm
    radius, bias_bound = _bounds(ds, cfg, ctx.u_norm)
    signed, u = ds.signed, ds.u

    w = np.zeros(dim) if start is None else np.array(start, dtype=np.float64)
    avg, weight_sum = np.zeros(dim), 0.0
    best_w, best_f = w.copy(), math.inf

    for t in range(1, iterations + 1):
        margin = signed @ w
        active = margin < 1.0
        value = mu * 0.5 * float(w[:-1] @ w[:-1]) + cfg.lam * float(u @ np.maximum(0.0, 1.0 - margin))

        if value < best_f:
            best_w, best_f = w.copy(), value

        grad = -cfg.lam * (u[active] @ signed[active])
        grad[:-1] += mu * w[:-1]

        w = w - grad / (mu * t)
        _project(w, radius, bias_bound)

        weight_sum += t
        avg += (t / weight_sum) * (w - avg)

    candidates = np.vstack([w, avg]) if iterations else w[None, :]
    values = objective_many(ds, candidates, ctx)
    pick = int(np.argmin(values))

    if values[pick] < best_f:
        best_w, best_f = candidates[pick].copy(), float(values[pick])

    return best_w, best_f


# ========================================================= #


def approx_svm(ds: WeightedDataset, cfg: SolverConfig, u_norm: Optional[float] = None) -> Tuple[Hyperplane, float]:
    """
    Projected mini batch stochastic subgradient descent on the weighted SVM objective, polished by a short full
    batch descent.

    Points are drawn proportionally to their weight from the id ordered distribution, so the result does not depend
    on the row order of ``ds``. The objective is rescaled by ``1 / (lambda U_S)`` which turns it into a regularized
    mean hinge loss with strength ``a = 1 / (lambda U_norm)``. The normal takes steps ``1 / (a t)`` and is projected
    on the ball of radius ``sqrt(2 / a)``; the unregularized bias takes its own ``B / sqrt(t)`` steps inside
    ``[-B, B]``. Iterates of the second half are averaged. The SGD gradient noise grows with ``lambda U``, so the best
    SGD candidate seeds ``cfg.refine_iterations`` full batch iterations (see :func:`reference_solve`).

    :param ds: the (possibly weighted) training set
    :param cfg: solver settings
    :param u_norm: normalization constant of the objective. Defaults to ``ds.U``; pass the origin's total weight to
                   train on a coreset
    :return: tuple ``(w, F(ds, w))`` for the best candidate seen
    """
    ctx = _check(ds, u_norm, cfg.lam)
    rng = make_rng(cfg.seed)

    n, dim = ds.n, ds.d + 1
    a = 1.0 / (cfg.lam * ctx.u_norm)
    radius, bias_bound = _bounds(ds, cfg, ctx.u_norm)

    batch = cfg.batch_size or max(1, math.ceil(n / STEPS_PER_EPOCH))
    steps = max(1, math.ceil(n / batch))
    horizon = cfg.epochs * steps

    order = np.argsort(ds.ids, kind="stable")
    probs = ds.u[order] / ds.U
    signed = ds.signed

    w = np.zeros(dim)
    avg, averaged = np.zeros(dim), 0
    best_w, best_f = w.copy(), float(objective_many(ds, w, ctx)[0])
    t = 0

    for _ in range(cfg.epochs):
        draws = order[rng.choice(n, size=(steps, batch), p=probs)]

        for idx in draws:
            t += 1
            rows = signed[idx]
            active = rows @ w < 1.0

            # normal shrinks by (1 - eta a) = (1 - 1/t)
            w[:-1] *= 1.0 - 1.0 / t
            if active.any():
                push = rows[active].sum(axis=0) / batch
                w[:-1] += push[:-1] / (a * t)
                w[-1] += push[-1] * bias_bound / math.sqrt(t)

            _project(w, radius, bias_bound)

            if 2 * t > horizon:
                averaged += 1
                avg += (w - avg) / averaged

        candidates = np.vstack([w, avg]) if averaged else w[None, :]
        values = objective_many(ds, candidates, ctx)
        pick = int(np.argmin(values))

        if values[pick] < best_f:
            best_w, best_f = candidates[pick].copy(), float(values[pick])

    sgd_f = best_f

    if cfg.refine_iterations:
        refined_w, refined_f = _descend(ds, cfg, ctx, cfg.refine_iterations, start=best_w)

        if refined_f < best_f:
            best_w, best_f = refined_w, refined_f

    get_logger().debug(
        f"approx_svm: {horizon} steps of batch {batch} (objective {sgd_f:.6g}), "
        f"{cfg.refine_iterations} refinement iterations, objective {best_f:.6g}"
    )

    return Hyperplane(best_w), best_f


def reference_solve(
    ds: WeightedDataset, cfg: SolverConfig, u_norm: Optional[float] = None
) -> Tuple[Hyperplane, float]:
    """
    Deterministic full batch projected subgradient descent, used as the ground truth ``w*``.

    The objective is ``mu``-strongly convex in the normal with ``mu = U_S / U_norm``; steps are ``1 / (mu t)``. Both
    the raw iterates and their ``t``-weighted average are tracked and the best value seen is returned, so the
    returned objective never increases with more iterations.

    :param ds: training set
    :param cfg: settings; ``cfg.epochs`` is the number of full batch iterations (the seed is unused)
    :param u_norm: normalization constant, defaults to ``ds.U``
    :return: tuple ``(w*, F*)``
    """
    ctx = _check(ds, u_norm, cfg.lam)
    best_w, best_f = _descend(ds, cfg, ctx, cfg.epochs)

    return Hyperplane(best_w), best_f


# ========================================================= #


def opt_tilde(f_approx: float, xi: float) -> float:
    """
    The optimum estimate ``F(w~) - xi``, floored at ``1e-12 * F(w~)``. A floor hit is logged as a warning; callers
    mark their results conservative (see :func:`opt_tilde_clamped`).
    """
    if xi < 0:
        raise ValueError(f"xi must be >= 0, got {xi}")

    if f_approx < 0:
        raise ValueError(f"The SVM objective is non negative, got {f_approx}")

    floor = OPT_TILDE_FLOOR * f_approx

    if f_approx - xi <= floor:
        get_logger().warning(f"opt_tilde clamped: F={f_approx:g}, xi={xi:g}, using {floor:g}")
        return floor

    return f_approx - xi


def opt_tilde_clamped(f_approx: float, xi: float) -> bool:
    return f_approx - xi <= OPT_TILDE_FLOOR * f_approx


def long_objective(ds: WeightedDataset, cfg: SolverConfig, u_norm: Optional[float] = None) -> float:
    """``F`` of a reference run ``XI_LONG_FACTOR`` times longer than ``cfg.epochs``, on the whole data set."""
    _, value = reference_solve(ds, cfg.replace(epochs=XI_LONG_FACTOR * cfg.epochs), u_norm=u_norm)
    return value


def estimate_xi(
    ds: WeightedDataset,
    cfg: SolverConfig,
    u_norm: Optional[float] = None,
    f_approx: Optional[float] = None,
) -> float:
    """
    Estimates how far :func:`approx_svm` lands from the optimum by comparing it to :func:`long_objective` on the
    same data.

    :param f_approx: the objective the SGD solver reached with ``cfg``. Computed when omitted
    :return: ``max(0, F(w~) - F(w_long))``
    """
    if ds.n == 0:
        raise ValueError("Cannot estimate xi on an empty data set")

    if f_approx is None:
        _, f_approx = approx_svm(ds, cfg, u_norm=u_norm)

    long = long_objective(ds, cfg, u_norm=u_norm)

    xi = max(0.0, f_approx - long)
    get_logger().info(f"xi estimate {xi:.6g} (approx {f_approx:.6g}, long {long:.6g})")

    return xi


# ========================================================= #
