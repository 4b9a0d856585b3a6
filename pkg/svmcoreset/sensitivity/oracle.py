# ========================================================= #
import logging
import math
from typing import Optional, Sequence

import numpy as np

from ..base import make_rng
from ..data.dataset import WeightedDataset, as_vector
from ..objective.objective import ObjectiveContext, objective_many
from ..solver.solver import REFERENCE_EPOCHS, SolverConfig, reference_solve

# ========================================================= #


ORACLE_MAX_N = 64
ORACLE_GRID_MAX_D = 2


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class GridSpec:
    """
    Query grid of the brute force oracle: ``radii`` geometric radii up to ``radius_scale`` times the ball that holds
    the optimum, ``directions`` grid directions (circle for ``d = 1``, Fibonacci sphere for ``d = 2``) and
    ``random_directions`` extra random queries.
    """

    def __init__(self, radii: int = 24, directions: int = 360, random_directions: int = 10_000, radius_scale=3.0):
        if radii < 1 or directions < 1 or random_directions < 0:
            raise ValueError("The oracle grid needs at least one radius and one direction")

        self.radii = int(radii)
        self.directions = int(directions)
        self.random_directions = int(random_directions)
        self.radius_scale = float(radius_scale)


def _grid_directions(dim: int, count: int) -> np.ndarray:
    if dim == 2:
        angles = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])

    # Fibonacci sphere
    i = np.arange(count) + 0.5
    z = 1.0 - 2.0 * i / count
    phi = math.pi * (1.0 + math.sqrt(5.0)) * i
    r = np.sqrt(1.0 - z ** 2)

    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


class OracleResult:
    """
    ``s_hat[i]`` is the largest observed ratio ``u(p) f(p, w) / F(P, w)`` of the point at position ``i``.
    ``on_boundary[i]`` flags points whose best query sits on the outer grid radius (the grid may be too small).
    """

    def __init__(self, ids, s_hat, on_boundary, queries: int):
        self.ids = ids
        self.s_hat = s_hat
        self.on_boundary = on_boundary
        self.queries = queries

    def as_dict(self) -> dict:
        return {int(i): float(s) for i, s in zip(self.ids, self.s_hat)}

    def __repr__(self):
        return f"OracleResult(n={self.s_hat.size}, sum={self.s_hat.sum():.6g}, queries={self.queries})"


def sensitivity_oracle(
    ds: WeightedDataset,
    lam: float,
    grid_spec: Optional[GridSpec] = None,
    extra_queries: Sequence = (),
    seed=0,
) -> OracleResult:
    """
    Lower bounds every point's sensitivity ``sup_w u(p) f(p, w) / F(P, w)`` by brute force evaluation over a
    radial x angular grid, random queries, the reference optimum and any ``extra_queries``. It can only certify a
    lower bound.

    Above ``d = 2`` the dense grid is skipped and only random and extra queries are used.

    :param ds: at most 64 points
    :param lam: regularization parameter
    :param grid_spec: grid settings
    :param extra_queries: additional hyperplanes to include
    :param seed: seed of the random queries
    :return: the :class:`OracleResult`
    """
    if ds.n == 0 or ds.n > ORACLE_MAX_N:
        raise ValueError(f"The oracle handles 1 to {ORACLE_MAX_N} points, got {ds.n}")

    spec = grid_spec or GridSpec()
    ctx = ObjectiveContext.for_dataset(ds, lam)
    rng = make_rng(seed)
    dim = ds.d + 1
    r_max = spec.radius_scale * math.sqrt(2.0 * lam * ds.U)

    blocks, on_grid_edge = [np.zeros((1, dim))], [False]

    if ds.d <= ORACLE_GRID_MAX_D:
        radii = np.geomspace(r_max * 1e-3, r_max, spec.radii)
        dirs = _grid_directions(dim, spec.directions)
        grid = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, dim)
        blocks.append(grid)
        on_grid_edge.extend(np.repeat(radii == radii[-1], dirs.shape[0]).tolist())
    else:
        get_logger().info(f"Oracle above d={ORACLE_GRID_MAX_D}: random and extra queries only")

    if spec.random_directions:
        dirs = rng.standard_normal((spec.random_directions, dim))
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
        blocks.append(dirs * (r_max * rng.random(spec.random_directions))[:, None])
        on_grid_edge.extend([False] * spec.random_directions)

    optimum, _ = reference_solve(ds, SolverConfig(epochs=REFERENCE_EPOCHS, lam=lam))
    extra = [optimum.w] + [as_vector(w, dim) for w in extra_queries]
    blocks.append(np.vstack(extra))
    on_grid_edge.extend([False] * len(extra))

    W = np.vstack(blocks)
    totals = objective_many(ds, W, ctx)
    usable = totals > 0

    reg = 0.5 * np.einsum("ij,ij->i", W[:, :-1], W[:, :-1]) / ctx.u_norm
    costs = reg[None, :] + lam * np.maximum(0.0, 1.0 - ds.signed @ W.T)
    ratios = np.where(usable[None, :], ds.u[:, None] * costs / np.where(usable, totals, 1.0)[None, :], -np.inf)

    best = np.argmax(ratios, axis=1)
    s_hat = ratios[np.arange(ds.n), best]
    edge = np.asarray(on_grid_edge)[best]

    if edge.any():
        get_logger().warning(f"Oracle argmax on the grid boundary for {int(edge.sum())} points, grid may be too small")

    return OracleResult(ds.ids.copy(), s_hat, edge, W.shape[0])


# ========================================================= #
