# ========================================================= #
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Tuple

import numpy as np

from ..base import make_rng, spawn_seeds
from ..data.dataset import LabeledPoint, WeightedDataset, split_by_label

# ========================================================= #


LLOYD_MAX_ITERS = 50
LLOYD_TOL = 1e-6


def get_logger():
    return logging.getLogger(__name__)


def default_k(n: int, base: float = 2.0) -> int:
    """
    ``ceil(log_base n)``, at least 1.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    exponent = math.log2(n) if base == 2 else math.log(n) / math.log(base)

    return max(1, math.ceil(exponent))


# ========================================================= #


def _sq_distances(vectors: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    """
    ``n x k`` squared distances. Empty (NaN) centroids are infinitely far away.
    """
    diff = vectors[:, None, :] - centroids[None, :, :]
    dist = np.einsum("ijk,ijk->ij", diff, diff)

    return np.where(np.isnan(dist), np.inf, dist)


def _draw(rng: np.random.Generator, mass: np.ndarray) -> int:
    # inverse CDF draw, ties resolve to the lowest index
    cumulative = np.cumsum(mass)
    pick = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))

    return min(pick, mass.shape[0] - 1)


def kmeans_cost(vectors: np.ndarray, weights: np.ndarray, centroids: np.ndarray, assignment: np.ndarray) -> float:
    diff = vectors - centroids[assignment]
    return float(weights @ np.einsum("ij,ij->i", diff, diff))


# ========================================================= #


class Clustering:
    """
    Result of clustering the signed vectors ``y x`` of one label.

    Rows of ``centroids`` belonging to empty clusters are NaN. ``members`` holds the positions (in the source data
    set) of the clustered points and ``assignment`` the cluster of each member.
    """

    def __init__(
        self,
        label: int,
        centroids: np.ndarray,
        members: np.ndarray,
        member_ids: np.ndarray,
        assignment: np.ndarray,
        vectors: np.ndarray,
        weights: np.ndarray,
        cost_history: Optional[list] = None,
        iterations: int = 0,
    ):
        self.label = int(label)
        self.centroids = centroids
        self.members = np.asarray(members, dtype=np.int64)
        self.member_ids = np.asarray(member_ids, dtype=np.int64)
        self.assignment = np.asarray(assignment, dtype=np.int64)
        self.cost_history = list(cost_history or [])
        self.iterations = iterations

        k = centroids.shape[0]
        self.cluster_weight = np.bincount(self.assignment, weights=weights, minlength=k).astype(np.float64)

        deltas = self._deltas(vectors)
        self.delta_norms = np.sqrt(np.einsum("ij,ij->i", deltas, deltas))
        self.variance = np.bincount(self.assignment, weights=weights * self.delta_norms, minlength=k)
        self.cost = float(weights @ self.delta_norms ** 2) if self.members.size else 0.0

        self._position_of = {int(pos): i for i, pos in enumerate(self.members)}
        self._index_of_id = {}

        for i, pid in enumerate(self.member_ids):
            self._index_of_id.setdefault(int(pid), i)

    def _deltas(self, vectors: np.ndarray) -> np.ndarray:
        if not self.members.size:
            return np.zeros((0, self.centroids.shape[1]))

        deltas = self.centroids[self.assignment] - vectors

        if np.any(deltas[:, -1] != 0.0):
            raise RuntimeError("Displacement with a non zero bias entry: a centroid lost its label coordinate")

        return deltas

    @classmethod
    def empty(cls, label: int, dim: int, k: int = 0) -> "Clustering":
        nothing = np.zeros(0, dtype=np.int64)
        return cls(label, np.full((k, dim), np.nan), nothing, nothing, nothing, np.zeros((0, dim)), np.zeros(0))

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def nonempty(self) -> np.ndarray:
        return np.isfinite(self.centroids[:, 0]) & (np.bincount(self.assignment, minlength=self.k) > 0)

    @property
    def k_nonempty(self) -> int:
        return int(np.count_nonzero(self.nonempty))

    @property
    def is_empty(self) -> bool:
        return self.members.size == 0

    def member_index(self, position: int) -> int:
        try:
            return self._position_of[int(position)]
        except KeyError:
            raise ValueError(f"Point at position {position} is not assigned in the label {self.label:+d} clustering")

    def member_index_of_id(self, point_id: int) -> int:
        try:
            return self._index_of_id[int(point_id)]
        except KeyError:
            raise ValueError(f"Point id {point_id} is not assigned in the label {self.label:+d} clustering")

    def __repr__(self):
        return (
            f"Clustering(label={self.label:+d}, k={self.k}, nonempty={self.k_nonempty}, members={self.members.size}, "
            f"cost={self.cost:.6g})"
        )


# ========================================================= #


def kmeanspp_seed(vectors, weights, k: int, seed=None, initial: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Weighted k-means++ seeding. The first seed is drawn proportionally to the weights, every further seed
    proportionally to ``u(p) D(p)^2``. Once every point coincides with a seed, the remaining clusters stay empty
    (NaN rows).

    :param vectors: ``n x D`` points
    :param weights: non negative weights, not all 0
    :param k: number of seeds
    :param seed: RNG seed or generator
    :param initial: already chosen centroids to extend (their finite rows are kept first)
    :return: ``k x D`` seeds
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)

    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    if vectors.shape[0] == 0:
        raise ValueError("k-means++ needs at least one point")

    if not weights.sum() > 0:
        raise ValueError("k-means++ needs at least one point with positive weight")

    rng = make_rng(seed)
    seeds = np.full((k, vectors.shape[1]), np.nan)
    chosen = 0

    if initial is not None:
        kept = np.asarray(initial, dtype=np.float64)
        kept = kept[np.isfinite(kept).all(axis=1)][:k]
        seeds[: kept.shape[0]] = kept
        chosen = kept.shape[0]

    if chosen == 0:
        seeds[0] = vectors[_draw(rng, weights)]
        chosen = 1

    closest = _sq_distances(vectors, seeds[:chosen]).min(axis=1)

    while chosen < k:
        mass = weights * closest

        if not mass.sum() > 0:
            break

        seeds[chosen] = vectors[_draw(rng, mass)]
        closest = np.minimum(closest, _sq_distances(vectors, seeds[chosen : chosen + 1])[:, 0])
        chosen += 1

    return seeds


def _update(vectors, weights, assignment, centroids, label):
    k = centroids.shape[0]
    mass = np.bincount(assignment, weights=weights, minlength=k)
    sums = np.zeros_like(centroids)
    np.add.at(sums, assignment, weights[:, None] * vectors)

    updated = centroids.copy()
    filled = mass > 0
    updated[filled] = sums[filled] / mass[filled, None]
    updated[filled, -1] = label

    # an emptied cluster moves to the point paying the most
    for j in np.flatnonzero(~filled & np.isfinite(centroids[:, 0])):
        dist = _sq_distances(vectors, updated).min(axis=1)
        pay = weights * dist
        far = int(np.argmax(pay))

        if pay[far] > 0:
            updated[j] = vectors[far]
        else:
            updated[j] = np.nan

    return updated


def lloyd(
    vectors,
    weights,
    seeds: np.ndarray,
    max_iters: int = LLOYD_MAX_ITERS,
    tol: float = LLOYD_TOL,
    label: Optional[int] = None,
    members=None,
    member_ids=None,
) -> Clustering:
    """
    Weighted Lloyd refinement. Alternates assignment (ties to the lowest cluster index) and weighted mean updates
    until no centroid moves more than ``tol`` or ``max_iters`` is hit. The weighted cost never increases.

    :param vectors: ``n x D`` signed vectors of a single label
    :param weights: their weights
    :param seeds: initial ``k x D`` centroids, NaN rows are empty clusters
    :param max_iters: iteration cap. Defaults to 50
    :param tol: movement tolerance. Defaults to 1e-6
    :param label: the label of the points. Defaults to the sign of the last coordinate
    :param members: positions of the points in their data set. Defaults to ``range(n)``
    :param member_ids: origin ids of the points. Defaults to ``members``
    :return: the :class:`Clustering`
    """
    vectors = np.asarray(vectors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    centroids = np.array(seeds, dtype=np.float64)
    n = vectors.shape[0]

    label = int(np.sign(vectors[0, -1])) if label is None else label
    members = np.arange(n) if members is None else members
    member_ids = members if member_ids is None else member_ids

    history, iterations = [], 0

    for iterations in range(1, max_iters + 1):
        assignment = np.argmin(_sq_distances(vectors, centroids), axis=1)
        history.append(kmeans_cost(vectors, weights, centroids, assignment))

        updated = _update(vectors, weights, assignment, centroids, label)
        finite = np.isfinite(updated[:, 0]) & np.isfinite(centroids[:, 0])
        moved = np.isfinite(updated[:, 0]) != np.isfinite(centroids[:, 0])
        shift = np.sqrt(((updated[finite] - centroids[finite]) ** 2).sum(axis=1)).max(initial=0.0)
        centroids = updated

        if shift < tol and not moved.any():
            break

    assignment = np.argmin(_sq_distances(vectors, centroids), axis=1)
    history.append(kmeans_cost(vectors, weights, centroids, assignment))

    return Clustering(label, centroids, members, member_ids, assignment, vectors, weights, history, iterations)


# ========================================================= #


def _cluster_side(ds: WeightedDataset, positions, label, k, seed, max_iters, tol, warm) -> Clustering:
    if positions.size == 0:
        return Clustering.empty(label, ds.d + 1, k)

    vectors = ds.signed[positions]
    weights = ds.u[positions]
    rng = make_rng(seed)

    seeds = kmeanspp_seed(vectors, weights, k, rng, initial=warm)
    return lloyd(vectors, weights, seeds, max_iters, tol, label, positions, ds.ids[positions])


def cluster_per_label(
    ds: WeightedDataset,
    k: Optional[int] = None,
    seed=None,
    max_iters: int = LLOYD_MAX_ITERS,
    tol: float = LLOYD_TOL,
    max_workers: int = 1,
    warm_start: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> Tuple[Clustering, Clustering]:
    """
    Runs weighted k-means++ followed by Lloyd independently on the positive and the negative signed vectors.

    :param ds: the data set
    :param k: clusters per label. Defaults to ``ceil(log2 n)``
    :param seed: root seed; each label gets its own child stream so the result does not depend on scheduling
    :param max_iters: Lloyd iteration cap
    :param tol: Lloyd movement tolerance
    :param max_workers: when above 1 both labels are clustered concurrently in a thread pool
    :param warm_start: optional ``(centroids_plus, centroids_minus)`` from a previous run to extend
    :return: tuple ``(clustering_plus, clustering_minus)``. A missing label yields an empty clustering
    """
    k = default_k(ds.n) if k is None else int(k)

    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    plus, minus = split_by_label(ds)
    seeds = spawn_seeds(seed, 2)
    warm = warm_start or (None, None)
    jobs = [(plus, 1, seeds[0], warm[0]), (minus, -1, seeds[1], warm[1])]

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=min(max_workers, 2)) as pool:
            futures = [
                pool.submit(_cluster_side, ds, positions, label, k, child, max_iters, tol, init)
                for positions, label, child, init in jobs
            ]
        result = tuple(future.result() for future in futures)
    else:
        result = tuple(
            _cluster_side(ds, positions, label, k, child, max_iters, tol, init) for positions, label, child, init in jobs
        )

    get_logger().debug(f"Clustered per label: {result[0]} / {result[1]}")

    return result


def p_delta(p, clustering: Clustering, ds: Optional[WeightedDataset] = None) -> np.ndarray:
    """
    ``c - y x`` for the cluster ``c`` the point is assigned to. The bias entry is exactly 0.

    :param p: a :class:`LabeledPoint` (looked up by id) or a position in ``ds``
    :param clustering: the clustering of the point's label
    :param ds: the data set, needed when ``p`` is a position
    :return: the displacement vector
    """
    if isinstance(p, LabeledPoint):
        index = clustering.member_index_of_id(p.id)
        signed = p.y * p.x
    else:
        if ds is None:
            raise ValueError("A data set is needed to look a point up by position")

        index = clustering.member_index(p)
        signed = ds.signed[int(p)]

    delta = clustering.centroids[clustering.assignment[index]] - signed

    if delta[-1] != 0.0:
        raise RuntimeError(f"Displacement bias entry is {delta[-1]}, expected exactly 0")

    return delta


# ========================================================= #
