# ========================================================= #
import itertools
import logging
import math
from typing import List, Optional

import numpy as np

from ..base import coerce_enum, make_rng
from ..data.dataset import Hyperplane, WeightedDataset, embed_bias
from ..enums import GeneratorKind
from ..objective.objective import ObjectiveContext, point_cost, svm_objective

# ========================================================= #


# the hard instance enumerates C(d, d/2) patterns
MAX_LOWER_BOUND_D = 16

# Pathological geometry: clusters 20 standard deviations apart, a close opposite-label pair in the middle
PATHOLOGICAL_STD = 0.1
PATHOLOGICAL_SEPARATION = 20.0
PATHOLOGICAL_PAIR_DISTANCE = 0.1


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class GenSpec:
    """
    Description of a synthetic instance. Kind specific parameters: ``separation`` (blobs, distance between the two
    means) and ``std`` (pathological, the cluster standard deviation).
    """

    def __init__(
        self,
        kind=GeneratorKind.BLOBS,
        n: int = 1000,
        d: int = 2,
        seed: int = 0,
        separation: float = 10.0,
        std: float = PATHOLOGICAL_STD,
    ):
        self.kind = coerce_enum(kind, GeneratorKind)

        if self.kind != GeneratorKind.LOWER_BOUND and n < 1:
            raise ValueError(f"n must be >= 1, got {n}")

        if d < 1:
            raise ValueError(f"d must be >= 1, got {d}")

        if self.kind == GeneratorKind.LOWER_BOUND and (d % 2 or d < 2):
            raise ValueError(f"The lower bound instance needs an even d >= 2, got {d}")

        self.n, self.d, self.seed = int(n), int(d), int(seed)
        self.separation, self.std = float(separation), float(std)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "separation": self.separation,
            "std": self.std,
        }

    def __repr__(self):
        return f"GenSpec({self.as_dict()})"


def generate(spec: GenSpec) -> WeightedDataset:
    """
    Builds the instance described by ``spec``.
    """
    if spec.kind == GeneratorKind.BLOBS:
        return gen_blobs(spec.n, spec.d, spec.separation, spec.seed)

    if spec.kind == GeneratorKind.PATHOLOGICAL:
        if spec.d != 2:
            get_logger().warning(f"The pathological instance is 2 dimensional, ignoring d={spec.d}")

        return gen_pathological(spec.n, spec.seed, std=spec.std)

    return gen_lower_bound(spec.d)


# ========================================================= #


def gen_blobs(n: int, d: int = 2, separation: float = 10.0, seed: Optional[int] = 0) -> WeightedDataset:
    """
    Two unit covariance Gaussian clusters with means ``+-(separation / 2) e_1``, positives first. For odd ``n`` the
    positive cluster gets the extra point.

    :param n: number of points, at least 2
    :param d: dimension
    :param separation: distance between the two means
    :param seed: RNG seed
    :return: unit weight data set with the bias embedded
    """
    if n < 2:
        raise ValueError(f"gen_blobs needs n >= 2, got {n}")

    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")

    rng = make_rng(seed)
    n_neg = n // 2
    n_pos = n - n_neg

    raw = rng.standard_normal((n, d))
    raw[:n_pos, 0] += separation / 2.0
    raw[n_pos:, 0] -= separation / 2.0

    labels = np.concatenate([np.ones(n_pos, dtype=np.int64), -np.ones(n_neg, dtype=np.int64)])
    meta = {"generator": "blobs", "n": n, "d": d, "separation": separation, "seed": seed}

    return WeightedDataset(embed_bias(raw), labels, metadata=meta)


def gen_pathological(n: int = 1000, seed: Optional[int] = 0, std: float = PATHOLOGICAL_STD) -> WeightedDataset:
    """
    Two far apart clusters of opposite labels plus two opposite-label points close to each other, halfway between
    the clusters. The close pair sits across the cluster axis, so separating it fights the natural separator.

    :param n: number of points, at least 4 (one point per cluster plus the pair)
    :param seed: RNG seed
    :param std: cluster standard deviation. The cluster means are ``PATHOLOGICAL_SEPARATION`` stds apart
    :return: 2-D unit weight data set; the last two points are the close pair
    """
    if n < 4:
        raise ValueError(f"gen_pathological needs n >= 4, got {n}")

    rng = make_rng(seed)
    n_clustered = n - 2
    n_neg = n_clustered // 2
    n_pos = n_clustered - n_neg
    half = PATHOLOGICAL_SEPARATION * std / 2.0

    raw = std * rng.standard_normal((n_clustered, 2))
    raw[:n_pos, 0] += half
    raw[n_pos:, 0] -= half

    gap = PATHOLOGICAL_PAIR_DISTANCE / 2.0
    pair = np.array([[0.0, gap], [0.0, -gap]])

    raw = np.vstack([raw, pair])
    labels = np.concatenate([np.ones(n_pos), -np.ones(n_neg), [1, -1]]).astype(np.int64)
    meta = {"generator": "pathological", "n": n, "d": 2, "std": std, "seed": seed, "close_pair": [n - 2, n - 1]}

    return WeightedDataset(embed_bias(raw), labels, metadata=meta)


def _support_patterns(d: int) -> list:
    if d % 2 or d < 2:
        raise ValueError(f"The lower bound instance needs an even d >= 2, got {d}")

    if d > MAX_LOWER_BOUND_D:
        raise ValueError(f"The lower bound instance enumerates C(d, d/2) points, d is capped at {MAX_LOWER_BOUND_D}")

    return list(itertools.combinations(range(d), d // 2))


def gen_lower_bound(d: int) -> WeightedDataset:
    """
    The hard instance: one point per size ``d/2`` support pattern, with entries ``y sqrt(2/d)`` on the support.
    Labels alternate along the enumeration so both classes are present.

    :param d: even dimension, ``2 <= d <= 16``
    :return: ``C(d, d/2)`` unit weight points
    """
    patterns = _support_patterns(d)
    value = math.sqrt(2.0 / d)

    labels = np.array([1 if i % 2 == 0 else -1 for i in range(len(patterns))], dtype=np.int64)
    raw = np.zeros((len(patterns), d))

    for i, support in enumerate(patterns):
        raw[i, list(support)] = labels[i] * value

    meta = {"generator": "lower_bound", "n": len(patterns), "d": d}

    return WeightedDataset(embed_bias(raw), labels, metadata=meta)


# ========================================================= #


def lower_bound_queries(d: int) -> List[Hyperplane]:
    """
    The adversarial query of every point of :func:`gen_lower_bound`, in the same order: zero on the point's support
    and on the bias, ``sqrt(d/2)`` elsewhere. It gives its own point a hinge loss of 1 and every other point 0.
    """
    value = 1.0 / math.sqrt(2.0 / d)
    queries = []

    for support in _support_patterns(d):
        w = np.full(d + 1, value)
        w[list(support)] = 0.0
        w[-1] = 0.0
        queries.append(Hyperplane(w))

    return queries


def lower_bound_sensitivity(d: int, lam: float, n: Optional[int] = None) -> tuple:
    """
    Per point and total sensitivity lower bounds of the hard instance.

    :return: tuple ``((d^2/(8n) + lambda) / (d^2/8 + lambda), (d^2/8 + n lambda) / (d^2/8 + lambda))``
    """
    n = math.comb(d, d // 2) if n is None else n
    base = d * d / 8.0

    return (base / n + lam) / (base + lam), (base + n * lam) / (base + lam)


def adversarial_sensitivity_sum(ds: WeightedDataset, queries, lam: float) -> float:
    """
    ``sum_p u(p) f(p, w_p) / F(P, w_p)`` where ``w_p`` is the query paired with point ``p``.
    """
    if len(queries) != ds.n:
        raise ValueError(f"Need one query per point, got {len(queries)} queries for {ds.n} points")

    ctx = ObjectiveContext.for_dataset(ds, lam)
    total = 0.0

    for p, w in zip(ds, queries):
        total += p.u * point_cost(p, w, ctx) / svm_objective(ds, w, ctx)

    return total


# ========================================================= #
