# ========================================================= #
import logging
from typing import Iterable, Optional, Sequence, Tuple, Union

import numpy as np
from sklearn.preprocessing import StandardScaler

# ========================================================= #


LABELS = (1, -1)


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class LabeledPoint:
    """
    One embedded point ``p = (x, y)`` with its weight ``u(p)``. ``x`` carries the bias coordinate as its last entry.
    """

    __slots__ = ("id", "x", "y", "u")

    def __init__(self, id: int, x, y: int, u: float = 1.0):
        """
        :param id: index of the point in its origin set
        :param x: embedded feature vector of length ``d + 1`` whose last entry is 1
        :param y: the label, ``-1`` or ``+1``
        :param u: the non negative weight of the point
        """
        x = np.asarray(x, dtype=np.float64)

        if x.ndim != 1 or x.shape[0] < 2:
            raise ValueError(f"x must be a vector with at least 2 entries (d >= 1 plus the bias), got shape {x.shape}")

        if x[-1] != 1.0:
            raise ValueError(f"The last (bias) entry of x must be 1, got {x[-1]}")

        if y not in LABELS:
            raise ValueError(f"Label must be -1 or +1, got {y}")

        if not (u >= 0 and np.isfinite(u)):
            raise ValueError(f"Weight must be finite and non negative, got {u}")

        self.id = int(id)
        self.x = x
        self.y = int(y)
        self.u = float(u)

    @property
    def d(self) -> int:
        return self.x.shape[0] - 1

    def __repr__(self):
        return f"LabeledPoint(id={self.id}, x={self.x.tolist()}, y={self.y:+d}, u={self.u})"


class Hyperplane:
    """
    A query ``w`` in ``R^(d+1)``. The first ``d`` entries are the normal, the last one is the bias.
    """

    __slots__ = ("w",)

    def __init__(self, w):
        w = np.array(w, dtype=np.float64)

        if w.ndim != 1 or w.shape[0] < 2:
            raise ValueError(f"w must be a vector with at least 2 entries, got shape {w.shape}")

        if not np.all(np.isfinite(w)):
            raise ValueError(f"w must be finite, got non finite entries at {np.flatnonzero(~np.isfinite(w)).tolist()}")

        w.flags.writeable = False
        self.w = w

    @property
    def normal(self) -> np.ndarray:
        return self.w[:-1]

    @property
    def bias(self) -> float:
        return float(self.w[-1])

    @property
    def d(self) -> int:
        return self.w.shape[0] - 1

    def tolist(self) -> list:
        return self.w.tolist()

    def __len__(self):
        return self.w.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Hyperplane):
            return NotImplemented

        return np.array_equal(self.w, other.w)

    def __repr__(self):
        return f"Hyperplane(normal={self.normal.tolist()}, bias={self.bias})"


def as_vector(w, dim: Optional[int] = None) -> np.ndarray:
    """
    Accepts a :class:`Hyperplane` or anything array like and returns the raw float vector.

    :param w: the query
    :param dim: expected length (``d + 1``). A mismatch raises ``ValueError``
    :return: 1-D float array
    """
    vec = w.w if isinstance(w, Hyperplane) else np.asarray(w, dtype=np.float64)

    if vec.ndim != 1:
        raise ValueError(f"A query must be a 1-D vector, got shape {vec.shape}")

    if dim is not None and vec.shape[0] != dim:
        raise ValueError(f"Dimension mismatch: query has {vec.shape[0]} entries, points have {dim}")

    return vec


# ========================================================= #


def embed_bias(raw) -> np.ndarray:
    """
    Appends the constant bias coordinate. Works on a single vector of length ``d`` or on an ``n x d`` matrix.

    :param raw: finite raw features
    :return: the same values with a trailing 1 (per row for matrices)
    """
    raw = np.asarray(raw, dtype=np.float64)

    if raw.ndim not in (1, 2) or raw.shape[-1] < 1:
        raise ValueError(f"Need at least one feature to embed (d >= 1), got shape {raw.shape}")

    bad = np.argwhere(~np.isfinite(raw))

    if bad.size:
        raise ValueError(f"Non finite feature value at index {tuple(int(i) for i in bad[0])}")

    if raw.ndim == 1:
        return np.append(raw, 1.0)

    return np.hstack([raw, np.ones((raw.shape[0], 1))])


def fit_scaler(raw) -> StandardScaler:
    raw = np.asarray(raw, dtype=np.float64)

    if raw.ndim != 2 or raw.shape[0] < 2:
        raise ValueError(f"Standardization needs an n x d matrix with n >= 2, got shape {raw.shape}")

    return StandardScaler().fit(raw)


def standardize(raw) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Zero mean / unit standard deviation per feature using the population (``1/n``) convention of
    :class:`sklearn.preprocessing.StandardScaler`. Constant features are centered and keep std 0; their divisor
    (``scale_``) is 1.

    :param raw: ``n x d`` matrix with ``n >= 2``
    :return: tuple ``(standardized, mean, std)``
    """
    scaler = fit_scaler(raw)

    return scaler.transform(np.asarray(raw, dtype=np.float64)), scaler.mean_, np.sqrt(scaler.var_)


# ========================================================= #


class WeightedDataset:
    """
    An immutable weighted set of embedded, labeled points. Arrays are stored read only and can be shared freely
    between threads.

    ``X`` is ``n x (d+1)`` with a constant last column of ones, ``y`` holds ``+-1`` labels, ``u`` the weights and
    ``ids`` the index of every point in its origin set (which differs from the position for sub samples and
    stream chunks).
    """

    def __init__(self, X, y, u=None, ids=None, metadata: Optional[dict] = None):
        X = np.array(X, dtype=np.float64, ndmin=2)
        y = np.array(y, dtype=np.int64).reshape(-1)
        n = y.shape[0]

        if n == 0:
            X = X.reshape(0, X.shape[-1] if X.shape[-1] else 2)

        if X.shape[0] != n:
            raise ValueError(f"X has {X.shape[0]} rows but y has {n} labels")

        if X.shape[1] < 2:
            raise ValueError(f"Points need d >= 1 features plus the bias entry, got {X.shape[1]} columns")

        if n and not np.all(np.isfinite(X)):
            row = int(np.argwhere(~np.isfinite(X))[0][0])
            raise ValueError(f"Non finite feature value in point {row}")

        if n and not np.all(X[:, -1] == 1.0):
            row = int(np.flatnonzero(X[:, -1] != 1.0)[0])
            raise ValueError(f"Point {row} is not embedded: its last entry is {X[row, -1]}, expected 1")

        if n and not np.all(np.isin(y, LABELS)):
            row = int(np.flatnonzero(~np.isin(y, LABELS))[0])
            raise ValueError(f"Point {row} has label {y[row]}, expected -1 or +1")

        u = np.ones(n) if u is None else np.array(u, dtype=np.float64).reshape(-1)

        if u.shape[0] != n:
            raise ValueError(f"Got {u.shape[0]} weights for {n} points")

        if n and not (np.all(np.isfinite(u)) and np.all(u >= 0)):
            raise ValueError("Weights must be finite and non negative")

        ids = np.arange(n, dtype=np.int64) if ids is None else np.array(ids, dtype=np.int64).reshape(-1)

        if ids.shape[0] != n:
            raise ValueError(f"Got {ids.shape[0]} ids for {n} points")

        for arr in (X, y, u, ids):
            arr.flags.writeable = False

        self._X, self._y, self._u, self._ids = X, y, u, ids
        self._U = float(np.sum(u))
        self._label_index = {label: np.flatnonzero(y == label) for label in LABELS}
        self._signed = None
        self.metadata = dict(metadata or {})

    # ----------------------------------------------------- #

    @property
    def X(self) -> np.ndarray:
        return self._X

    @property
    def y(self) -> np.ndarray:
        return self._y

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def ids(self) -> np.ndarray:
        return self._ids

    @property
    def U(self) -> float:
        return self._U

    @property
    def n(self) -> int:
        return self._y.shape[0]

    @property
    def d(self) -> int:
        return self._X.shape[1] - 1

    @property
    def label_index(self) -> dict:
        return self._label_index

    @property
    def signed(self) -> np.ndarray:
        """
        The signed vectors ``y * x`` of all points, row aligned with ``X``.
        """
        if self._signed is None:
            signed = self._y[:, None] * self._X
            signed.flags.writeable = False
            self._signed = signed

        return self._signed

    @property
    def single_label(self) -> bool:
        return self.n > 0 and any(idx.size == 0 for idx in self._label_index.values())

    @property
    def points(self) -> list:
        return [self[i] for i in range(self.n)]

    def __len__(self):
        return self.n

    def __getitem__(self, pos: int) -> LabeledPoint:
        return LabeledPoint(self._ids[pos], self._X[pos], self._y[pos], self._u[pos])

    def __iter__(self):
        for i in range(self.n):
            yield self[i]

    def __repr__(self):
        pos, neg = (self._label_index[label].size for label in LABELS)
        return f"WeightedDataset(n={self.n}, d={self.d}, U={self._U:g}, n_pos={pos}, n_neg={neg})"

    # ----------------------------------------------------- #

    def subset(self, positions, u=None) -> "WeightedDataset":
        """
        Points at the given positions, optionally re-weighted. Origin ids are kept.
        """
        positions = np.asarray(positions, dtype=np.int64)
        weights = self._u[positions] if u is None else u

        return WeightedDataset(self._X[positions], self._y[positions], weights, self._ids[positions], self.metadata)

    def reweighted(self, u) -> "WeightedDataset":
        return WeightedDataset(self._X, self._y, u, self._ids, self.metadata)

    @classmethod
    def concat(cls, parts: Sequence["WeightedDataset"]) -> "WeightedDataset":
        """
        Union of weighted sets. Every weight is carried unchanged, so the total weight is the sum of the parts.
        """
        parts = [p for p in parts if p.n]

        if not parts:
            raise ValueError("Cannot concatenate an empty list of data sets")

        dims = {p.d for p in parts}

        if len(dims) != 1:
            raise ValueError(f"Cannot concatenate data sets of different dimensions: {sorted(dims)}")

        return cls(
            np.vstack([p.X for p in parts]),
            np.concatenate([p.y for p in parts]),
            np.concatenate([p.u for p in parts]),
            np.concatenate([p.ids for p in parts]),
            parts[0].metadata,
        )

    @classmethod
    def from_points(cls, points: Iterable[LabeledPoint], metadata: Optional[dict] = None) -> "WeightedDataset":
        points = list(points)

        if not points:
            raise ValueError("Need at least one point")

        return cls(
            np.vstack([p.x for p in points]),
            [p.y for p in points],
            [p.u for p in points],
            [p.id for p in points],
            metadata,
        )

    @classmethod
    def from_raw(
        cls, raw, labels, weights=None, standardized: bool = False, metadata: Optional[dict] = None
    ) -> "WeightedDataset":
        """
        Builds a data set from raw ``n x d`` features: optionally standardizes them, then embeds the bias.

        :param raw: the raw feature matrix
        :param labels: ``+-1`` labels
        :param weights: optional weights. Defaults to 1 for every point
        :param standardized: whether to standardize the features before embedding
        :param metadata: extra metadata to attach. Standardization constants are recorded under ``standardization``
        :return: the data set
        """
        raw = np.asarray(raw, dtype=np.float64)
        meta = dict(metadata or {})

        if standardized:
            scaler = fit_scaler(raw)
            raw = scaler.transform(raw)
            meta["standardization"] = {
                "applied": True,
                "mean": scaler.mean_.tolist(),
                "scale": scaler.scale_.tolist(),
                "std": np.sqrt(scaler.var_).tolist(),
            }
        else:
            meta.setdefault("standardization", {"applied": False})

        return cls(embed_bias(raw), labels, weights, metadata=meta)


# ========================================================= #


def split_by_label(ds: WeightedDataset) -> Tuple[np.ndarray, np.ndarray]:
    """
    Positions of the positive and of the negative points. A missing label is allowed but logged.

    :param ds: a non empty data set
    :return: tuple ``(P_plus, P_minus)`` of position arrays
    """
    if ds.n == 0:
        raise ValueError("Cannot split an empty data set")

    plus, minus = ds.label_index[1], ds.label_index[-1]

    if plus.size == 0 or minus.size == 0:
        get_logger().warning(f"Single label data set: {plus.size} positive and {minus.size} negative points")

    return plus, minus


def signed_vector(p: Union[LabeledPoint, Tuple[np.ndarray, int]]) -> np.ndarray:
    if isinstance(p, LabeledPoint):
        return p.y * p.x

    x, y = p
    return y * np.asarray(x, dtype=np.float64)


# ========================================================= #

if __name__ == "__main__":  # Tests
    print("Don't You Dare Running Lib Files Directly")
