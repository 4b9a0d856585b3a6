# ========================================================= #
import logging
import math
import os
from typing import Optional, Tuple

import numpy as np
import pandas as pd

from ..base import make_rng, read_json, spawn_seeds, write_json
from ..clustering.kmeans import default_k
from ..data.dataset import WeightedDataset
from ..objective.objective import ObjectiveContext, svm_objective
from ..sensitivity.sensitivity import SensitivityTable, compute_sensitivities
from ..solver.solver import SolverConfig, approx_svm

# ========================================================= #


DEFAULT_C_CONST = 0.1
COLUMNS = ["id", "v"]


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


class Coreset:
    """
    A weighted sample ``(S, v)`` of a weighted data set. Entries are draws: a point drawn twice appears twice with
    its own weight. ``origin_U`` is the total weight of the set the sample summarizes; objectives evaluated on the
    coreset are normalized with it so they estimate the origin's objective.
    """

    def __init__(
        self,
        ids,
        v,
        X,
        y,
        origin_U: float,
        t: Optional[float] = None,
        builder: Optional[dict] = None,
        conservative: bool = False,
        capped: bool = False,
    ):
        v = np.array(v, dtype=np.float64).reshape(-1)

        if v.size == 0:
            raise ValueError("A coreset needs at least one entry")

        if not np.all(np.isfinite(v)) or np.any(v <= 0):
            raise ValueError("Every coreset weight must be finite and positive")

        if not origin_U > 0:
            raise ValueError(f"origin_U must be positive, got {origin_U}")

        self._dataset = WeightedDataset(X, y, v, ids)
        self.origin_U = float(origin_U)
        self.t = None if t is None else float(t)
        self.builder = dict(builder or {})
        self.conservative = bool(conservative)
        self.capped = bool(capped)

    # ----------------------------------------------------- #

    @property
    def dataset(self) -> WeightedDataset:
        return self._dataset

    @property
    def ids(self) -> np.ndarray:
        return self._dataset.ids

    @property
    def v(self) -> np.ndarray:
        return self._dataset.u

    @property
    def m(self) -> int:
        return self._dataset.n

    @property
    def d(self) -> int:
        return self._dataset.d

    @property
    def total_weight(self) -> float:
        return self._dataset.U

    @property
    def entries(self) -> list:
        return [(int(i), float(w)) for i, w in zip(self.ids, self.v)]

    def __len__(self):
        return self.m

    def __repr__(self):
        return f"Coreset(m={self.m}, d={self.d}, origin_U={self.origin_U:g}, t={self.t})"

    # ----------------------------------------------------- #

    def context(self, lam: float) -> ObjectiveContext:
        return ObjectiveContext(lam, self.origin_U)

    def objective(self, w, lam: float) -> float:
        """
        ``F_lambda((S, v), w)`` normalized with ``origin_U``.
        """
        return svm_objective(self._dataset, w, self.context(lam))

    def train(self, cfg: SolverConfig):
        """
        Trains on the coreset with the origin's normalization.

        :return: tuple ``(w, F((S, v), w))``
        """
        return approx_svm(self._dataset, cfg, u_norm=self.origin_U)

    def coalesce(self) -> "Coreset":
        """
        Merges repeated draws of the same id into one entry carrying the summed weight. Objective values are unchanged.
        """
        unique, first, inverse = np.unique(self.ids, return_index=True, return_inverse=True)
        summed = np.bincount(inverse, weights=self.v)
        builder = dict(self.builder, coalesced=True)
        ds = self._dataset

        return Coreset(
            unique, summed, ds.X[first], ds.y[first], self.origin_U, self.t, builder, self.conservative, self.capped
        )

    # ----------------------------------------------------- #

    def metadata(self) -> dict:
        return {
            "origin_U": self.origin_U,
            "t": self.t,
            "m": self.m,
            "d": self.d,
            "conservative": self.conservative,
            "capped": self.capped,
            "builder": self.builder,
        }

    def to_csv(self, path) -> Tuple[str, str, str]:
        """
        Writes the ``id,v`` table to ``path``, the metadata to ``<path>.json`` and the sampled points (raw features,
        label, weight) to ``<stem>.points.csv``, so the coreset can be used without its origin.

        :return: the three paths written
        """
        path = str(path)
        sidecar, points = sidecar_paths(path)
        ds = self._dataset

        pd.DataFrame({"id": self.ids, "v": self.v}).to_csv(path, index=False, float_format="%.17g")

        frame = pd.DataFrame(ds.X[:, :-1], columns=[f"x{i}" for i in range(ds.d)])
        frame.insert(0, "id", ds.ids)
        frame["y"] = ds.y
        frame["v"] = ds.u
        frame.to_csv(points, index=False, float_format="%.17g")

        write_json(sidecar, self.metadata())

        return path, sidecar, points

    @classmethod
    def from_csv(cls, path) -> "Coreset":
        """
        Reads a coreset written by :meth:`to_csv`. The points file must list the same entries in the same order.
        """
        path = str(path)
        sidecar, points = sidecar_paths(path)
        meta = read_json(sidecar)

        table = pd.read_csv(path, float_precision="round_trip")

        if list(table.columns) != COLUMNS:
            raise ValueError(f"{path}: expected columns {COLUMNS}, got {list(table.columns)}")

        frame = pd.read_csv(points, float_precision="round_trip")

        if not np.array_equal(frame["id"].to_numpy(), table["id"].to_numpy()):
            raise ValueError(f"{points} does not match the entries of {path}")

        features = frame[[c for c in frame.columns if c.startswith("x")]].to_numpy(dtype=np.float64)
        X = np.hstack([features, np.ones((features.shape[0], 1))])

        return cls(
            table["id"].to_numpy(),
            table["v"].to_numpy(dtype=np.float64),
            X,
            frame["y"].to_numpy(dtype=np.int64),
            meta["origin_U"],
            meta.get("t"),
            meta.get("builder"),
            meta.get("conservative", False),
            meta.get("capped", False),
        )


def sidecar_paths(path: str) -> Tuple[str, str]:
    stem, _ = os.path.splitext(path)
    return f"{path}.json", f"{stem}.points.csv"


# ========================================================= #


class CoresetConfig:
    """
    Settings of :func:`build_coreset`.
    """

    def __init__(
        self,
        epsilon: float = 0.1,
        delta: float = 0.1,
        lam: float = 1.0,
        k: Optional[int] = None,
        m_override: Optional[int] = None,
        c_const: float = DEFAULT_C_CONST,
        seed: Optional[int] = 0,
        xi: Optional[float] = None,
        solver: Optional[SolverConfig] = None,
        coalesce: bool = False,
        max_workers: int = 1,
    ):
        """
        :param epsilon: accuracy, in ``(0, 1/2)``
        :param delta: failure probability, in ``(0, 1)``
        :param lam: regularization parameter, in ``(0, 1]``
        :param k: clusters per label. Defaults to ``ceil(log2 n)``
        :param m_override: fixed sample size; skips :func:`sample_size`
        :param c_const: constant of the sample size formula
        :param seed: root seed
        :param xi: solver accuracy. Estimated when omitted
        :param solver: solver settings
        :param coalesce: merge repeated draws after sampling
        :param max_workers: thread pool size for the per label clustering
        """
        if not (0 < epsilon < 0.5):
            raise ValueError(f"epsilon must be in (0, 1/2), got {epsilon}")

        if not (0 < delta < 1):
            raise ValueError(f"delta must be in (0, 1), got {delta}")

        if not (0 < lam <= 1):
            raise ValueError(f"lambda must be in (0, 1], got {lam}")

        if k is not None and k < 1:
            raise ValueError(f"k must be >= 1, got {k}")

        if m_override is not None and m_override < 1:
            raise ValueError(f"m must be >= 1, got {m_override}")

        if not c_const > 0:
            raise ValueError(f"c_const must be positive, got {c_const}")

        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.lam = float(lam)
        self.k = k
        self.m_override = m_override
        self.c_const = float(c_const)
        self.seed = seed
        self.xi = xi
        self.solver = solver or SolverConfig(lam=lam)
        self.coalesce = bool(coalesce)
        self.max_workers = int(max_workers)

    def replace(self, **changes) -> "CoresetConfig":
        values = {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lam": self.lam,
            "k": self.k,
            "m_override": self.m_override,
            "c_const": self.c_const,
            "seed": self.seed,
            "xi": self.xi,
            "solver": self.solver,
            "coalesce": self.coalesce,
            "max_workers": self.max_workers,
        }
        values.update(changes)
        return CoresetConfig(**values)

    def as_dict(self) -> dict:
        return {
            "epsilon": self.epsilon,
            "delta": self.delta,
            "lam": self.lam,
            "k": self.k,
            "m_override": self.m_override,
            "c_const": self.c_const,
            "seed": self.seed,
            "xi": self.xi,
            "solver": self.solver.as_dict(),
            "coalesce": self.coalesce,
        }

    def __repr__(self):
        return f"CoresetConfig({self.as_dict()})"


# ========================================================= #


def raw_sample_size(t: float, epsilon: float, delta: float, d: int, c_const: float = DEFAULT_C_CONST) -> int:
    """
    ``ceil(c (t / eps^2) (d ln max{t, e} + ln(1 / delta)))`` without any cap.
    """
    if not t > 0:
        raise ValueError(f"Total sensitivity must be positive, got {t}")

    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")

    if not (0 < delta < 1):
        raise ValueError(f"delta must be in (0, 1), got {delta}")

    log_t = math.log(max(t, math.e))

    return max(1, math.ceil(c_const * (t / epsilon ** 2) * (d * log_t + math.log(1.0 / delta))))


def sample_size(
    t: float, epsilon: float, delta: float, d: int, c_const: float = DEFAULT_C_CONST, n: Optional[int] = None
) -> int:
    """
    Number of draws that makes the importance sample an ``epsilon`` coreset with probability ``1 - delta``, capped
    at ``n``. A cap is logged; :func:`sample_size_capped` tells whether it applied.

    :param t: total sensitivity
    :param epsilon: accuracy
    :param delta: failure probability
    :param d: dimension of the raw features
    :param c_const: the constant in front of the bound
    :param n: size of the data set, if known
    :return: ``m >= 1``
    """
    m = raw_sample_size(t, epsilon, delta, d, c_const)

    if n is not None and m > n:
        get_logger().warning(f"Sample size {m} capped at n={n}")
        return int(n)

    return m


def sample_size_capped(
    t: float, epsilon: float, delta: float, d: int, c_const: float = DEFAULT_C_CONST, n: Optional[int] = None
) -> bool:
    return n is not None and raw_sample_size(t, epsilon, delta, d, c_const) > n


def corollary_factor(epsilon: float) -> float:
    """
    ``(1 + eps) / (1 - eps)``: how much worse than the optimum a model trained on an ``epsilon`` coreset can be.
    Checked against ``1 + 4 eps``.
    """
    if not (0 < epsilon < 0.5):
        raise ValueError(f"epsilon must be in (0, 1/2), got {epsilon}")

    factor = (1.0 + epsilon) / (1.0 - epsilon)

    if factor > 1.0 + 4.0 * epsilon:
        raise RuntimeError(f"(1 + eps) / (1 - eps) = {factor} exceeds 1 + 4 eps for eps={epsilon}")

    return factor


# ========================================================= #


def importance_sample(
    ds: WeightedDataset, table: SensitivityTable, m: int, seed=None, origin_U: Optional[float] = None
) -> Coreset:
    """
    ``m`` independent draws with replacement from ``q = gamma / t``; a draw of ``p`` gets weight ``u(p) / (m q(p))``.

    :param ds: the data set the table was built on
    :param table: its sensitivity table
    :param m: number of draws
    :param seed: RNG seed
    :param origin_U: the weight the coreset stands for. Defaults to ``ds.U``
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    if table.n != ds.n:
        raise ValueError(f"Sensitivity table has {table.n} rows, data set has {ds.n} points")

    rng = make_rng(seed)
    drawn = rng.choice(ds.n, size=m, replace=True, p=table.q)
    v = ds.u[drawn] / (m * table.q[drawn])

    return Coreset(
        ds.ids[drawn], v, ds.X[drawn], ds.y[drawn], ds.U if origin_U is None else origin_U, t=table.t,
        conservative=table.conservative,
    )


def uniform_coreset(ds: WeightedDataset, m: int, seed=None, origin_U: Optional[float] = None) -> Coreset:
    """
    The baseline: ``m`` draws with replacement with probability ``u(p) / U``, each weighted ``U / m``.
    """
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")

    if ds.n == 0 or ds.U <= 0:
        raise ValueError("Cannot sample from an empty or zero weight data set")

    rng = make_rng(seed)
    drawn = rng.choice(ds.n, size=m, replace=True, p=ds.u / ds.U)
    v = np.full(m, ds.U / m)
    builder = {"method": "uniform", "m": m, "seed": seed}

    return Coreset(
        ds.ids[drawn], v, ds.X[drawn], ds.y[drawn], ds.U if origin_U is None else origin_U, builder=builder
    )


def build_coreset(ds: WeightedDataset, cfg: CoresetConfig, origin_U: Optional[float] = None) -> Coreset:
    """
    The full pipeline: approximate solver, optimum estimate, per label clustering, sensitivity table, sample size
    and importance sampling.

    :param ds: a non empty data set
    :param cfg: settings
    :param origin_U: weight the result stands for. Defaults to ``ds.U``
    :return: the coreset, with a provenance snapshot in ``builder``
    """
    if ds.n == 0:
        raise ValueError("Cannot build a coreset of an empty data set")

    sensitivity_seed, sample_seed = spawn_seeds(cfg.seed, 2)
    k = cfg.k or default_k(ds.n)

    table = compute_sensitivities(
        ds,
        lam=cfg.lam,
        k=k,
        seed=sensitivity_seed,
        solver=cfg.solver,
        xi=cfg.xi,
        max_workers=cfg.max_workers,
    )

    if cfg.m_override is not None:
        m, capped = int(cfg.m_override), False
    else:
        m = sample_size(table.t, cfg.epsilon, cfg.delta, ds.d, cfg.c_const, ds.n)
        capped = sample_size_capped(table.t, cfg.epsilon, cfg.delta, ds.d, cfg.c_const, ds.n)

    coreset = importance_sample(ds, table, m, sample_seed, origin_U)
    coreset.capped = capped
    coreset.builder = {
        "method": "coreset",
        "config": cfg.as_dict(),
        "k": k,
        "m": m,
        "xi": table.xi,
        "solver_objective": table.solver_objective,
        "opt_tilde": table.opt_tilde,
        "closed_form_bound": table.bound,
        "sensitivity": table.summary(),
    }

    if cfg.coalesce:
        coreset = coreset.coalesce()

    get_logger().info(f"{coreset} from {ds.n} points (k={k}, capped={capped})")

    return coreset


# ========================================================= #
