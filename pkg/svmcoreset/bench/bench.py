# ========================================================= #
import logging
import math
import time
from collections import OrderedDict
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from ..base import coerce_enum, dumps_json, make_rng, read_json, spawn_seeds, to_json_safe, write_json
from ..coreset.coreset import Coreset, CoresetConfig, build_coreset, uniform_coreset
from ..data.dataset import WeightedDataset
from ..enums import ReportFormat, SamplingMethod, SweepMode
from ..objective.objective import ObjectiveContext, svm_objective
from ..sensitivity.sensitivity import compute_sensitivities, sufficient_condition
from ..solver.solver import REFERENCE_EPOCHS, SolverConfig, estimate_xi, reference_solve
from ..streaming.streaming import StreamingCoreset, iter_chunks

# ========================================================= #


REPORT_COLUMNS = ["method", "m", "rel_err_mean", "rel_err_std", "t_build_s", "t_train_s", "t_total_s"]

# share of failed trials a cell tolerates
MAX_FAILURE_RATE = 0.1

TRIAL_ERRORS = (ValueError, RuntimeError, FloatingPointError)


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def geometric_sizes(n: int, M: int = 15) -> list:
    """
    ``M`` geometrically spaced sample sizes in ``[ceil(log2 n), ceil(n^(4/5))]``, rounded and de-duplicated, so the
    result can hold fewer than ``M`` sizes for small ``n``.
    """
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")

    if M < 2:
        raise ValueError(f"M must be >= 2, got {M}")

    lo, hi = math.ceil(math.log2(n)), math.ceil(n ** 0.8)
    sizes = np.round(np.exp(np.linspace(math.log(lo), math.log(hi), M))).astype(np.int64)

    return [int(m) for m in np.unique(sizes)]


class SweepSpec:
    """
    One sweep: every method at every size, ``trials`` times. Trial ``i`` uses seed ``base_seed + i``.
    """

    def __init__(
        self,
        sizes: Optional[Sequence[int]] = None,
        M: int = 15,
        trials: int = 10,
        methods=(SamplingMethod.UNIFORM, SamplingMethod.CORESET),
        mode=SweepMode.OFFLINE,
        lam: float = 1.0,
        k: Optional[int] = None,
        base_seed: int = 0,
        epsilon: float = 0.1,
        delta: float = 0.1,
        solver: Optional[SolverConfig] = None,
        reference_epochs: int = REFERENCE_EPOCHS,
        xi: Optional[float] = None,
        max_workers: int = 1,
        enforce_dominance: bool = False,
        enforce_timing: bool = False,
    ):
        """
        :param sizes: explicit sample sizes. Defaults to :func:`geometric_sizes` with ``M`` sizes
        :param M: number of geometric sizes when ``sizes`` is omitted, at least 2
        :param trials: repetitions per (method, size)
        :param methods: samplers to compare. See :class:`svmcoreset.enums.SamplingMethod` for choices
        :param mode: offline or streaming. See :class:`svmcoreset.enums.SweepMode` for choices. In streaming mode
                     the size is the leaf size of the tree
        :param lam: regularization parameter
        :param k: clusters per label of the coreset builder
        :param base_seed: seed of trial 0
        :param epsilon: accuracy handed to the coreset builder (sizes are fixed, so it only matters for streaming)
        :param delta: failure probability handed to the coreset builder
        :param solver: how subsets are trained. One config for the whole sweep
        :param reference_epochs: iterations of the ground truth solver
        :param xi: solver accuracy for the coreset builder. Estimated once per sweep when omitted
        :param max_workers: trials run in a thread pool of this size
        :param enforce_dominance: fail the sweep when the coreset's mean or std error exceeds uniform's at some size
        :param enforce_timing: fail the sweep when building and training at the largest size is slower than the
                               ground truth solve
        """
        if sizes is not None:
            sizes = [int(m) for m in sizes]

            if not sizes or any(m < 1 for m in sizes) or any(b <= a for a, b in zip(sizes, sizes[1:])):
                raise ValueError(f"sizes must be positive and strictly increasing, got {sizes}")

        if M < 2:
            raise ValueError(f"M must be >= 2, got {M}")

        if trials < 1:
            raise ValueError(f"trials must be >= 1, got {trials}")

        if not (0 < lam <= 1):
            raise ValueError(f"lambda must be in (0, 1], got {lam}")

        self.sizes = sizes
        self.M = int(M)
        self.trials = int(trials)
        self.methods = [coerce_enum(m, SamplingMethod) for m in methods]
        self.mode = coerce_enum(mode, SweepMode)
        self.lam = float(lam)
        self.k = k
        self.base_seed = int(base_seed)
        self.epsilon = float(epsilon)
        self.delta = float(delta)
        self.solver = (solver or SolverConfig()).replace(lam=lam)
        self.reference_epochs = int(reference_epochs)
        self.xi = xi
        self.max_workers = int(max_workers)
        self.enforce_dominance = enforce_dominance
        self.enforce_timing = enforce_timing

        if not self.methods:
            raise ValueError("Need at least one method")

    def resolve_sizes(self, n: int) -> list:
        return list(self.sizes) if self.sizes is not None else geometric_sizes(n, self.M)

    def as_dict(self) -> dict:
        return {
            "sizes": self.sizes,
            "M": self.M,
            "trials": self.trials,
            "methods": [m.value for m in self.methods],
            "mode": self.mode.value,
            "lam": self.lam,
            "k": self.k,
            "base_seed": self.base_seed,
            "epsilon": self.epsilon,
            "delta": self.delta,
            "solver": self.solver.as_dict(),
            "reference_epochs": self.reference_epochs,
            "xi": self.xi,
            "enforce_dominance": self.enforce_dominance,
            "enforce_timing": self.enforce_timing,
        }

    def __repr__(self):
        return f"SweepSpec({self.as_dict()})"


# ========================================================= #


class SweepResult:
    """
    Aggregated sweep: one row per (method, size) with the columns of :data:`REPORT_COLUMNS` plus ``trials`` and
    ``failures``; ``meta`` holds the baseline and the spec; ``checks`` maps an invariant name to
    ``{"passed": ..., "enforced": ...}``.
    """

    def __init__(self, rows: list, meta: dict, checks: Optional[dict] = None):
        self.rows = [dict(r) for r in rows]
        self.meta = dict(meta)
        self.checks = dict(checks or {})

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks.values() if c["enforced"])

    @property
    def failed_checks(self) -> list:
        return [name for name, c in self.checks.items() if c["enforced"] and not c["passed"]]

    def cell(self, method, m: int) -> dict:
        method = coerce_enum(method, SamplingMethod).value

        for row in self.rows:
            if row["method"] == method and row["m"] == m:
                return row

        raise KeyError(f"No cell for method={method}, m={m}")

    def as_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows, columns=REPORT_COLUMNS + ["trials", "failures"])

    def to_dict(self) -> dict:
        return to_json_safe({"rows": self.rows, "meta": self.meta, "checks": self.checks})

    @classmethod
    def from_dict(cls, data: dict) -> "SweepResult":
        rows = [{k: (math.nan if v is None and k in REPORT_COLUMNS else v) for k, v in r.items()} for r in data["rows"]]
        return cls(rows, data.get("meta", {}), data.get("checks", {}))

    def __eq__(self, other):
        if not isinstance(other, SweepResult):
            return NotImplemented

        return self.to_dict() == other.to_dict()

    def __repr__(self):
        return f"SweepResult(cells={len(self.rows)}, passed={self.passed})"


# ========================================================= #


def relative_error(
    ds: WeightedDataset,
    coreset: Coreset,
    lam: float,
    solver_cfg: SolverConfig,
    reference: Optional[float] = None,
    exact: bool = False,
) -> float:
    """
    ``|F(P, w*_S) - F(P, w*)| / F(P, w*)``: train on the coreset (normalized with its ``origin_U``), evaluate on the
    full set.

    :param ds: the full data set
    :param coreset: the subset to train on
    :param lam: regularization parameter
    :param solver_cfg: solver used on the coreset
    :param reference: ``F(P, w*)``. Computed with :func:`reference_solve` when omitted
    :param exact: train on the coreset with :func:`reference_solve` instead of the SGD solver
    """
    ctx = ObjectiveContext.for_dataset(ds, lam)
    cfg = solver_cfg.replace(lam=lam)

    if reference is None:
        _, reference = reference_solve(ds, cfg.replace(epochs=REFERENCE_EPOCHS))

    if exact:
        w_s, _ = reference_solve(coreset.dataset, cfg.replace(epochs=REFERENCE_EPOCHS), u_norm=coreset.origin_U)
    else:
        w_s, _ = coreset.train(cfg)

    return abs(svm_objective(ds, w_s, ctx) - reference) / reference


def _draw(ds: WeightedDataset, spec: SweepSpec, method: SamplingMethod, m: int, seed: int, xi) -> Coreset:
    if spec.mode == SweepMode.STREAMING:
        config = CoresetConfig(spec.epsilon, spec.delta, spec.lam, spec.k, seed=seed, xi=xi, solver=spec.solver)
        stream = StreamingCoreset(m, config, n_estimate=max(ds.n, 2), method=method)
        return stream.feed(iter_chunks(ds, 2 * m)).finalize()

    if method == SamplingMethod.UNIFORM:
        return uniform_coreset(ds, m, seed)

    config = CoresetConfig(spec.epsilon, spec.delta, spec.lam, spec.k, m_override=m, seed=seed, xi=xi, solver=spec.solver)
    return build_coreset(ds, config)


def _trial(ds: WeightedDataset, spec: SweepSpec, method: SamplingMethod, m: int, trial: int, reference, xi):
    seed = spec.base_seed + trial

    start = time.perf_counter()
    coreset = _draw(ds, spec, method, m, seed, xi)
    built = time.perf_counter()
    error = relative_error(ds, coreset, spec.lam, spec.solver.replace(seed=seed), reference=reference)
    trained = time.perf_counter()

    return error, built - start, trained - built


def _aggregate(method: SamplingMethod, m: int, outcomes: list, trials: int) -> dict:
    ok = [o for o in outcomes if o is not None]
    errors = np.array([o[0] for o in ok], dtype=np.float64)
    builds = np.array([o[1] for o in ok], dtype=np.float64)
    trains = np.array([o[2] for o in ok], dtype=np.float64)

    def mean(values):
        return float(values.mean()) if values.size else math.nan

    return {
        "method": method.value,
        "m": int(m),
        "rel_err_mean": mean(errors),
        "rel_err_std": float(errors.std()) if errors.size else math.nan,
        "t_build_s": mean(builds),
        "t_train_s": mean(trains),
        "t_total_s": mean(builds + trains),
        "trials": trials,
        "failures": trials - len(ok),
    }


def _checks(rows: list, spec: SweepSpec, meta: dict) -> dict:
    checks = {
        "failure_rate": {
            "passed": all(r["failures"] <= MAX_FAILURE_RATE * r["trials"] for r in rows),
            "enforced": True,
        },
        "finite_errors": {
            "passed": all(math.isfinite(r["rel_err_mean"]) and r["rel_err_mean"] >= 0 for r in rows),
            "enforced": True,
        },
    }

    by_method = {}
    for row in rows:
        by_method.setdefault(row["method"], {})[row["m"]] = row

    uniform, coreset = by_method.get("uniform"), by_method.get("coreset")

    if uniform and coreset:
        shared = sorted(set(uniform) & set(coreset))
        checks["coreset_mean_dominates"] = {
            "passed": all(coreset[m]["rel_err_mean"] <= uniform[m]["rel_err_mean"] for m in shared),
            "enforced": spec.enforce_dominance,
        }
        checks["coreset_std_dominates"] = {
            "passed": all(coreset[m]["rel_err_std"] <= uniform[m]["rel_err_std"] for m in shared),
            "enforced": spec.enforce_dominance,
        }

    if coreset:
        largest = coreset[max(coreset)]
        checks["faster_than_reference"] = {
            "passed": largest["t_total_s"] < meta["t_reference_s"],
            "enforced": spec.enforce_timing,
        }

    return checks


def run_sweep(ds: WeightedDataset, spec: SweepSpec) -> SweepResult:
    """
    Runs every (method, size, trial) job, in a thread pool when ``spec.max_workers > 1``, and aggregates per cell in
    submission order. The ground truth ``w*`` is solved once and shared by every trial. Failed trials are logged and
    counted; a cell with more than 10% failures fails the ``failure_rate`` check.

    :param ds: the full data set
    :param spec: the sweep
    :return: the :class:`SweepResult`
    """
    if ds.n < 2:
        raise ValueError(f"A sweep needs at least 2 points, got {ds.n}")

    sizes = spec.resolve_sizes(ds.n)

    start = time.perf_counter()
    w_star, reference = reference_solve(ds, spec.solver.replace(epochs=spec.reference_epochs))
    t_reference = time.perf_counter() - start

    xi = spec.xi

    if xi is None and SamplingMethod.CORESET in spec.methods:
        xi = estimate_xi(ds, spec.solver.replace(seed=spec.base_seed))

    get_logger().info(f"Sweep over {ds}: sizes {sizes}, F* = {reference:.6g} ({t_reference:.3f}s)")

    jobs = [(method, m, trial) for method in spec.methods for m in sizes for trial in range(spec.trials)]
    futures = OrderedDict()

    def run(job):
        method, m, trial = job

        try:
            return _trial(ds, spec, method, m, trial, reference, xi)
        except TRIAL_ERRORS as exc:
            get_logger().warning(f"Trial {trial} of {method.value} at m={m} failed: {exc}")
            return None

    if spec.max_workers > 1:
        with ThreadPoolExecutor(max_workers=spec.max_workers) as pool:
            for job in jobs:
                futures[job] = pool.submit(run, job)

        outcomes = {job: future.result() for job, future in futures.items()}
    else:
        outcomes = {job: run(job) for job in jobs}

    rows = [
        _aggregate(method, m, [outcomes[(method, m, trial)] for trial in range(spec.trials)], spec.trials)
        for method in spec.methods
        for m in sizes
    ]

    meta = {
        "n": ds.n,
        "d": ds.d,
        "U": ds.U,
        "sizes": sizes,
        "reference_objective": reference,
        "reference_w": w_star.tolist(),
        "t_reference_s": t_reference,
        "xi": xi,
        "spec": spec.as_dict(),
    }
    result = SweepResult(rows, meta, _checks(rows, spec, meta))

    for name in result.failed_checks:
        get_logger().warning(f"Sweep check failed: {name}")

    return result


# ========================================================= #


def report(result: SweepResult, format=ReportFormat.CSV, path=None) -> str:
    """
    Writes (or returns) the sweep in long format. CSV has exactly the columns of :data:`REPORT_COLUMNS`; JSON holds
    everything and reads back with :meth:`SweepResult.from_dict`.

    :param result: a non empty result
    :param format: See :class:`svmcoreset.enums.ReportFormat` for choices
    :param path: file to write. When omitted the text is only returned
    :return: the report text
    """
    if not result.rows:
        raise ValueError("Cannot report an empty sweep result")

    format = coerce_enum(format, ReportFormat)

    if format == ReportFormat.CSV:
        text = result.as_frame()[REPORT_COLUMNS].to_csv(index=False, float_format="%.10g")

        if path is not None:
            with open(path, "w", newline="") as f:
                f.write(text)

        return text

    if path is not None:
        write_json(path, result.to_dict())

    return dumps_json(result.to_dict()).decode("utf-8")


def load_report(path) -> SweepResult:
    return SweepResult.from_dict(read_json(path))


# ========================================================= #


def sensitivity_profile(
    ds: WeightedDataset,
    lam: float = 1.0,
    k: Optional[int] = None,
    sizes: Optional[Sequence[int]] = None,
    seed=0,
) -> pd.DataFrame:
    """
    Total sensitivity against data size: one row ``(n, t, t / n, bound, sufficient_condition)`` per size, each
    measured on a uniform sub sample without replacement (the full set when ``sizes`` is omitted).
    """
    sizes = [ds.n] if sizes is None else sorted(int(s) for s in sizes)

    if any(s < 2 or s > ds.n for s in sizes):
        raise ValueError(f"Profile sizes must be in [2, {ds.n}], got {sizes}")

    rows = []

    for size, child in zip(sizes, spawn_seeds(seed, len(sizes))):
        sample_seed, table_seed = child.spawn(2)

        if size == ds.n:
            sub = ds
        else:
            sub = ds.subset(np.sort(make_rng(sample_seed).choice(ds.n, size=size, replace=False)))

        table = compute_sensitivities(sub, lam=lam, k=k, seed=table_seed)
        rows.append(
            {
                "n": size,
                "t": table.t,
                "t_over_n": table.t / size,
                "bound": table.bound,
                "sufficient_condition": sufficient_condition(size, lam),
            }
        )

    return pd.DataFrame(rows, columns=["n", "t", "t_over_n", "bound", "sufficient_condition"])


# ========================================================= #
