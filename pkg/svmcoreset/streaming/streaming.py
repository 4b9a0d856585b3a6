# ========================================================= #
import logging
import math
from typing import Iterable, Optional, Tuple

import numpy as np

from ..base import coerce_enum
from ..coreset.coreset import DEFAULT_C_CONST, Coreset, CoresetConfig, build_coreset, uniform_coreset
from ..data.dataset import WeightedDataset
from ..data.io import iter_csv_chunks
from ..enums import EstimateSchedule, SamplingMethod

# ========================================================= #


def get_logger():
    return logging.getLogger(__name__)


# ========================================================= #


def adjusted_params(epsilon: float, delta: float, n_estimate: int) -> Tuple[float, float]:
    """
    The tightened parameters every node of the merge-and-reduce tree is built with:
    ``eps' = eps / (2 log2 n)`` and ``delta' = delta / (2 log2 n)``.

    :param epsilon: accuracy of the root
    :param delta: failure probability of the root
    :param n_estimate: (an estimate of) the stream length, at least 2
    :return: tuple ``(eps', delta')``
    """
    if n_estimate < 2:
        raise ValueError(f"n_estimate must be >= 2, got {n_estimate}")

    depth = 2.0 * math.log2(n_estimate)

    return epsilon / depth, delta / depth


def leaf_size_hint(
    t_estimate: float,
    epsilon: float,
    delta: float,
    d: int,
    n: int,
    beta: float,
    c_const: float = DEFAULT_C_CONST,
) -> int:
    """
    Advisory leaf size ``max{2^(beta / (1 - beta)), c (t log2(n)^2 / eps^2)(d ln t + ln(log2(n) / delta))}``.

    ``beta`` is the growth exponent of the total sensitivity (``t ~ n^beta``). It is a property of the data that
    cannot be observed online, so the caller supplies it.
    """
    if not (0.1 < beta < 0.8):
        raise ValueError(f"beta must be in (0.1, 0.8), got {beta}")

    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")

    if not t_estimate > 0:
        raise ValueError(f"t_estimate must be positive, got {t_estimate}")

    log_n = math.log2(n)
    first = 2.0 ** (beta / (1.0 - beta))
    second = c_const * (t_estimate * log_n ** 2 / epsilon ** 2) * (
        d * math.log(max(t_estimate, math.e)) + math.log(log_n / delta)
    )

    return math.ceil(max(first, second))


def compounding_bounds(epsilon: float, n: int) -> Tuple[float, float, bool]:
    """
    Error compounded over a tree of height ``log2 n`` built with ``eps'``.

    :return: tuple ``((1 + eps')^log2(n), (1 - eps')^log2(n), ok)`` where ``ok`` tells whether both stay within
             ``1 +- eps``
    """
    eps_prime, _ = adjusted_params(epsilon, 0.5, n)
    height = math.log2(n)
    upper = (1.0 + eps_prime) ** height
    lower = (1.0 - eps_prime) ** height

    return upper, lower, upper <= 1.0 + epsilon and lower >= 1.0 - epsilon


def memory_bound(leaf_size: int, n_seen: int) -> int:
    """
    Largest number of entries the buckets may hold after ``n_seen`` points: ``l (ceil(log2(n / 2l)) + 2)``.
    """
    ratio = max(n_seen / (2.0 * leaf_size), 1.0)
    return leaf_size * (math.ceil(math.log2(ratio)) + 2)


def doubling_estimate(n_seen: int, leaf_size: int) -> int:
    """
    Smallest power of 4 covering what has been seen (at least one full chunk).
    """
    floor = max(n_seen, 2 * leaf_size, 4)
    return 4 ** math.ceil(math.log(floor, 4) - 1e-12)


# ========================================================= #


class StreamingCoreset:
    """
    Merge-and-reduce over a stream of chunks of ``2 * leaf_size`` points.

    Every chunk is compressed to ``leaf_size`` entries and pushed to level 1. Whenever a level holds two coresets,
    they are merged (weights carried unchanged) and compressed again into the next level, so the buckets form a
    binary counter over the chunks. :meth:`finalize` folds what is left into the root coreset.

    Use it as a context manager or call :meth:`close` to drop the buckets.

    .. code-block:: python

        with StreamingCoreset(512, CoresetConfig(epsilon=0.2, delta=0.1), n_estimate=100_000) as stream:
            for chunk in chunks:
                stream.push_chunk(chunk)

            root = stream.finalize()
    """

    def __init__(
        self,
        leaf_size: int,
        config: Optional[CoresetConfig] = None,
        n_estimate: Optional[int] = None,
        method=SamplingMethod.CORESET,
        check_memory: bool = True,
    ):
        """
        :param leaf_size: ``l``, the size of every stored coreset. Chunks hold ``2 l`` points
        :param config: accuracy / regularization settings of the root. ``m_override`` is ignored
        :param n_estimate: expected stream length. When omitted the tightened parameters follow a doubling schedule
                           over powers of 4
        :param method: how every node compresses: sensitivity coresets or uniform samples.
                       See :class:`svmcoreset.enums.SamplingMethod` for choices
        :param check_memory: assert the memory bound after every chunk
        """
        if leaf_size < 1:
            raise ValueError(f"leaf_size must be >= 1, got {leaf_size}")

        if n_estimate is not None and n_estimate < 2:
            raise ValueError(f"n_estimate must be >= 2, got {n_estimate}")

        self.leaf_size = int(leaf_size)
        self.config = config or CoresetConfig()
        self.n_estimate = n_estimate
        self.method = coerce_enum(method, SamplingMethod)
        self.check_memory = check_memory
        self.schedule = EstimateSchedule.FIXED if n_estimate is not None else EstimateSchedule.DOUBLING

        if self.schedule == EstimateSchedule.DOUBLING:
            get_logger().warning("No n_estimate: tightening eps' and delta' on a doubling schedule over powers of 4")

        self.buckets = {}
        self.height = 0
        self.n_seen = 0
        self.U_seen = 0.0
        self.chunks = 0
        self.merges = 0
        self.peak_entries = 0
        self._d = None
        self._seeds = np.random.SeedSequence(self.config.seed)

    # Context managers
    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close()

    def close(self):
        self.buckets = {}

    # ----------------------------------------------------- #

    @property
    def stored_entries(self) -> int:
        return sum(c.m for level in self.buckets.values() for c in level)

    @property
    def nonempty_levels(self) -> int:
        return sum(1 for level in self.buckets.values() if level)

    @property
    def current_estimate(self) -> int:
        if self.schedule == EstimateSchedule.FIXED:
            return self.n_estimate

        return doubling_estimate(self.n_seen, self.leaf_size)

    def params(self) -> Tuple[float, float]:
        return adjusted_params(self.config.epsilon, self.config.delta, self.current_estimate)

    def _next_seed(self) -> int:
        return int(self._seeds.spawn(1)[0].generate_state(1)[0])

    # ----------------------------------------------------- #

    def _compress(self, ds: WeightedDataset, origin_U: float) -> Coreset:
        if ds.n <= self.leaf_size:
            # small enough to keep exactly
            kept = ds.subset(np.flatnonzero(ds.u > 0))
            return Coreset(kept.ids, kept.u, kept.X, kept.y, origin_U, builder={"method": "exact", "m": kept.n})

        seed = self._next_seed()

        if self.method == SamplingMethod.UNIFORM:
            return uniform_coreset(ds, self.leaf_size, seed, origin_U)

        eps_prime, delta_prime = self.params()
        cfg = self.config.replace(epsilon=eps_prime, delta=delta_prime, m_override=self.leaf_size, seed=seed)

        return build_coreset(ds, cfg, origin_U)

    def _merge(self, a: Coreset, b: Coreset) -> Coreset:
        union = WeightedDataset.concat([a.dataset, b.dataset])
        self.merges += 1

        return self._compress(union, a.origin_U + b.origin_U)

    def _check(self):
        stored = self.stored_entries
        self.peak_entries = max(self.peak_entries, stored)

        if self.check_memory:
            bound = memory_bound(self.leaf_size, self.n_seen)

            if stored > bound:
                raise RuntimeError(f"Buckets hold {stored} entries after {self.n_seen} points, bound is {bound}")

    def push_chunk(self, chunk: WeightedDataset) -> "StreamingCoreset":
        """
        Compresses one chunk and cascades the merges.

        :param chunk: at most ``2 * leaf_size`` points. Only the last chunk of a stream should be shorter
        :return: ``self``
        """
        if chunk.n == 0:
            raise ValueError("Cannot push an empty chunk")

        if chunk.n > 2 * self.leaf_size:
            raise ValueError(f"Chunks hold at most {2 * self.leaf_size} points, got {chunk.n}")

        if self._d is not None and chunk.d != self._d:
            raise ValueError(f"Chunk has d={chunk.d}, the stream has d={self._d}")

        self._d = chunk.d
        self.n_seen += chunk.n
        self.U_seen += chunk.U
        self.chunks += 1

        level = 1
        self.buckets.setdefault(level, []).append(self._compress(chunk, chunk.U))

        while len(self.buckets.get(level, [])) >= 2:
            a, b = self.buckets[level].pop(), self.buckets[level].pop()
            level += 1
            self.buckets.setdefault(level, []).append(self._merge(b, a))

        self.height = max(self.height, level)
        self._check()

        get_logger().debug(
            f"chunk {self.chunks}: n_seen={self.n_seen}, levels={self.nonempty_levels}, stored={self.stored_entries}"
        )

        return self

    def feed(self, chunks: Iterable[WeightedDataset]) -> "StreamingCoreset":
        for chunk in chunks:
            self.push_chunk(chunk)

        return self

    def finalize(self) -> Coreset:
        """
        Folds the remaining bucket residents, lowest level first, into a single coreset and returns it. A stream of a
        single chunk returns that chunk's coreset unchanged.
        """
        residents = [c for level in sorted(self.buckets) for c in self.buckets[level]]

        if not residents:
            raise ValueError("Cannot finalize an empty stream")

        root = residents[0]

        for other in residents[1:]:
            root = self._merge(root, other)

        eps_prime, delta_prime = self.params()
        upper, lower, ok = compounding_bounds(self.config.epsilon, max(self.n_seen, 2))

        if not ok:
            get_logger().warning(f"Compounded error ({lower:.6g}, {upper:.6g}) is outside 1 +- {self.config.epsilon}")

        root.builder = dict(
            root.builder,
            streaming={
                "leaf_size": self.leaf_size,
                "n_seen": self.n_seen,
                "chunks": self.chunks,
                "merges": self.merges,
                "height": self.height,
                "peak_entries": self.peak_entries,
                "memory_bound": memory_bound(self.leaf_size, self.n_seen),
                "schedule": self.schedule.value,
                "method": self.method.value,
                "epsilon_prime": eps_prime,
                "delta_prime": delta_prime,
                "compounding": {"upper": upper, "lower": lower, "ok": ok},
            },
        )

        get_logger().info(f"Stream root {root} after {self.chunks} chunks, peak {self.peak_entries} entries")

        return root

    def __repr__(self):
        return (
            f"StreamingCoreset(leaf_size={self.leaf_size}, n_seen={self.n_seen}, levels={self.nonempty_levels}, "
            f"stored={self.stored_entries})"
        )


# ========================================================= #


def iter_chunks(ds: WeightedDataset, chunk_size: int):
    """
    Consecutive slices of ``ds`` in row order.
    """
    for start in range(0, ds.n, chunk_size):
        yield ds.subset(np.arange(start, min(start + chunk_size, ds.n)))


def stream_dataset(ds: WeightedDataset, leaf_size: int, config: Optional[CoresetConfig] = None, **kwargs) -> Coreset:
    """
    Runs :class:`StreamingCoreset` over an in-memory data set chunk by chunk. ``kwargs`` go to the constructor.
    """
    with StreamingCoreset(leaf_size, config, **kwargs) as stream:
        return stream.feed(iter_chunks(ds, 2 * leaf_size)).finalize()


def stream_csv(path, leaf_size: int, config: Optional[CoresetConfig] = None, csv_options=None, **kwargs) -> Coreset:
    """
    Same as :func:`stream_dataset` but reads ``path`` ``2 * leaf_size`` rows at a time.

    :param csv_options: keyword arguments for :func:`svmcoreset.data.iter_csv_chunks` (label column, header,
                        moments for standardization, ...)
    """
    with StreamingCoreset(leaf_size, config, **kwargs) as stream:
        return stream.feed(iter_csv_chunks(path, 2 * leaf_size, **(csv_options or {}))).finalize()


# ========================================================= #
