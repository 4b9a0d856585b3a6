import numpy as np
import pytest

from svmcoreset.bench import relative_error
from svmcoreset.coreset import CoresetConfig, build_coreset
from svmcoreset.data import WeightedDataset, export_csv
from svmcoreset.datagen import gen_blobs
from svmcoreset.enums import EstimateSchedule, SamplingMethod
from svmcoreset.objective import ObjectiveContext, svm_objective
from svmcoreset.solver import REFERENCE_EPOCHS, SolverConfig, reference_solve
from svmcoreset.streaming import (
    StreamingCoreset,
    adjusted_params,
    compounding_bounds,
    doubling_estimate,
    iter_chunks,
    leaf_size_hint,
    memory_bound,
    stream_csv,
    stream_dataset,
)

LEAF = 10
CONFIG = CoresetConfig(epsilon=0.2, delta=0.2, solver=SolverConfig(epochs=5), xi=0.0, seed=3)


@pytest.fixture
def shuffled(blobs):
    # ids follow the new row order so csv stream positions line up with them
    order = np.random.default_rng(0).permutation(blobs.n)
    return WeightedDataset(blobs.X[order], blobs.y[order])


def _stream(ds, n_chunks, **kwargs):
    stream = StreamingCoreset(LEAF, CONFIG, n_estimate=1024, **kwargs)
    chunks = list(iter_chunks(ds, 2 * LEAF))[:n_chunks]
    return stream.feed(chunks)


def test_adjusted_params():
    assert adjusted_params(0.1, 0.08, 4) == pytest.approx((0.025, 0.02))
    assert adjusted_params(0.2, 0.1, 2) == pytest.approx((0.1, 0.05))

    with pytest.raises(ValueError):
        adjusted_params(0.1, 0.1, 1)


@pytest.mark.parametrize("beta, expected", [(0.5, 2), (0.75, 8)])
def test_leaf_size_hint_exponent_term(beta, expected):
    assert leaf_size_hint(1.0, 0.1, 0.1, 2, 1024, beta, c_const=1e-12) == expected


def test_leaf_size_hint_sample_term():
    hint = leaf_size_hint(50.0, 0.3, 0.3, 4, 100_000, 0.5, c_const=0.01)
    log_n = np.log2(100_000)
    expected = 0.01 * (50.0 * log_n ** 2 / 0.3 ** 2) * (4 * np.log(50.0) + np.log(log_n / 0.3))

    assert hint == int(np.ceil(expected))
    assert 29_000 < hint < 31_000


@pytest.mark.parametrize("beta", [0.1, 0.8])
def test_leaf_size_hint_beta_range(beta):
    with pytest.raises(ValueError, match="beta"):
        leaf_size_hint(10.0, 0.1, 0.1, 2, 1024, beta)


def test_compounding_stays_within_epsilon():
    upper, lower, ok = compounding_bounds(0.1, 1024)

    assert upper == pytest.approx(1.005 ** 10)
    assert lower == pytest.approx(0.995 ** 10)
    assert ok


def test_memory_bound_and_doubling_estimate():
    assert memory_bound(10, 20) == 20
    assert memory_bound(10, 40) == 30
    assert memory_bound(10, 160) == 50

    assert doubling_estimate(1, 1) == 4
    assert doubling_estimate(10, 2) == 16
    assert doubling_estimate(16, 2) == 16
    assert doubling_estimate(17, 2) == 64


# ========================================================= #


def test_two_chunks_merge_into_level_two(shuffled):
    stream = _stream(shuffled, 2)

    assert stream.buckets[1] == []
    assert len(stream.buckets[2]) == 1
    assert stream.buckets[2][0].m == LEAF
    assert stream.merges == 1


def test_four_chunks_reach_level_three(shuffled):
    stream = _stream(shuffled, 4)

    assert [len(stream.buckets.get(level, [])) for level in (1, 2, 3)] == [0, 0, 1]
    assert stream.height == 3


def test_three_chunks_fold_into_one_root(shuffled):
    stream = _stream(shuffled, 3)

    assert [len(stream.buckets[level]) for level in (1, 2)] == [1, 1]

    root = stream.finalize()

    assert root.m == LEAF
    assert root.origin_U == pytest.approx(3 * 2 * LEAF)
    assert root.builder["streaming"]["chunks"] == 3


def test_single_small_chunk_is_kept_exactly(tiny):
    root = stream_dataset(tiny, LEAF, CONFIG, n_estimate=16)

    assert root.ids.tolist() == tiny.ids.tolist()
    assert np.array_equal(root.v, tiny.u)
    assert root.objective([0.2, 0.1, -0.3], 1.0) == pytest.approx(
        svm_objective(tiny, [0.2, 0.1, -0.3], ObjectiveContext.for_dataset(tiny, 1.0))
    )


def test_memory_stays_bounded(shuffled):
    stream = _stream(shuffled, 10)

    assert stream.peak_entries <= memory_bound(LEAF, stream.n_seen)
    assert stream.stored_entries == LEAF * stream.nonempty_levels


def test_uniform_stream_carries_total_weight(shuffled):
    root = stream_dataset(shuffled, LEAF, CONFIG, n_estimate=shuffled.n, method=SamplingMethod.UNIFORM)

    assert root.m == LEAF
    assert root.total_weight == pytest.approx(shuffled.U)
    assert root.builder["streaming"]["method"] == "uniform"


def test_coreset_stream_keeps_origin_weight(shuffled):
    root = stream_dataset(shuffled, LEAF, CONFIG, n_estimate=shuffled.n)

    assert root.m == LEAF
    assert root.origin_U == pytest.approx(shuffled.U)
    assert root.builder["streaming"]["n_seen"] == shuffled.n


def test_stream_is_deterministic(shuffled):
    a = stream_dataset(shuffled, LEAF, CONFIG, n_estimate=shuffled.n)
    b = stream_dataset(shuffled, LEAF, CONFIG, n_estimate=shuffled.n)

    assert np.array_equal(a.ids, b.ids)
    assert np.array_equal(a.v, b.v)


def test_doubling_schedule_without_estimate(shuffled):
    stream = StreamingCoreset(LEAF, CONFIG)
    stream.feed(iter_chunks(shuffled, 2 * LEAF))

    assert stream.schedule == EstimateSchedule.DOUBLING
    assert stream.current_estimate == 256
    assert stream.finalize().builder["streaming"]["schedule"] == "doubling"


def test_empty_stream_cannot_finalize():
    with pytest.raises(ValueError, match="empty stream"):
        StreamingCoreset(LEAF, CONFIG, n_estimate=16).finalize()


def test_chunk_validation(shuffled, tiny):
    stream = StreamingCoreset(LEAF, CONFIG, n_estimate=16)

    with pytest.raises(ValueError, match="at most"):
        stream.push_chunk(shuffled.subset(np.arange(2 * LEAF + 1)))

    stream.push_chunk(tiny)

    with pytest.raises(ValueError, match="d="):
        stream.push_chunk(WeightedDataset([[1.0, 2.0, 3.0, 1.0]], [1]))


def test_csv_stream_matches_in_memory_stream(tmp_path, shuffled):
    path = tmp_path / "stream.csv"
    export_csv(shuffled, path)

    from_file = stream_csv(path, LEAF, CONFIG, n_estimate=shuffled.n)
    in_memory = stream_dataset(shuffled, LEAF, CONFIG, n_estimate=shuffled.n)

    assert np.array_equal(from_file.ids, in_memory.ids)
    assert np.array_equal(from_file.v, in_memory.v)


@pytest.mark.slow
def test_root_coreset_is_as_good_as_an_offline_one():
    blobs = gen_blobs(50000, d=2, seed=1)
    order = np.random.default_rng(1).permutation(blobs.n)
    ds = WeightedDataset(blobs.X[order], blobs.y[order])
    leaf, solver = 512, SolverConfig(epochs=20)
    _, reference = reference_solve(ds, SolverConfig(epochs=REFERENCE_EPOCHS))

    streamed, offline = [], []

    for trial in range(10):
        config = CoresetConfig(epsilon=0.2, delta=0.2, solver=solver, xi=0.0, seed=trial)
        stream = StreamingCoreset(leaf, config, n_estimate=ds.n, check_memory=True)
        root = stream.feed(iter_chunks(ds, 2 * leaf)).finalize()
        flat = build_coreset(ds, config.replace(m_override=root.m))

        streamed.append(relative_error(ds, root, 1.0, solver.replace(seed=trial), reference))
        offline.append(relative_error(ds, flat, 1.0, solver.replace(seed=trial), reference))

    assert stream.peak_entries <= memory_bound(leaf, ds.n)
    assert np.mean(streamed) <= 2.0 * np.mean(offline)
