import logging

import numpy as np
import pytest

from svmcoreset.coreset import (
    Coreset,
    CoresetConfig,
    build_coreset,
    corollary_factor,
    importance_sample,
    raw_sample_size,
    sample_size,
    sample_size_capped,
    sidecar_paths,
    uniform_coreset,
)
from svmcoreset.datagen import gen_blobs, gen_pathological
from svmcoreset.objective import ObjectiveContext, svm_objective
from svmcoreset.sensitivity import compute_sensitivities
from svmcoreset.solver import REFERENCE_EPOCHS, SolverConfig, reference_solve

FAST = SolverConfig(epochs=10)


def test_sample_size_worked_example():
    assert raw_sample_size(100, 0.1, 0.1, 10, c_const=1.0) == 483543


def test_small_total_sensitivity_uses_log_e():
    # ln max{t, e} is 1 for t <= e
    assert raw_sample_size(0.5, 0.5, 0.5, 2, c_const=1.0) == int(np.ceil(2.0 * (2 + np.log(2.0))))


def test_sample_size_cap_is_logged(caplog):
    with caplog.at_level(logging.WARNING):
        assert sample_size(100, 0.1, 0.1, 10, c_const=1.0, n=5000) == 5000

    assert "capped at n=5000" in caplog.text
    assert sample_size_capped(100, 0.1, 0.1, 10, c_const=1.0, n=5000)
    assert not sample_size_capped(100, 0.1, 0.1, 10, c_const=1.0)


def test_sample_size_validation():
    with pytest.raises(ValueError):
        raw_sample_size(0.0, 0.1, 0.1, 2)

    with pytest.raises(ValueError):
        raw_sample_size(1.0, 0.1, 1.0, 2)


@pytest.mark.parametrize("eps", [0.01, 0.1, 0.25, 0.49])
def test_corollary_factor_stays_below_one_plus_four_eps(eps):
    assert corollary_factor(eps) == pytest.approx((1 + eps) / (1 - eps))
    assert corollary_factor(eps) <= 1 + 4 * eps


def test_corollary_factor_rejects_large_eps():
    with pytest.raises(ValueError):
        corollary_factor(0.5)


def test_config_validation():
    for bad in (dict(epsilon=0.5), dict(delta=0.0), dict(lam=0.0), dict(k=0), dict(m_override=0), dict(c_const=0)):
        with pytest.raises(ValueError):
            CoresetConfig(**bad)

    assert CoresetConfig().replace(epsilon=0.2).epsilon == 0.2


def test_coreset_rejects_bad_weights(tiny):
    with pytest.raises(ValueError, match="positive"):
        Coreset([0], [0.0], tiny.X[:1], tiny.y[:1], tiny.U)

    with pytest.raises(ValueError, match="at least one"):
        Coreset([], [], np.zeros((0, 3)), [], tiny.U)


# ========================================================= #


def test_uniform_weights(blobs):
    coreset = uniform_coreset(blobs, 40, seed=0)

    assert coreset.m == 40
    assert np.allclose(coreset.v, blobs.n / 40)
    assert coreset.total_weight == pytest.approx(blobs.U)
    assert coreset.builder["method"] == "uniform"


def test_importance_weights_follow_the_distribution(blobs):
    table = compute_sensitivities(blobs, seed=0, solver=FAST, xi=0.0)
    coreset = importance_sample(blobs, table, 30, seed=1)
    position = {int(i): p for p, i in enumerate(blobs.ids)}

    for point_id, weight in coreset.entries:
        p = position[point_id]
        assert weight == pytest.approx(blobs.u[p] / (30 * table.q[p]))


def test_single_draw_coreset(blobs):
    coreset = build_coreset(blobs, CoresetConfig(m_override=1, solver=FAST, xi=0.0))

    assert coreset.m == 1
    assert coreset.v[0] > 0


def test_capped_coreset_keeps_n_draws(blobs):
    coreset = build_coreset(blobs, CoresetConfig(c_const=1.0, solver=FAST, xi=0.0))

    assert coreset.capped
    assert coreset.m == blobs.n
    assert coreset.builder["sensitivity"]["t"] == coreset.t


def test_build_is_deterministic(blobs):
    cfg = CoresetConfig(m_override=25, seed=11, solver=FAST)

    a, b = build_coreset(blobs, cfg), build_coreset(blobs, cfg)

    assert np.array_equal(a.ids, b.ids)
    assert np.array_equal(a.v, b.v)


def test_different_seeds_draw_differently(blobs):
    a = build_coreset(blobs, CoresetConfig(m_override=25, seed=1, solver=FAST, xi=0.0))
    b = build_coreset(blobs, CoresetConfig(m_override=25, seed=2, solver=FAST, xi=0.0))

    assert not np.array_equal(a.ids, b.ids)


def test_coalesce_preserves_objective(blobs):
    coreset = build_coreset(blobs, CoresetConfig(m_override=150, solver=FAST, xi=0.0))
    merged = coreset.coalesce()
    w = np.array([0.4, -0.3, 0.2])

    assert merged.m <= coreset.m
    assert len(set(merged.ids.tolist())) == merged.m
    assert merged.objective(w, 1.0) == pytest.approx(coreset.objective(w, 1.0))
    assert merged.builder["coalesced"]


def test_coreset_estimate_is_unbiased(blobs):
    table = compute_sensitivities(blobs, seed=0, solver=FAST, xi=0.0)
    w = np.array([0.5, 0.5, -0.1])
    truth = svm_objective(blobs, w, ObjectiveContext.for_dataset(blobs, 1.0))

    estimates = np.array([importance_sample(blobs, table, 20, seed=s).objective(w, 1.0) for s in range(400)])

    assert abs(estimates.mean() - truth) <= 4.0 * estimates.std() / np.sqrt(estimates.size)


def test_uniform_estimate_is_unbiased(blobs):
    w = np.array([-0.2, 0.7, 0.3])
    truth = svm_objective(blobs, w, ObjectiveContext.for_dataset(blobs, 1.0))

    estimates = np.array([uniform_coreset(blobs, 20, seed=s).objective(w, 1.0) for s in range(400)])

    assert abs(estimates.mean() - truth) <= 4.0 * estimates.std() / np.sqrt(estimates.size)


def test_importance_weights_sum_to_the_total_in_expectation(pathological):
    table = compute_sensitivities(pathological, seed=0, solver=FAST, xi=0.0)
    totals = np.array([importance_sample(pathological, table, 20, seed=s).total_weight for s in range(400)])

    assert abs(totals.mean() - pathological.U) <= 4.0 * totals.std() / np.sqrt(totals.size)
    assert uniform_coreset(pathological, 20, seed=0).total_weight == pytest.approx(pathological.U)


def test_close_pair_is_drawn_more_often_than_uniformly(pathological):
    table = compute_sensitivities(pathological, seed=0, solver=SolverConfig(epochs=50))
    pair = set(pathological.metadata["close_pair"])

    def hits(draw):
        return sum(bool(pair & set(draw(s).ids.tolist())) for s in range(200))

    importance = hits(lambda s: importance_sample(pathological, table, 20, seed=s))
    uniform = hits(lambda s: uniform_coreset(pathological, 20, seed=s))

    assert importance > uniform


def test_close_pair_inclusion_on_the_full_size_instance():
    ds = gen_pathological(1000, seed=0)
    table = compute_sensitivities(ds, seed=0, solver=SolverConfig(epochs=50))
    pair = set(ds.metadata["close_pair"])

    def frequency(draw):
        return np.mean([bool(pair & set(draw(s).ids.tolist())) for s in range(200)])

    importance = frequency(lambda s: importance_sample(ds, table, 20, seed=s))
    uniform = frequency(lambda s: uniform_coreset(ds, 20, seed=s))

    # a uniform draw of 20 holds a pair point with probability about 20 * 2 / 1000
    assert importance >= 0.25
    assert importance >= 4 * max(uniform, 20 * 2.0 / ds.n)


def test_training_on_the_coreset_uses_origin_normalization(blobs):
    coreset = uniform_coreset(blobs, 50, seed=3, origin_U=blobs.U)
    w, value = coreset.train(SolverConfig(epochs=10))

    assert value == pytest.approx(coreset.objective(w, 1.0))


# ========================================================= #


def test_csv_files_reload_the_same_coreset(tmp_path, blobs):
    coreset = build_coreset(blobs, CoresetConfig(m_override=30, solver=FAST, xi=0.0))
    path = tmp_path / "core.csv"

    written = coreset.to_csv(path)
    back = Coreset.from_csv(path)

    assert written[1:] == sidecar_paths(str(path))
    assert np.array_equal(back.ids, coreset.ids)
    assert np.array_equal(back.v, coreset.v)
    assert np.array_equal(back.dataset.X, coreset.dataset.X)
    assert back.metadata() == coreset.metadata()


def test_csv_header_is_id_and_weight(tmp_path, blobs):
    path = tmp_path / "core.csv"
    uniform_coreset(blobs, 5, seed=0).to_csv(path)

    assert path.read_text().splitlines()[0] == "id,v"


# ========================================================= #


@pytest.fixture(scope="module")
def epsilon_draws():
    # small lambda keeps t near its floor of two per cluster, so m stays below n
    lam, eps, delta = 0.001, 0.3, 0.2
    ds = gen_blobs(2000, d=5, seed=0)
    table = compute_sensitivities(ds, lam=lam, seed=0)
    m = sample_size(table.t, eps, delta, ds.d, n=ds.n)
    w_star, reference = reference_solve(ds, SolverConfig(epochs=3 * REFERENCE_EPOCHS, lam=lam))

    draws = [importance_sample(ds, table, m, seed=s) for s in range(50)]

    return ds, lam, eps, m, w_star, reference, draws


@pytest.mark.slow
def test_importance_sample_is_an_epsilon_coreset(epsilon_draws):
    ds, lam, eps, m, w_star, _, draws = epsilon_draws
    ctx = ObjectiveContext.for_dataset(ds, lam)
    queries = list(np.random.default_rng(9).normal(0.0, 0.5, size=(20, ds.d + 1)))
    queries.append(w_star)
    truth = np.array([svm_objective(ds, w, ctx) for w in queries])

    def holds(coreset):
        values = np.array([coreset.objective(w, lam) for w in queries])
        return bool(np.all(np.abs(values - truth) <= eps * truth))

    assert m < ds.n
    assert np.mean([holds(c) for c in draws]) >= 0.8


@pytest.mark.slow
def test_training_on_the_coreset_stays_near_the_optimum(epsilon_draws):
    ds, lam, eps, _, _, reference, draws = epsilon_draws
    ctx = ObjectiveContext.for_dataset(ds, lam)
    trained = []

    for coreset in draws:
        w_s, _ = reference_solve(coreset.dataset, SolverConfig(epochs=REFERENCE_EPOCHS, lam=lam), coreset.origin_U)
        trained.append(svm_objective(ds, w_s, ctx))

    trained = np.array(trained)

    # nothing beats the full data optimum, up to the accuracy of the reference run
    assert np.all(trained >= reference * (1 - 1e-2))
    assert np.mean(trained <= (1 + 4 * eps) * reference) >= 0.8
