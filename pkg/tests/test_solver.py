import logging

import numpy as np
import pytest

from svmcoreset.data import WeightedDataset
from svmcoreset.datagen import gen_blobs
from svmcoreset.objective import ObjectiveContext, svm_objective
from svmcoreset.solver import (
    OPT_TILDE_FLOOR,
    REFERENCE_EPOCHS,
    SolverConfig,
    approx_svm,
    estimate_xi,
    long_objective,
    opt_tilde,
    opt_tilde_clamped,
    reference_solve,
)


def test_config_validation():
    with pytest.raises(ValueError, match="epochs"):
        SolverConfig(epochs=0)

    with pytest.raises(ValueError, match="lambda"):
        SolverConfig(lam=2.0)

    assert SolverConfig(epochs=7).replace(lam=0.5).as_dict()["epochs"] == 7


def test_sgd_is_deterministic_under_seed(blobs):
    cfg = SolverConfig(epochs=20, seed=4)

    w1, f1 = approx_svm(blobs, cfg)
    w2, f2 = approx_svm(blobs, cfg)

    assert w1 == w2
    assert f1 == f2


def test_sgd_does_not_depend_on_row_order(blobs):
    cfg = SolverConfig(epochs=10, seed=2)
    shuffled = blobs.subset(np.random.default_rng(0).permutation(blobs.n))

    assert approx_svm(blobs, cfg)[0] == approx_svm(shuffled, cfg)[0]


def test_returned_objective_matches_the_hyperplane(blobs):
    w, value = approx_svm(blobs, SolverConfig(epochs=10, lam=0.5))
    ctx = ObjectiveContext.for_dataset(blobs, 0.5)

    assert value == pytest.approx(svm_objective(blobs, w, ctx))
    assert value <= 0.5 * blobs.U


def test_lands_near_the_reference_on_separated_blobs():
    ds = gen_blobs(100, d=2, separation=10.0, seed=0)

    _, reference = reference_solve(ds, SolverConfig(epochs=REFERENCE_EPOCHS))
    _, approx = approx_svm(ds, SolverConfig(epochs=200, seed=0, refine_epochs=8000))

    assert approx <= 1.05 * reference


def test_refinement_never_hurts(blobs):
    cfg = SolverConfig(epochs=5, seed=3, refine_epochs=0)

    _, sgd_only = approx_svm(blobs, cfg)
    _, refined = approx_svm(blobs, cfg.replace(refine_epochs=300))

    assert refined <= sgd_only
    assert cfg.refine_iterations == 0
    assert SolverConfig(epochs=7).refine_iterations == 7

    with pytest.raises(ValueError, match="refine_epochs"):
        SolverConfig(refine_epochs=-1)


def test_origin_normalization_changes_the_regularizer(blobs):
    half = blobs.subset(np.arange(0, blobs.n, 2))
    half = half.reweighted(half.u * 2.0)
    w, value = approx_svm(half, SolverConfig(epochs=10), u_norm=blobs.U)

    assert value == pytest.approx(svm_objective(half, w, ObjectiveContext(1.0, blobs.U)))


def test_empty_and_zero_weight_inputs_are_rejected(tiny):
    with pytest.raises(ValueError, match="empty"):
        approx_svm(WeightedDataset(np.zeros((0, 3)), []), SolverConfig())

    with pytest.raises(ValueError, match="weights"):
        reference_solve(tiny.reweighted(np.zeros(tiny.n)), SolverConfig(epochs=5))


def test_single_label_is_allowed_with_a_warning(tiny, caplog):
    with caplog.at_level(logging.WARNING):
        _, value = reference_solve(tiny.subset([0, 1, 2]), SolverConfig(epochs=200))

    assert "single label" in caplog.text
    assert value < 0.1


def test_opt_tilde_subtracts_xi():
    assert opt_tilde(5.0, 1.0) == 4.0
    assert not opt_tilde_clamped(5.0, 1.0)


def test_opt_tilde_is_floored(caplog):
    with caplog.at_level(logging.WARNING):
        value = opt_tilde(2.0, 3.0)

    assert value == OPT_TILDE_FLOOR * 2.0
    assert opt_tilde_clamped(2.0, 3.0)
    assert "clamped" in caplog.text


def test_opt_tilde_rejects_negative_xi():
    with pytest.raises(ValueError):
        opt_tilde(1.0, -0.1)


def test_xi_estimate_is_non_negative(blobs):
    xi = estimate_xi(blobs, SolverConfig(epochs=20, seed=1))

    assert xi >= 0.0


def test_xi_compares_against_a_long_run_on_the_same_data(blobs):
    cfg = SolverConfig(epochs=10, seed=1)
    _, f_approx = approx_svm(blobs, cfg)
    long = long_objective(blobs, cfg)

    assert estimate_xi(blobs, cfg) == pytest.approx(max(0.0, f_approx - long))
    assert estimate_xi(blobs, cfg, f_approx=f_approx + 1.0) == pytest.approx(f_approx + 1.0 - long)
    # the long run is a feasible point, so the estimate leaves a positive optimum
    assert f_approx - estimate_xi(blobs, cfg) == pytest.approx(min(f_approx, long))
    assert long > 0.0


def test_reference_matches_the_one_dimensional_optimum():
    # x = +1 labeled +1 and x = -1 labeled -1: optimum w = 1, b = 0, F = 1/2
    ds = WeightedDataset([[1.0, 1.0], [-1.0, 1.0]], [1, -1])

    w, value = reference_solve(ds, SolverConfig(epochs=2000))

    assert value == pytest.approx(0.5, abs=5e-3)
    assert w.normal[0] == pytest.approx(1.0, abs=0.05)


def test_single_point_never_exceeds_the_zero_query():
    ds = WeightedDataset([[0.0, 1.0]], [1])

    _, value = approx_svm(ds, SolverConfig(epochs=5))

    assert value <= 1.0
