"""Estimators, MSE aggregation, and the quadrature moment oracle."""
import numpy as np
import pytest

from recycling_gibbs.core import GibbsConfig, RngStream
from recycling_gibbs.estimators import (Estimate, GroundTruth, mse_over_runs,
                                        quadrature_moments, recycled_estimate,
                                        standard_estimate)
from recycling_gibbs.gibbs import run_mrg, run_sg
from recycling_gibbs.kernels import RandomWalkKernel
from recycling_gibbs.targets import (BimodalTarget, DonutTarget, GaussianChainTarget)

# Frozen oracle values, computed by midpoint quadrature on the documented
# bounds with 1200 points per axis.
DONUT_STD_1 = 2.2360679775010057
DONUT_STD_2 = 7.0710678118649923


def test_recycled_equals_standard_when_nothing_is_recycled():
    """M=1: every intermediate is a chain state, so the estimators agree."""
    target = GaussianChainTarget()
    config = GibbsConfig(sweeps=50, inner_samples=1)
    store = run_mrg(target, RandomWalkKernel(2.0), config, RngStream(19, 0))
    sg = run_sg(target, RandomWalkKernel(2.0), config, RngStream(19, 0))
    rec = recycled_estimate(store, lambda x: x[:, 0] ** 2)
    # the recycled store holds T*D vectors against the chain's T states, so
    # compare against the matching per-coordinate-update view of the chain
    assembled = store.assembled()
    std = standard_estimate(assembled, lambda x: x[:, 0] ** 2)
    assert rec.values == pytest.approx(std.values)
    assert rec.sample_count == 100
    # and the chain itself is the second half of each sweep's assembled pair
    np.testing.assert_array_equal(assembled[1::2], sg.chain)


def test_estimate_validation_and_labels():
    est = Estimate(values=np.array([1.0, 2.0]), labels=("a", "b"), sample_count=10)
    assert est.values.shape == (2,)
    with pytest.raises(ValueError):
        Estimate(values=np.array([1.0, 2.0]), labels=("a",), sample_count=10)
    with pytest.raises(ValueError):
        GroundTruth(values=np.array([1.0]), labels=("a", "b"), source="analytic")


def test_estimator_default_labels_and_shapes():
    target = GaussianChainTarget()
    store = run_mrg(target, RandomWalkKernel(2.0), GibbsConfig(sweeps=10, inner_samples=2),
                    RngStream(3, 0))
    est = recycled_estimate(store, lambda x: np.column_stack([x[:, 0], x[:, 0] * x[:, 1]]))
    assert est.labels == ("f_1", "f_2")
    assert est.sample_count == 40
    named = recycled_estimate(store, lambda x: x[:, 0], labels=["m1"])
    assert named.labels == ("m1",)
    with pytest.raises(ValueError):
        recycled_estimate(store, lambda x: x[:3, 0])


def test_standard_estimate_burn_in():
    chain = np.arange(10, dtype=float)[:, None]
    est = standard_estimate(chain, lambda x: x[:, 0], burn_in=5)
    assert est.values[0] == pytest.approx(7.0)
    with pytest.raises(ValueError):
        standard_estimate(chain, lambda x: x[:, 0], burn_in=10)
    with pytest.raises(ValueError):
        standard_estimate(np.arange(4.0), lambda x: x)


def test_mse_hand_examples():
    truth = np.array([1.0, 2.0])
    assert mse_over_runs([np.array([1.1, 2.1])], truth) == pytest.approx(0.01)
    runs = [np.array([1.1, 2.1]), np.array([0.7, 1.7])]
    assert mse_over_runs(runs, truth) == pytest.approx((0.01 + 0.09) / 2)
    with pytest.raises(ValueError):
        mse_over_runs([], truth)
    with pytest.raises(ValueError):
        mse_over_runs([np.array([1.0])], truth)


def test_mse_label_mismatch():
    est = Estimate(values=np.array([1.0]), labels=("mean_1",), sample_count=5)
    truth = GroundTruth(values=np.array([1.0]), labels=("mean_2",), source="analytic")
    with pytest.raises(ValueError):
        mse_over_runs([est], truth)
    good = GroundTruth(values=np.array([1.0]), labels=("mean_1",), source="analytic")
    assert mse_over_runs([est], good) == 0.0


def test_quadrature_gaussian_chain():
    target = GaussianChainTarget()
    oracle = quadrature_moments(target, n=800)
    np.testing.assert_allclose(oracle.mean, [0.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(oracle.cov, target.covariance, atol=1e-3)


def test_quadrature_bimodal_mean():
    oracle = quadrature_moments(BimodalTarget(), n=800)
    np.testing.assert_allclose(oracle.mean, [0.0, 1.0], atol=1e-3)


def test_quadrature_donut_frozen_values():
    oracle = quadrature_moments(DonutTarget(), n=1200)
    assert oracle.std[0] == pytest.approx(DONUT_STD_1, abs=1e-12)
    assert oracle.std[1] == pytest.approx(DONUT_STD_2, abs=1e-12)
    assert oracle.boundary_mass <= 1e-6


def test_quadrature_converges_with_grid_refinement():
    coarse = quadrature_moments(DonutTarget(), n=600)
    fine = quadrature_moments(DonutTarget(), n=1200)
    assert abs(coarse.std[0] - fine.std[0]) < 1e-4
    assert abs(coarse.std[1] - fine.std[1]) < 1e-4


def test_quadrature_boundary_guard():
    with pytest.raises(ValueError):
        quadrature_moments(DonutTarget(), bounds=((-3, 3), (-3, 3)), n=200)
    with pytest.raises(ValueError):
        quadrature_moments(GaussianChainTarget(), bounds=((1, 1), (-8, 8)), n=200)
    with pytest.raises(ValueError):
        quadrature_moments(GaussianChainTarget(), n=4)
