import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from mmwpl.errors import FitError
from mmwpl.metrics import evaluate
from mmwpl.regression import (RegressionFit, build_design_matrix, feature_contributions, fit_regression, ols_fit, predict,
                              residual_variance, validate_features)
from mmwpl.transfer import DEFAULT_LADDER

from conftest import make_dataset
from oracles import grid_argmin_2d, grid_sse_gap, normal_equations, random_instances


def with_intercept(x):
    x = np.asarray(x, float)
    return np.column_stack([np.ones_like(x), x])


def test_design_matrix_layout():
    ds = make_dataset({"distance": [1, 2, 3], "time_delay": [10, 20, 35], "path_loss": [70, 80, 90]})
    X, y = build_design_matrix(ds, ["distance"], intercept=True)
    assert X.shape == (3, 2)
    assert np.all(X[:, 0] == 1)
    np.testing.assert_array_equal(y, [70, 80, 90])
    X, _ = build_design_matrix(ds, ["distance", "time_delay"], intercept=False)
    np.testing.assert_array_equal(X, [[1, 10], [2, 20], [3, 35]])


def test_unknown_feature_lists_valid_names():
    ds = make_dataset({"distance": [1, 2]})
    with pytest.raises(ValueError, match="valid names: .*rms_delay_spread"):
        build_design_matrix(ds, ["speed"])
    with pytest.raises(ValueError, match="duplicate"):
        validate_features(["distance", "distance"])
    with pytest.raises(ValueError):
        validate_features([])
    with pytest.raises(ValueError):
        validate_features(["path_loss"])


def test_noise_free_line():
    res = ols_fit(with_intercept([0, 1, 2]), [1, 3, 5])
    np.testing.assert_allclose(res.beta, [1, 2], atol=1e-12)


def test_hand_computed_example():
    X = with_intercept([0, 1, 2])
    y = [0, 1, 1]
    res = ols_fit(X, y)
    np.testing.assert_allclose(res.beta, [1 / 6, 1 / 2], atol=1e-12)
    grid_beta, _ = grid_argmin_2d(X, y)
    np.testing.assert_allclose(grid_beta, res.beta, atol=1e-3)


def test_duplicate_column_dropped_same_predictions():
    rng = np.random.default_rng(1)
    x = rng.uniform(1, 40, 30)
    y = 3 + 0.5 * x + rng.normal(size=30)
    X = with_intercept(x)
    base = ols_fit(X, y)
    dup = ols_fit(np.column_stack([X, x]), y)
    assert dup.dropped == (2,)
    np.testing.assert_allclose(np.column_stack([X, x]) @ dup.beta, X @ base.beta, atol=1e-10)


def test_constant_frequency_column_dropped():
    ds = make_dataset({"distance": [1, 5, 10, 20], "path_loss": [60, 70, 80, 89]}, frequency=28.0)
    fit = fit_regression(ds, ["distance", "frequency"])
    assert fit.dropped_features == ("frequency",)
    assert fit.coefficient("frequency") == 0.0


def test_scaled_collinear_column_dropped():
    x = np.arange(1.0, 9.0)
    X = np.column_stack([np.ones(8), x, 1e-6 * x + 2.0])
    res = ols_fit(X, 2 * x)
    assert res.dropped == (2,)


def test_small_scale_column_not_dropped():
    # equilibration keeps legitimately tiny-unit columns
    rng = np.random.default_rng(4)
    x = rng.normal(size=20) * 1e-9
    y = 1 + 1e9 * x
    res = ols_fit(with_intercept(x), y)
    assert res.dropped == ()
    np.testing.assert_allclose(res.beta, [1, 1e9], rtol=1e-9)


def test_underdetermined_and_degenerate_errors():
    with pytest.raises(FitError, match="underdetermined"):
        ols_fit(np.random.default_rng(0).normal(size=(2, 3)), [1, 2])
    with pytest.raises(FitError, match="no usable regressors"):
        ols_fit(np.zeros((4, 2)), [1, 2, 3, 4])
    # a constant column next to an intercept does not count towards k
    X = np.column_stack([np.ones(2), [1.0, 2.0], [5.0, 5.0]])
    assert ols_fit(X, [1, 2]).dropped == (2,)


def test_residual_variance_examples():
    X = with_intercept([0, 1, 2])
    assert residual_variance(X, [1, 3, 5], [1, 2]) == 0
    # residuals [1, -1] with N = 2
    assert residual_variance(np.zeros((2, 1)), [1, -1], [0]) == pytest.approx(2.0)
    with pytest.raises(FitError):
        residual_variance(np.ones((1, 1)), [1], [0])


def test_residual_variance_homogeneity(rng):
    X = rng.normal(size=(10, 2))
    r = rng.normal(size=10)
    c = 3.7
    assert residual_variance(X, c * r, [0, 0]) == pytest.approx(c * c * residual_variance(X, r, [0, 0]), rel=1e-12)


def test_fit_regression_uses_n_minus_one():
    rng = np.random.default_rng(5)
    d = rng.uniform(1, 40, 25)
    pl = 60 + 0.8 * d + rng.normal(size=25)
    fit = fit_regression(make_dataset({"distance": d, "path_loss": pl}), ["distance"])
    r = pl - (fit.intercept + fit.coefficients[0] * d)
    assert fit.residual_variance == pytest.approx(r @ r / 24, rel=1e-12)
    assert fit.n_train == 25


def test_predict_examples():
    fit = RegressionFit(intercept=1.0, coefficients=(2.0,), features=("distance",), residual_variance=0.0,
                        n_train=2, condition_diagnostic=1.0)
    ds = make_dataset({"distance": [3.0, 0.5]})
    np.testing.assert_allclose(predict(fit, ds), [7.0, 2.0])


def test_predict_intercept_only_at_zero():
    fit = RegressionFit(1.0, (2.0,), ("azimuth_aod",), 0.0, 2, 1.0)
    assert predict(fit, make_dataset({"azimuth_aod": [0.0]}))[0] == 1.0


def test_predict_reproduces_noise_free_training():
    rng = np.random.default_rng(8)
    d = rng.uniform(1, 40, 20)
    tau = rng.uniform(5, 150, 20)
    pl = 50 + 0.7 * d - 0.05 * tau
    ds = make_dataset({"distance": d, "time_delay": tau, "path_loss": pl})
    fit = fit_regression(ds, ["distance", "time_delay"])
    np.testing.assert_allclose(predict(fit, ds), pl, rtol=0, atol=1e-9)


def test_normal_equations_agree_on_well_conditioned():
    for X, y in random_instances(30, seed=2):
        np.testing.assert_allclose(ols_fit(X, y).beta, normal_equations(X, y), atol=1e-9)


def test_condition_diagnostic_reported():
    X = with_intercept([1.0, 2.0, 3.0, 4.0])
    res = ols_fit(X, [1, 2, 3, 5])
    assert res.condition >= 1.0 and res.rank == 2


small_design = st.integers(1, 3).flatmap(
    lambda k: st.tuples(st.just(k), st.integers(k + 1, 12)).flatmap(
        lambda kn: st.tuples(
            arrays(float, (kn[1], kn[0]), elements=st.integers(-1000, 1000).map(lambda v: v / 100)),
            arrays(float, (kn[1],), elements=st.integers(-1000, 1000).map(lambda v: v / 100)),
        )
    )
)


@settings(max_examples=60, deadline=None)
@given(small_design)
def test_optimality_against_grid(data):
    X, y = data
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] < 1e-3 * s[0]:
        return  # near-degenerate draws are exercised elsewhere
    beta = ols_fit(X, y).beta
    assert grid_sse_gap(X, y, beta, 1.0, 0.1) >= -1e-9


@settings(max_examples=60, deadline=None)
@given(small_design)
def test_normal_equation_residual(data):
    X, y = data
    s = np.linalg.svd(X, compute_uv=False)
    if s[0] == 0 or s[-1] < 1e-3 * s[0]:
        return
    beta = ols_fit(X, y).beta
    assert np.max(np.abs(X.T @ (y - X @ beta))) <= 1e-7 * max(np.max(np.abs(X.T @ y)), 1e-300) + 1e-12


@settings(max_examples=50, deadline=None)
@given(st.integers(3, 30), st.integers(0, 10_000))
def test_zero_mean_residuals_with_intercept(n, seed):
    rng = np.random.default_rng(seed)
    X = np.column_stack([np.ones(n), rng.uniform(1, 40, n)])
    y = rng.normal(100, 10, n)
    r = y - X @ ols_fit(X, y).beta
    assert abs(r.sum()) <= 1e-8 * np.abs(y).sum()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_permutation_invariance(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 40))
    X = np.column_stack([np.ones(n), rng.uniform(1, 40, n), rng.normal(size=n)])
    y = X @ [60, 0.5, -2] + rng.normal(size=n)
    perm = rng.permutation(n)
    np.testing.assert_allclose(ols_fit(X[perm], y[perm]).beta, ols_fit(X, y).beta, rtol=1e-12, atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000))
def test_nested_training_r2_monotone(seed):
    rng = np.random.default_rng(seed)
    n = 40
    ds = make_dataset({
        "distance": rng.uniform(1, 40, n),
        "time_delay": rng.uniform(5, 200, n),
        "received_power": rng.normal(-80, 10, n),
        "rms_delay_spread": rng.uniform(0, 100, n),
        "azimuth_aod": rng.uniform(0, 360, n),
        "elevation_aod": rng.uniform(-30, 30, n),
        "azimuth_aoa": rng.uniform(0, 360, n),
        "path_loss": rng.normal(100, 10, n),
    })
    r2 = []
    for feats in DEFAULT_LADDER:
        fit = fit_regression(ds, feats)
        r2.append(evaluate(ds.column("path_loss"), predict(fit, ds)).r_square)
    assert all(b >= a - 1e-12 for a, b in zip(r2, r2[1:]))


def test_feature_contributions_sum_to_prediction(rng):
    n = 40
    ds = make_dataset({"distance": rng.uniform(1, 40, n), "time_delay": rng.uniform(5, 200, n),
                       "path_loss": rng.uniform(60, 120, n)})
    fit = fit_regression(ds, ["distance", "time_delay"])
    parts = feature_contributions(fit, ds)
    assert list(parts) == ["distance", "time_delay"]
    np.testing.assert_allclose(fit.intercept + sum(parts.values()), predict(fit, ds), rtol=1e-13)
    np.testing.assert_allclose(parts["distance"], fit.coefficient("distance") * ds.column("distance"))
