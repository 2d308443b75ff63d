import math

import numpy as np
import pytest
from scipy import stats as sps

from geospins.stats import (
    batch_means_se,
    ess_ratio,
    hill_exponent,
    mann_kendall,
    nnls_fit,
)


def test_batch_means_on_iid_series():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(40_000) * 2.0 + 5.0
    mean, se = batch_means_se(x)
    naive = 2.0 / math.sqrt(len(x))
    assert abs(mean - 5.0) < 5 * naive
    assert 0.5 * naive < se < 2.0 * naive


def test_batch_means_inflates_on_correlated_series():
    # AR(1) with strong positive correlation: batch means must report a
    # standard error well above the iid one
    rng = np.random.default_rng(1)
    n, rho = 40_000, 0.95
    eps = rng.standard_normal(n)
    x = np.empty(n)
    x[0] = eps[0]
    for i in range(1, n):
        x[i] = rho * x[i - 1] + eps[i]
    _, se = batch_means_se(x)
    naive = x.std(ddof=1) / math.sqrt(n)
    assert se > 2.5 * naive


def test_batch_means_rejects_empty():
    with pytest.raises(ValueError):
        batch_means_se(np.array([]))


def test_mann_kendall_statistic_matches_kendalltau():
    rng = np.random.default_rng(2)
    x = rng.standard_normal(40)
    res = mann_kendall(x)
    tau = sps.kendalltau(np.arange(len(x)), x).statistic
    assert res.s == round(tau * len(x) * (len(x) - 1) / 2)


def test_mann_kendall_detects_monotone_growth():
    x = np.linspace(0.0, 1.0, 12)
    assert mann_kendall(x).p_increasing < 0.001


def test_mann_kendall_accepts_flat_and_decreasing():
    rng = np.random.default_rng(3)
    noise = rng.standard_normal(12)
    assert mann_kendall(noise).p_increasing > 0.01
    assert mann_kendall(np.linspace(1.0, 0.0, 12)).p_increasing > 0.99
    constant = mann_kendall(np.ones(10))
    assert constant.p_increasing == 1.0


def test_nnls_recovers_nonnegative_coefficients():
    rng = np.random.default_rng(4)
    design = np.abs(rng.standard_normal((30, 3)))
    coef = np.array([1.5, 0.0, 0.7])
    response = design @ coef
    fit = nnls_fit(design, response)
    assert np.allclose(fit.coefficients, coef, atol=1e-8)
    assert fit.r_squared > 1 - 1e-12


def test_nnls_zero_column_gets_zero_coefficient():
    rng = np.random.default_rng(5)
    design = np.abs(rng.standard_normal((20, 3)))
    design[:, 2] = 0.0
    response = design[:, 0] * 2.0
    fit = nnls_fit(design, response)
    assert fit.coefficients[2] == 0.0


def test_hill_exponent_brackets_pareto_index():
    rng = np.random.default_rng(6)
    heavy = (1.0 / rng.random(20_000)) ** (1.0 / 0.8)  # Pareto, index 0.8
    light = (1.0 / rng.random(20_000)) ** (1.0 / 3.0)  # Pareto, index 3
    assert hill_exponent(heavy) < 1.2
    assert 2.0 < hill_exponent(light) < 4.5
    lognormal = np.exp(rng.standard_normal(20_000))
    assert hill_exponent(lognormal) > 1.0


def test_ess_ratio_extremes():
    assert ess_ratio(np.ones(50)) == pytest.approx(50.0)
    one_hot = np.zeros(50)
    one_hot[7] = 3.0
    assert ess_ratio(one_hot) == pytest.approx(1.0)
