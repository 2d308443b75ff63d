import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from geospins.point_process import (
    Configuration,
    ProcessSpec,
    SamplingError,
    Window,
    estimate_correlation,
    sample_many,
    sample_matern_hardcore,
    sample_poisson,
)

UNIT_SQUARE = Window((0.0, 0.0), (1.0, 1.0))


# ---------------------------------------------------------------------------
# windows and configurations


def test_window_defaults_origin_to_center():
    w = Window((0.0, 2.0), (4.0, 6.0))
    assert w.origin == (2.0, 4.0)
    assert w.volume == 16.0


def test_window_rejects_bad_corners():
    with pytest.raises(SamplingError):
        Window((0.0, 0.0), (1.0, 0.0))  # zero extent on one axis
    with pytest.raises(SamplingError):
        Window((0.0,), (1.0, 1.0))
    with pytest.raises(SamplingError):
        Window((0.0, 0.0), (1.0, 1.0), origin=(2.0, 0.5))


def test_configuration_rejects_duplicates_and_outsiders():
    with pytest.raises(SamplingError):
        Configuration(UNIT_SQUARE, np.array([[0.5, 0.5], [0.5, 0.5]]))
    with pytest.raises(SamplingError):
        Configuration(UNIT_SQUARE, np.array([[1.5, 0.5]]))


# ---------------------------------------------------------------------------
# poisson sampler


def test_poisson_deterministic_given_seed():
    a = sample_poisson(UNIT_SQUARE, 5.0, seed=42)
    b = sample_poisson(UNIT_SQUARE, 5.0, seed=42)
    assert a == b


def test_poisson_rejects_bad_intensity():
    with pytest.raises(SamplingError):
        sample_poisson(UNIT_SQUARE, 0.0, seed=1)
    with pytest.raises(SamplingError):
        sample_poisson(UNIT_SQUARE, -2.0, seed=1)


def test_poisson_mean_count_unit_square():
    # mean count over draws must match z * Vol = 1 within 3 standard errors
    draws = 10_000
    counts = [sample_poisson(UNIT_SQUARE, 1.0, seed=s).n_points for s in range(draws)]
    counts = np.asarray(counts, dtype=float)
    se = counts.std(ddof=1) / math.sqrt(draws)
    assert abs(counts.mean() - 1.0) < 3 * se


def test_poisson_empty_probability_closed_form():
    # independent oracle: P(N = 0) = exp(-z Vol), evaluated directly
    z = 0.1
    window = Window((0.0,), (1.0,))
    draws = 20_000
    empty = np.asarray(
        [sample_poisson(window, z, seed=s).n_points == 0 for s in range(draws)]
    )
    p_hat = empty.mean()
    p_true = math.exp(-z)  # 0.9048374180359595
    se = math.sqrt(p_true * (1 - p_true) / draws)
    assert abs(p_hat - p_true) < 3 * se


def test_poisson_count_chisquare_goodness_of_fit():
    # counts in a volume-4 window vs the reference pmf at significance 0.01
    window = Window((0.0, 0.0), (2.0, 2.0))
    z = 1.0
    draws = 10_000
    counts = np.asarray(
        [sample_poisson(window, z, seed=s).n_points for s in range(draws)]
    )
    mean = z * window.volume
    kmax = int(sps.poisson.ppf(0.9999, mean))
    observed = np.bincount(np.minimum(counts, kmax + 1), minlength=kmax + 2)
    probs = np.append(sps.poisson.pmf(np.arange(kmax + 1), mean), 0.0)
    probs[-1] = 1.0 - probs[:-1].sum()
    # pool the tail so every expected bin count is >= 5
    keep = probs * draws >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(probs[keep], probs[~keep].sum()) * draws
    result = sps.chisquare(obs, exp)
    assert result.pvalue > 0.01


def test_poisson_disjoint_regions_independent():
    window = Window((0.0, 0.0), (2.0, 1.0))
    draws = 4000
    left = np.empty(draws)
    right = np.empty(draws)
    for s in range(draws):
        pts = sample_poisson(window, 2.0, seed=s).points
        in_left = pts[:, 0] <= 1.0
        left[s] = in_left.sum()
        right[s] = (~in_left).sum()
    prod = (left - left.mean()) * (right - right.mean())
    se = prod.std(ddof=1) / math.sqrt(draws)
    assert abs(prod.mean()) < 3 * se


@settings(max_examples=25, deadline=None)
@given(
    seed=st.integers(min_value=0, max_value=2**32 - 1),
    z=st.floats(min_value=0.1, max_value=20.0),
)
def test_poisson_points_stay_in_window(seed, z):
    cfg = sample_poisson(Window((-1.0, 2.0), (0.5, 4.0)), z, seed=seed)
    assert np.all(cfg.window.contains(cfg.points)) or cfg.n_points == 0


# ---------------------------------------------------------------------------
# matern hardcore sampler


def test_matern_min_distance_exceeds_hardcore():
    window = Window((0.0, 0.0), (5.0, 5.0))
    d = 0.4
    for seed in range(20):
        cfg = sample_matern_hardcore(window, 2.0, d, seed=seed)
        if cfg.n_points < 2:
            continue
        diff = cfg.points[:, None, :] - cfg.points[None, :, :]
        sq = (diff * diff).sum(axis=2)
        np.fill_diagonal(sq, np.inf)
        assert sq.min() > d * d


def test_matern_rejects_zero_hardcore():
    with pytest.raises(SamplingError):
        sample_matern_hardcore(UNIT_SQUARE, 1.0, 0.0, seed=1)


def test_matern_tiny_hardcore_keeps_almost_everything():
    window = Window((0.0, 0.0), (5.0, 5.0))
    kept = total = 0
    for seed in range(50):
        kept += sample_matern_hardcore(window, 1.0, 0.01, seed=seed).n_points
        total += window.volume  # expected proposals per draw = z * Vol
    assert kept / total > 0.99


def test_matern_retention_matches_mark_ordering_enumeration():
    # Oracle derived by enumerating the neighbor count: a proposal with k
    # proposals inside its hardcore ball survives with probability 1/(k+1)
    # (uniform mark ranks), and k is Poisson(z * pi * d^2) for interior
    # points, so retention = sum_k pmf(k) / (k + 1).
    z, d = 1.0, 0.5
    lam = z * math.pi * d * d
    retention = sum(
        math.exp(-lam) * lam**k / math.factorial(k) / (k + 1) for k in range(80)
    )
    window = Window((0.0, 0.0), (12.0, 12.0))
    interior_lo, interior_hi = d, 12.0 - d
    interior_area = (interior_hi - interior_lo) ** 2
    draws = 400
    counts = np.empty(draws)
    for s in range(draws):
        pts = sample_matern_hardcore(window, z, d, seed=s).points
        inside = np.all((pts >= interior_lo) & (pts <= interior_hi), axis=1)
        counts[s] = inside.sum()
    expected = retention * z * interior_area
    se = counts.std(ddof=1) / math.sqrt(draws)
    assert abs(counts.mean() - expected) < 3 * se


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(min_value=0, max_value=2**32 - 1))
def test_matern_deterministic(seed):
    window = Window((0.0, 0.0), (3.0, 3.0))
    assert sample_matern_hardcore(window, 1.5, 0.3, seed=seed) == sample_matern_hardcore(
        window, 1.5, 0.3, seed=seed
    )


# ---------------------------------------------------------------------------
# correlation estimation


def test_correlation_k1_poisson_recovers_intensity():
    window = Window((0.0, 0.0), (4.0, 4.0))
    z = 2.0
    samples = sample_many(ProcessSpec("poisson", z), window, 3000, seed=11)
    est = estimate_correlation(samples, 1, cell_size=1.0)
    assert est.grid_shape == (4, 4)
    # the pooled estimate and every cell agree with the flat intensity
    assert abs(est.pooled - z) < 3 * est.pooled_se
    assert np.all(np.abs(est.estimates - z) < 3 * est.standard_errors)
    assert est.sup_estimate == est.estimates.max()


def test_correlation_k2_poisson_recovers_intensity_squared():
    window = Window((0.0, 0.0), (4.0, 4.0))
    z = 2.0
    samples = sample_many(ProcessSpec("poisson", z), window, 3000, seed=12)
    est = estimate_correlation(samples, 2, cell_size=1.0)
    assert abs(est.pooled - z * z) < 3 * est.pooled_se
    off = ~np.eye(est.n_cells, dtype=bool)
    zscores = (est.estimates[off] - z * z) / est.standard_errors[off]
    assert np.abs(zscores).max() < 5.0
    diag = np.diag(est.estimates)
    diag_se = np.diag(est.standard_errors)
    assert abs(diag.mean() - z * z) < 3 * diag_se.mean()


def test_correlation_concentrates_on_deterministic_input():
    window = Window((0.0, 0.0), (2.0, 2.0))
    pts = np.array([[0.5, 0.5]])
    samples = [Configuration(window, pts, provenance=f"fixed{i}") for i in range(5)]
    est = estimate_correlation(samples, 1, cell_size=1.0)
    expected = np.zeros(4)
    expected[np.ravel_multi_index((0, 0), (2, 2))] = 1.0
    assert np.array_equal(est.estimates, expected)


def test_correlation_estimator_input_errors():
    with pytest.raises(SamplingError):
        estimate_correlation([], 1, 1.0)
    w1 = Window((0.0, 0.0), (2.0, 2.0))
    w2 = Window((0.0, 0.0), (3.0, 3.0))
    mixed = [sample_poisson(w1, 1.0, 1), sample_poisson(w2, 1.0, 2)]
    with pytest.raises(SamplingError):
        estimate_correlation(mixed, 1, 1.0)
    ok = [sample_poisson(w1, 1.0, 1)]
    with pytest.raises(SamplingError):
        estimate_correlation(ok, 3, 1.0)
    with pytest.raises(SamplingError):
        estimate_correlation(ok, 1, 5.0)  # cell larger than the window


def test_correlation_clipped_cells_have_reduced_volume():
    window = Window((0.0, 0.0), (2.5, 2.0))
    samples = sample_many(ProcessSpec("poisson", 1.0), window, 50, seed=4)
    est = estimate_correlation(samples, 1, cell_size=1.0)
    assert est.grid_shape == (3, 2)
    vols = est.cell_volumes.reshape(3, 2)
    assert np.allclose(vols[:2], 1.0)
    assert np.allclose(vols[2], 0.5)
