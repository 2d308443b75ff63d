import math

import numpy as np
import pytest

from geospins.geometric_graph import build_graph
from geospins.local_gibbs import (
    DiscreteKernel,
    KernelSpec,
    QuadratureGrid,
    SamplerConfig,
    SimulationError,
    detailed_balance_check,
    dlr_consistency_check,
    mcmc_sample,
    quadrature_kernel,
)
from geospins.point_process import Configuration, Window
from geospins.spin_model import (
    ModelError,
    ModelParams,
    PairPotential,
    SinglePotential,
    SpinField,
)
from geospins.stats import batch_means_se

WINDOW = Window((-2.0, -2.0), (2.0, 2.0))


def chain_spec(n_sites, coupling=0.2, q=4.0, spacing=0.8, xi_values=None, extra=()):
    """Path of n_sites points spaced along the x axis, radius-1 interaction."""
    xs = (np.arange(n_sites) - (n_sites - 1) / 2.0) * spacing
    pts = np.column_stack([xs, np.zeros(n_sites)])
    if len(extra):
        pts = np.vstack([pts, np.asarray(extra)])
    cfg = Configuration(WINDOW, pts)
    pair = PairPotential.ferromagnetic(coupling, radius=1.0)
    single = SinglePotential(coefficient=1.0, exponent=q)
    model = ModelParams(pair=pair, single=single, alpha=1.0, p=3.0, order=6)
    graph = build_graph(cfg, 1.0)
    if xi_values is None:
        xi_values = np.zeros((len(pts), 1))
    xi = SpinField(cfg, xi_values)
    return KernelSpec(
        configuration=cfg,
        graph=graph,
        volume=np.arange(n_sites),
        boundary=xi,
        model=model,
    )


def reference_moment(power, q=4.0, half_width=6.0, n=40_001):
    """Independent 1d oracle: plain trapezoid of u^power exp(-|u|^q)."""
    u = np.linspace(-half_width, half_width, n)
    w = np.exp(-np.abs(u) ** q)
    return np.trapezoid(u**power * w, u) / np.trapezoid(w, u)


# ---------------------------------------------------------------------------
# sampler vs oracles


def test_gaussian_single_site_variance():
    # q = 2 fails validation; admitted here as an exactly solvable oracle
    spec = chain_spec(1, coupling=0.0, q=2.0)
    cfg = SamplerConfig(burn_in=1000, retained=40_000, seed=7)
    with pytest.raises(SimulationError):
        mcmc_sample(spec, cfg)
    run = mcmc_sample(spec, cfg, allow_unvalidated=True)
    series = run.samples[:, 0, 0] ** 2
    mean, se = batch_means_se(series)
    assert abs(mean - 0.5) < 3 * se


def test_quartic_single_site_second_moment():
    spec = chain_spec(1, coupling=0.0, q=4.0)
    run = mcmc_sample(spec, SamplerConfig(burn_in=1000, retained=40_000, seed=8))
    mean, se = batch_means_se(run.samples[:, 0, 0] ** 2)
    assert abs(mean - reference_moment(2)) < 3 * se


def test_two_site_correlation_sign_and_value():
    spec = chain_spec(2, coupling=0.2)
    kernel = quadrature_kernel(spec, QuadratureGrid(3.0, 201))
    target = kernel.expectation(lambda a, b: a * b)
    assert target > 0  # alignment-favoring coupling
    run = mcmc_sample(spec, SamplerConfig(burn_in=2000, retained=120_000, seed=9))
    series = run.samples[:, 0, 0] * run.samples[:, 1, 0]
    mean, se = batch_means_se(series)
    assert abs(mean - target) < 3 * se


def test_sampler_is_deterministic_and_thinning_counts():
    spec = chain_spec(2)
    cfg = SamplerConfig(burn_in=100, retained=1000, thinning=10, seed=5)
    a = mcmc_sample(spec, cfg)
    b = mcmc_sample(spec, cfg)
    assert np.array_equal(a.samples, b.samples)
    assert a.n_kept == 100
    assert np.array_equal(a.scale_history, b.scale_history)


def test_adaptation_happens_only_during_burn_in():
    spec = chain_spec(2)
    short = mcmc_sample(spec, SamplerConfig(burn_in=500, retained=100, adapt_window=50, seed=6))
    long = mcmc_sample(spec, SamplerConfig(burn_in=500, retained=5000, adapt_window=50, seed=6))
    assert len(short.scale_history) == 1 + 500 // 50
    # frozen scale does not depend on the retained budget
    assert short.proposal_scale == long.proposal_scale
    assert short.proposal_scale == short.scale_history[-1]
    assert 0.1 < short.acceptance_rate < 0.6


def test_initial_state_is_boundary_restriction():
    xi_vals = np.array([[0.3], [-0.7]])
    spec = chain_spec(2, xi_values=xi_vals)
    run = mcmc_sample(spec, SamplerConfig(burn_in=0, retained=1, proposal_scale=1e-12, seed=1))
    # with a vanishing proposal scale the first sweep cannot move far
    assert np.allclose(run.samples[0], xi_vals, atol=1e-9)


def test_sampler_boundary_locality_bit_exact():
    # a far point's boundary value is never read: same stream, same samples
    far = [(1.9, 1.9)]
    xi_a = np.zeros((3, 1))
    xi_b = np.zeros((3, 1))
    xi_b[2, 0] = 123.0
    spec_a = chain_spec(2, xi_values=xi_a, extra=far)
    spec_b = chain_spec(2, xi_values=xi_b, extra=far)
    cfg = SamplerConfig(burn_in=200, retained=500, seed=11)
    assert np.array_equal(mcmc_sample(spec_a, cfg).samples, mcmc_sample(spec_b, cfg).samples)


def test_empty_volume_is_a_point_mass():
    spec = chain_spec(2)
    empty = KernelSpec(
        configuration=spec.configuration,
        graph=spec.graph,
        volume=np.array([], dtype=np.int64),
        boundary=spec.boundary,
        model=spec.model,
    )
    run = mcmc_sample(empty, SamplerConfig(burn_in=10, retained=20, seed=0))
    assert run.samples.shape == (20, 0, 1)
    assert math.isnan(run.acceptance_rate)


def test_full_fields_merges_boundary():
    xi_vals = np.array([[0.0], [0.0], [2.5]])
    spec = chain_spec(2, xi_values=xi_vals, extra=[(1.9, 1.9)])
    run = mcmc_sample(spec, SamplerConfig(burn_in=50, retained=10, seed=2))
    fields = run.full_fields(spec.boundary)
    assert fields.shape == (10, 3, 1)
    assert np.all(fields[:, 2, 0] == 2.5)
    assert np.array_equal(fields[:, :2, :], run.samples)


# ---------------------------------------------------------------------------
# quadrature kernel


def test_quadrature_weights_sum_to_one():
    kernel = quadrature_kernel(chain_spec(3), QuadratureGrid(3.0, 61))
    assert kernel.weights.shape == (61, 61, 61)
    assert math.isclose(kernel.weights.sum(), 1.0, rel_tol=1e-12)


def test_quadrature_factorizes_without_interaction():
    kernel = quadrature_kernel(chain_spec(2, coupling=0.0), QuadratureGrid(3.0, 101))
    m0, m1 = kernel.marginal(0), kernel.marginal(1)
    assert np.allclose(kernel.weights, np.outer(m0, m1), atol=1e-15)


def test_quadrature_symmetric_density_has_zero_mean():
    kernel = quadrature_kernel(chain_spec(2, coupling=0.2), QuadratureGrid(3.0, 101))
    assert abs(kernel.expectation(lambda a, b: a)) < 1e-14
    assert abs(kernel.expectation(lambda a, b: b)) < 1e-14


def test_quadrature_size_and_dimension_guards():
    with pytest.raises(ModelError):
        quadrature_kernel(chain_spec(4, spacing=0.5), QuadratureGrid(3.0, 31))
    spec = chain_spec(2)
    with pytest.raises(ModelError):
        quadrature_kernel(spec, QuadratureGrid(0.8, 31))  # truncation check fails
    pair2 = PairPotential.ferromagnetic(0.1, radius=1.0, spin_dim=2)
    model2 = ModelParams(
        pair=pair2,
        single=SinglePotential(coefficient=1.0, exponent=4.0),
        alpha=1.0,
        p=3.0,
        order=6,
    )
    cfgn = spec.configuration
    spec2 = KernelSpec(
        configuration=cfgn,
        graph=spec.graph,
        volume=np.arange(2),
        boundary=SpinField(cfgn, np.zeros((cfgn.n_points, 2))),
        model=model2,
    )
    with pytest.raises(ModelError):
        quadrature_kernel(spec2, QuadratureGrid(3.0, 31))


def test_quadrature_grid_validation():
    with pytest.raises(ModelError):
        QuadratureGrid(3.0, 100)  # even
    with pytest.raises(ModelError):
        QuadratureGrid(-1.0, 101)


def test_quadrature_against_independent_trapezoid():
    kernel = quadrature_kernel(chain_spec(1, coupling=0.0), QuadratureGrid(4.0, 801))
    got = kernel.expectation(lambda u: u**2)
    want = reference_moment(2, half_width=4.0)
    assert math.isclose(got, want, rel_tol=1e-10)


# ---------------------------------------------------------------------------
# DLR consistency


OBSERVABLES = {
    "u": lambda u: u,
    "u2": lambda u: u**2,
    "tanh_u": lambda u: np.tanh(u),
}


def test_dlr_projection_when_volumes_coincide():
    spec = chain_spec(2)
    report = dlr_consistency_check(spec, np.arange(2), QuadratureGrid(3.0, 61),
                                   {"u2_sum": lambda a, b: a**2 + b**2})
    assert report.max_residual < 1e-13


def test_dlr_without_interaction_is_exact():
    spec = chain_spec(3, coupling=0.0)
    report = dlr_consistency_check(spec, np.array([1]), QuadratureGrid(3.0, 61), OBSERVABLES)
    assert report.max_residual < 1e-13


def test_dlr_three_site_chain_small_residual():
    spec = chain_spec(3, coupling=0.2, spacing=0.9)
    report = dlr_consistency_check(spec, np.array([1]), QuadratureGrid(3.0, 201), OBSERVABLES)
    assert report.max_residual < 1e-6
    assert set(report.residuals) == set(OBSERVABLES)


def test_dlr_with_nonzero_boundary():
    xi_vals = np.full((3, 1), 0.4)
    spec = chain_spec(3, coupling=0.2, spacing=0.9, xi_values=xi_vals)
    report = dlr_consistency_check(spec, np.array([1]), QuadratureGrid(3.0, 101), OBSERVABLES)
    assert report.max_residual < 1e-12


def test_dlr_rejects_non_subset():
    spec = chain_spec(2)
    with pytest.raises(ModelError):
        dlr_consistency_check(spec, np.array([5]), QuadratureGrid(3.0, 31), OBSERVABLES)


def test_quadrature_boundary_locality_bit_exact():
    far = [(1.9, 1.9)]
    xi_a = np.zeros((4, 1))
    xi_b = np.zeros((4, 1))
    xi_b[3, 0] = -55.0
    a = quadrature_kernel(chain_spec(3, xi_values=xi_a, extra=far), QuadratureGrid(3.0, 41))
    b = quadrature_kernel(chain_spec(3, xi_values=xi_b, extra=far), QuadratureGrid(3.0, 41))
    assert np.array_equal(a.weights, b.weights)


# ---------------------------------------------------------------------------
# detailed balance


def test_detailed_balance_quartic_target():
    report = detailed_balance_check(
        SinglePotential(coefficient=1.0, exponent=4.0), QuadratureGrid(3.0, 101), 0.8
    )
    assert report.balance_violation < 1e-12
    assert report.stationarity_residual < 1e-10
    assert report.row_sum_error < 1e-12
    assert np.all(report.transition_matrix >= 0)


def test_detailed_balance_uniform_target_is_symmetric():
    grid = QuadratureGrid(2.0, 51)
    report = detailed_balance_check(np.zeros(51), grid, 0.5)
    assert np.array_equal(report.transition_matrix, report.transition_matrix.T)


def test_detailed_balance_arbitrary_positive_target():
    grid = QuadratureGrid(2.0, 81)
    rng = np.random.default_rng(3)
    logw = rng.standard_normal(81)
    report = detailed_balance_check(logw, grid, 0.7)
    assert report.balance_violation < 1e-12
    assert report.stationarity_residual < 1e-10
