import numpy as np
import pytest

from gibbs_lab import (
    FeasibilityError,
    ValidationError,
    complete_network,
    load_network,
    make_noise_stream,
    spectral_summary,
)
from gibbs_lab import oracle
from gibbs_lab.network import random_connected_network
from gibbs_lab.truncnorm import trunc_cdf, trunc_mean, trunc_quantile, trunc_variance


def edge2():
    return load_network({"d": 2, "edges": [[0, 1, 1.0]]})


def test_quad_moments_symmetric_center():
    mean, var = oracle.quad_moments(0.2, 0.5)
    assert abs(mean) < 1e-12
    assert 0.0 < var < 0.04


def test_quad_moments_near_uniform_limit():
    # very wide noise: variance approaches the uniform value
    _, var = oracle.quad_moments(10.0, 0.3)
    assert abs(var - 1.0 / 12.0) < 1e-3


def test_quad_agrees_with_analytic(rng):
    for _ in range(150):
        sigma = 10.0 ** rng.uniform(-2.3, 0.5)
        p = rng.random()
        mean, var = oracle.quad_moments(sigma, p)
        assert abs(mean - trunc_mean(sigma, p)) <= 1e-9
        assert abs(var - trunc_variance(sigma, p)) <= 1e-9


def test_quad_cdf_and_bisection_quantile(rng):
    for _ in range(25):
        sigma = 10.0 ** rng.uniform(-1.5, 0.0)
        p = rng.random()
        u = rng.uniform(1e-5, 1.0 - 1e-5)
        x = oracle.quantile_by_bisection(sigma, p, u)
        assert abs(trunc_quantile(sigma, p, u) - x) <= 1e-9
        assert abs(oracle.quad_cdf(sigma, p, x) - trunc_cdf(sigma, p, x)) <= 1e-12


def test_estimate_rho_basic(rho):
    assert 0.0 < rho < 1.0
    # far from both walls the truncation is invisible
    mean, var = oracle.quad_moments(0.01, 0.5)
    assert abs(var / 1e-4 - 1.0) < 1e-10
    # the floor sits well below the interior ratio
    assert rho < 0.5


def test_estimate_rho_stable_under_refinement():
    a = oracle.estimate_rho(grid=40, refinements=1)
    b = oracle.estimate_rho(grid=80, refinements=2)
    assert abs(a.value - b.value) / b.value < 1e-3
    assert b.resolution < a.resolution


def test_rejection_A_zero_is_uniform():
    res = oracle.rejection_sample_stationary(edge2(), 0.0, 20_000, make_noise_stream(1, 0))
    assert res.acceptance_rate == 1.0
    assert abs(res.samples.mean() - 0.5) < 0.01
    assert np.all(res.energies >= 0.0)


def test_rejection_small_A_barycenter():
    res = oracle.rejection_sample_stationary(edge2(), 3.0, 50_000, make_noise_stream(2, 0))
    se = res.barycenters.std(ddof=1) / np.sqrt(len(res.barycenters))
    assert abs(res.barycenters.mean() - 0.5) <= 3.0 * se
    # absolute deviation matches the quadrature of the barycenter marginal
    ref = oracle.edge2_barycenter_abs_moment(3.0)
    dev = np.abs(res.barycenters - 0.5)
    se_dev = dev.std(ddof=1) / np.sqrt(len(dev))
    assert abs(dev.mean() - ref) <= 3.0 * se_dev


def test_rejection_energy_distribution_matches_quadrature():
    from scipy import stats as sps

    res = oracle.rejection_sample_stationary(edge2(), 3.0, 100_000, make_noise_stream(3, 0))
    ks = sps.ks_1samp(res.energies, lambda v: oracle.edge2_energy_cdf(3.0, v))
    assert ks.statistic <= 0.01


def test_rejection_feasibility_refusal():
    with pytest.raises(FeasibilityError):
        oracle.rejection_sample_stationary(edge2(), 1e6, 1000, make_noise_stream(4, 0))


def test_rejection_validation():
    with pytest.raises(ValidationError):
        oracle.rejection_sample_stationary(edge2(), -1.0, 10, make_noise_stream(0, 0))


def test_eigencheck_edge2():
    evals = oracle.small_d_eigencheck(edge2())
    assert np.allclose(evals, [0.0, 2.0], atol=1e-12)


def test_eigencheck_complete_closed_forms():
    evals = oracle.small_d_eigencheck(complete_network(3))
    assert np.allclose(evals, [0.0, 1.5, 1.5], atol=1e-10)
    evals = oracle.small_d_eigencheck(complete_network(4))
    assert np.allclose(evals, [0.0, 4.0 / 3.0, 4.0 / 3.0, 4.0 / 3.0], atol=1e-10)


def test_eigencheck_matches_jacobi_random(rng):
    for _ in range(30):
        d = int(rng.integers(2, 5))
        n = random_connected_network(rng, d)
        closed = oracle.small_d_eigencheck(n)
        swept = spectral_summary(n).eigenvalues
        assert np.max(np.abs(closed - swept)) < 1e-8


def test_edge2_band_mass_decreases():
    masses = [oracle.edge2_barycenter_band_mass(24.0, s) for s in (0.2, 0.3, 0.4)]
    assert masses == sorted(masses, reverse=True)
    assert 0.0 <= masses[-1] <= masses[0] <= 1.0
