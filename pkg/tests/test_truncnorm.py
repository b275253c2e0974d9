import math

import numpy as np
import pytest

from gibbs_lab import DomainError, TruncatedNormal, ValidationError
from gibbs_lab.truncnorm import (
    norm_cdf,
    norm_ppf,
    trunc_cdf,
    trunc_mean,
    trunc_quantile,
    trunc_quantile_raw,
    trunc_variance,
)

SIGMAS = np.concatenate([np.arange(0.005, 1.0001, 0.045), [1.0]])
PS = np.arange(0.0, 1.0001, 0.05)


def test_mean_trivials():
    for sigma in (0.01, 0.3, 2.0, np.inf):
        assert trunc_mean(sigma, 0.5) == pytest.approx(0.0, abs=1e-15)
    # uniform window [-0.3, 0.7] has mean 0.2
    assert trunc_mean(np.inf, 0.3) == pytest.approx(0.2, abs=0)


def test_variance_trivials():
    assert trunc_variance(np.inf, 0.4) == pytest.approx(1.0 / 12.0, abs=0)
    # 50 scales from both walls: truncation is invisible
    assert trunc_variance(0.01, 0.5) == pytest.approx(1e-4, abs=1e-8)


def test_antisymmetry_grid():
    for sigma in SIGMAS:
        for p in PS:
            assert abs(trunc_mean(sigma, p) + trunc_mean(sigma, 1.0 - p)) <= 1e-12
            assert abs(trunc_variance(sigma, p) - trunc_variance(sigma, 1.0 - p)) <= 1e-12


def test_mean_bound_grid():
    # 0 <= mean <= 2 sigma exp(-p^2 / 2 sigma^2) for p left of center
    for sigma in np.arange(0.005, 1.0001, 0.005):
        for p in np.arange(0.0, 0.5001, 0.01):
            m = trunc_mean(sigma, p)
            assert m >= -1e-15
            assert m <= 2.0 * sigma * math.exp(-p * p / (2.0 * sigma * sigma)) + 1e-12


def test_variance_and_second_moment_bounds(rho):
    for sigma in SIGMAS:
        for p in PS:
            v = trunc_variance(sigma, p)
            assert 0.0 < v <= sigma * sigma + 1e-15
            if sigma <= 1.0:
                assert v >= rho * sigma * sigma - 1e-9
            m = trunc_mean(sigma, p)
            assert v + m * m <= 5.0 * sigma * sigma + 1e-12


def test_cdf_trivials():
    for sigma in (0.05, 0.5, 3.0):
        assert trunc_cdf(sigma, 0.5, 0.5) == pytest.approx(0.5, abs=1e-14)
    t = TruncatedNormal(np.inf, 0.7)
    for x in (0.0, 0.25, 1.0):
        assert t.cdf(x) == x
    with pytest.raises(DomainError):
        t.cdf(1.5)


def test_cdf_monotone(rng):
    for _ in range(200):
        sigma = 10.0 ** rng.uniform(-3, 0.5)
        p = rng.random()
        xs = np.sort(rng.random(50))
        vals = [trunc_cdf(sigma, p, x) for x in xs]
        assert np.all(np.diff(vals) >= 0.0)


def test_quantile_trivials():
    assert trunc_quantile(0.2, 0.5, 0.5) == pytest.approx(0.5, abs=1e-12)
    t = TruncatedNormal(np.inf, 0.123)
    for u in (0.0, 0.25, 0.77, 1.0):
        assert t.quantile(u) == u
    # endpoints map to the walls
    for sigma, p in ((0.1, 0.3), (0.02, 0.0), (1.0, 0.99)):
        assert trunc_quantile(sigma, p, 0.0) == pytest.approx(0.0, abs=1e-12)
        assert trunc_quantile(sigma, p, 1.0) == pytest.approx(1.0, abs=1e-12)


def test_quantile_monotone_in_u(rng):
    for _ in range(200):
        sigma = 10.0 ** rng.uniform(-3, 0.5)
        p = rng.random()
        us = np.sort(rng.random(50))
        vals = [trunc_quantile(sigma, p, u) for u in us]
        assert np.all(np.diff(vals) >= 0.0)


def test_round_trip_quantile_cdf(rng):
    for _ in range(500):
        sigma = 10.0 ** rng.uniform(-3, 0.5)
        p = rng.random()
        u = rng.uniform(1e-6, 1.0 - 1e-6)
        x = trunc_quantile(sigma, p, u)
        if 0.0 < x < 1.0:
            assert abs(trunc_cdf(sigma, p, x) - u) <= 1e-9


def test_coupling_lipschitz_grid(rng):
    # shared-noise order and 1-Lipschitz bound, exact, across delta scales
    for delta in (1e-3, 0.1, 0.5):
        for _ in range(800):
            sigma = 10.0 ** rng.uniform(-3, 0.5)
            q = rng.random()
            p = min(q + rng.random() * delta, 1.0)
            while p - q > delta:
                p = np.nextafter(p, q)
            u = rng.random()
            gap = trunc_quantile(sigma, p, u) - trunc_quantile(sigma, q, u)
            assert 0.0 <= gap <= delta


def test_sample_is_deterministic_quantile():
    t = TruncatedNormal(0.07, 0.42)
    assert t.sample(0.314159) == t.sample(0.314159) == t.quantile(0.314159)


def test_ufuncs_match_scalars(rng):
    from gibbs_lab.truncnorm import trunc_mean_v, trunc_quantile_v

    sigma, p = 0.13, 0.81
    us = rng.random(1000)
    vec = trunc_quantile_v(sigma, p, us)
    assert np.array_equal(vec, [trunc_quantile(sigma, p, u) for u in us])
    assert trunc_mean_v(sigma, p) == trunc_mean(sigma, p)


def test_monte_carlo_mean_matches_analytic():
    from gibbs_lab.truncnorm import trunc_quantile_v

    # low-discrepancy uniforms: midpoint grid over (0, 1)
    n = 1_000_000
    us = (np.arange(n) + 0.5) / n
    for sigma, p in ((0.1, 0.2), (0.4, 0.85), (1.0, 0.0)):
        draws = trunc_quantile_v(sigma, p, us) - p
        se = draws.std(ddof=1) / np.sqrt(n)
        assert abs(draws.mean() - trunc_mean(sigma, p)) <= 3.0 * se


def test_clamp_magnitude_tiny(rng):
    # the raw (unclamped) quantile never strays measurably outside [0, 1]
    for _ in range(2000):
        sigma = 10.0 ** rng.uniform(-3, 0.5)
        p = rng.random()
        u = rng.uniform(1e-6, 1.0 - 1e-6)
        raw = trunc_quantile_raw(sigma, p, u)
        assert -1e-12 < raw < 1.0 + 1e-12


def test_norm_ppf_round_trip():
    import scipy.special as sp

    us = np.concatenate([
        10.0 ** np.arange(-300.0, -0.9, 3.0),
        np.linspace(1e-4, 1.0 - 1e-4, 801),
        1.0 - 10.0 ** np.arange(-16.0, -4.0, 1.0),
    ])
    for u in us:
        x = norm_ppf(float(u))
        assert abs(norm_cdf(x) - u) <= 1e-14
        # independent CDF: relative accuracy holds into the far tail
        ref = sp.ndtr(x)
        assert abs(ref - u) <= 1e-12 * max(u, 1e-300) + 1e-15


def test_against_scipy_truncnorm(rng):
    from scipy import stats as sps

    for _ in range(300):
        sigma = 10.0 ** rng.uniform(-3, 0.5)
        p = rng.random()
        a, b = -p / sigma, (1.0 - p) / sigma
        u = rng.uniform(1e-9, 1.0 - 1e-9)
        ours = trunc_quantile(sigma, p, u)
        ref = sps.truncnorm.ppf(u, a, b, loc=p, scale=sigma)
        assert abs(ours - ref) <= 5e-11
        assert abs(trunc_mean(sigma, p) - sigma * sps.truncnorm.mean(a, b)) <= 1e-11
        assert abs(trunc_variance(sigma, p) - sigma ** 2 * sps.truncnorm.var(a, b)) <= 1e-11


def test_validation():
    with pytest.raises(ValidationError):
        TruncatedNormal(0.0, 0.5)
    with pytest.raises(ValidationError):
        TruncatedNormal(-1.0, 0.5)
    with pytest.raises(ValidationError):
        TruncatedNormal(1.0, 1.5)
    with pytest.raises(DomainError):
        TruncatedNormal(1.0, 0.5).quantile(-0.1)
