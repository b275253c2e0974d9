import numpy as np
import pytest

from gibbs_lab import (
    ValidationError,
    complete_network,
    coupled_step,
    load_network,
    make_ensemble,
    make_noise_stream,
    make_sampler_params,
    mixing_gap_trajectory,
    run_coupled,
    sandwich_run,
)
from gibbs_lab import stats

# Order/contraction diagnostics are exact up to the float lattice of the
# state arithmetic; see the variance-ratio analysis in the test docstrings.
ULP_TOL = 1e-14


def test_make_ensemble_validation():
    with pytest.raises(ValidationError):
        make_ensemble([[0.5, 0.5], [0.4, 0.6]], ordered_pairs=((0, 1),))
    with pytest.raises(ValidationError):
        make_ensemble([[0.5, 0.5]], ordered_pairs=((0, 3),))


def test_identical_walkers_stay_identical():
    n = complete_network(4)
    params = make_sampler_params(n, 10.0)
    ens = make_ensemble([np.full(4, 0.3), np.full(4, 0.3)], ordered_pairs=((0, 1),))
    res = run_coupled(ens, params, 10_000, make_noise_stream(5, 0))
    assert np.array_equal(res.ensemble.positions[0], res.ensemble.positions[1])
    assert res.order_min >= 0.0
    assert res.gap_increase_max <= 0.0


def test_coupled_step_matches_kernel_bitwise(rng):
    n = complete_network(5)
    params = make_sampler_params(n, 30.0)
    starts = [np.zeros(5), rng.random(5) * 0.5 + 0.25, np.ones(5)]
    starts[1].sort()
    ens = make_ensemble(starts)
    stream = make_noise_stream(3, 1)
    ref = ens
    for _ in range(2000):
        ref = coupled_step(ref, params, stream.next_noise(5))
    fast = run_coupled(make_ensemble(starts), params, 2000, make_noise_stream(3, 1))
    assert np.array_equal(ref.positions, fast.ensemble.positions)


def test_endpoint_pair_order_and_unit_gap():
    # extreme starts: the gap starts at 1, stays in [0, 1], never grows
    n = complete_network(4)
    params = make_sampler_params(n, 40.0)
    ens = make_ensemble([np.zeros(4), np.ones(4)], ordered_pairs=((0, 1),))
    res = run_coupled(ens, params, 50_000, make_noise_stream(17, 0))
    assert res.order_min >= -ULP_TOL
    assert res.gap_increase_max <= ULP_TOL
    assert np.all(res.gap_records <= 1.0)
    assert np.all(res.gap_records >= -ULP_TOL)


def test_random_pair_contraction_long_run(rng):
    n = complete_network(4)
    params = make_sampler_params(n, 150.0)
    q = rng.random(4) * 0.85
    p = np.minimum(q + rng.random(4) * 0.1, 1.0)
    ens = make_ensemble([q, p], ordered_pairs=((0, 1),))
    res = run_coupled(ens, params, 100_000, make_noise_stream(23, 0))
    assert res.order_min >= -ULP_TOL
    assert res.gap_increase_max <= ULP_TOL
    final_gap = float(np.max(res.ensemble.positions[1] - res.ensemble.positions[0]))
    assert final_gap <= 0.1 + ULP_TOL


def test_grand_coupling_subset_consistency(rng):
    # joint evolution of four walkers equals any subset on the same stream
    n = complete_network(3)
    params = make_sampler_params(n, 20.0)
    starts = [np.zeros(3), rng.random(3), rng.random(3), np.ones(3)]
    k = 5000
    joint = run_coupled(make_ensemble(starts), params, k, make_noise_stream(8, 2))
    for pick in ((0, 1), (1, 2), (0, 3), (2,)):
        sub = run_coupled(
            make_ensemble([starts[i] for i in pick]), params, k, make_noise_stream(8, 2)
        )
        for slot, idx in enumerate(pick):
            assert np.array_equal(sub.ensemble.positions[slot], joint.ensemble.positions[idx])


def test_sandwich_lower_walkers_coincide_for_zero_start():
    n = complete_network(4)
    params = make_sampler_params(n, 15.0)
    stream = make_noise_stream(4, 0)
    res = run_coupled(
        make_ensemble([np.zeros(4), np.zeros(4), np.ones(4)], ordered_pairs=((0, 1), (1, 2))),
        params, 20_000, stream,
    )
    assert np.array_equal(res.ensemble.positions[0], res.ensemble.positions[1])


def test_sandwich_run_gap_statistics():
    n = complete_network(4)
    params = make_sampler_params(n, 60.0)
    res = sandwich_run(np.full(4, 0.25), params, 40_000, make_noise_stream(13, 0), delta=0.05)
    assert res.order_min >= -ULP_TOL
    assert res.gap_increase_max <= ULP_TOL
    assert res.sup_gap[0] <= 1.0
    assert np.all(np.diff(res.sup_gap) <= ULP_TOL)  # recorded gaps non-increasing


def test_sandwich_t_prime_matches_single_chain():
    # walker 0 of the sandwich is bit-identical to a solo chain on the same
    # stream, so the corner hitting times must agree exactly
    n = complete_network(4)
    params = make_sampler_params(n, 12.0)
    delta = 0.1
    res = sandwich_run(np.full(4, 0.5), params, 200_000, make_noise_stream(99, 0), delta=delta)
    solo = stats.hitting_time_T_prime(params, delta, make_noise_stream(99, 0), k_max=200_000)
    assert not solo.censored and res.t_prime is not None
    assert res.t_prime == solo.time


def test_marginal_correctness_coupled_vs_independent():
    # the 0-started walker coupled with a 1-started one is distributionally
    # a plain chain: compare barycenter mean/variance at a fixed step
    n = complete_network(3)
    params = make_sampler_params(n, 8.0)
    k = 1500
    reps = 400
    coupled_b = np.empty(reps)
    indep_b = np.empty(reps)
    for r in range(reps):
        res = run_coupled(
            make_ensemble([np.zeros(3), np.ones(3)], ordered_pairs=((0, 1),)),
            params, k, make_noise_stream(1000, r),
        )
        coupled_b[r] = res.ensemble.positions[0] @ n.degrees
        from gibbs_lab import ChainState, run

        final = run(ChainState(np.zeros(3)), params, k, make_noise_stream(2000, r))
        indep_b[r] = final.p @ n.degrees
    se = np.hypot(coupled_b.std(ddof=1), indep_b.std(ddof=1)) / np.sqrt(reps)
    assert abs(coupled_b.mean() - indep_b.mean()) <= 3.0 * se
    var_se = np.hypot(coupled_b.var(ddof=1), indep_b.var(ddof=1)) * np.sqrt(2.0 / (reps - 1))
    assert abs(coupled_b.var(ddof=1) - indep_b.var(ddof=1)) <= 3.0 * var_se


def test_barycenter_coupling_monotone(rng):
    n = load_network({"d": 2, "edges": [[0, 1, 1.0]]})
    params = make_sampler_params(n, 5.0)
    q = rng.random(2) * 0.5
    p = q + rng.random(2) * 0.4
    ens = make_ensemble([q, np.minimum(p, 1.0)], ordered_pairs=((0, 1),))
    stream = make_noise_stream(6, 0)
    for _ in range(5000):
        ens = coupled_step(ens, params, stream.next_noise(2))
        b_lo = ens.positions[0] @ n.degrees
        b_hi = ens.positions[1] @ n.degrees
        assert b_hi - b_lo >= -ULP_TOL


def test_mixing_gap_trajectory_contracts():
    n = complete_network(4)
    params = make_sampler_params(n, 25.0)
    res = mixing_gap_trajectory(params, 30_000, replicas=20, seed=5, delta=0.05)
    assert res.order_min >= -ULP_TOL
    assert res.gap_increase_max <= ULP_TOL
    assert np.all(np.diff(res.mean_gap) <= ULP_TOL)
    # at this scale every replica should have delta-coalesced
    assert np.all(res.coalesce_step >= 0)
    assert res.mean_gap[-1] <= res.delta
