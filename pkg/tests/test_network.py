import json

import numpy as np
import pytest

from gibbs_lab import (
    DimensionError,
    DisconnectedError,
    IsolatedVertexError,
    ValidationError,
    ZeroNetworkError,
    complete_network,
    connected_components,
    cycle_network,
    dirichlet_energy,
    laplacian_apply,
    load_network,
    one_step_average,
    path_network,
    random_connected_network,
    spectral_summary,
    two_blocks_network,
    weighted_inner,
)
from gibbs_lab.network import barycenter, dirichlet_energy_pairwise, symmetrized_laplacian


def test_single_edge_scale_invariance():
    n = load_network({"d": 2, "edges": [[0, 1, 7.0]]})
    assert n.weights[0, 1] == pytest.approx(0.5, abs=0)
    assert np.allclose(n.degrees, [0.5, 0.5])
    assert n.connected


def test_complete4_normalization():
    n = complete_network(4)
    assert np.allclose(n.degrees, 0.25, atol=1e-15)
    # d*(d-1) equal ordered entries summing to one
    assert n.weights[0, 1] == pytest.approx(1.0 / 12.0, abs=1e-15)
    assert abs(n.degrees.sum() - 1.0) < 1e-12


def test_path3_normalization():
    n = path_network(3)
    assert np.allclose(n.degrees, [0.25, 0.5, 0.25], atol=1e-15)


def test_duplicate_edges_summed():
    a = load_network({"d": 3, "edges": [[0, 1, 1.0], [0, 1, 1.0], [1, 2, 2.0]]})
    b = load_network({"d": 3, "edges": [[0, 1, 2.0], [1, 2, 2.0]]})
    assert np.array_equal(a.weights, b.weights)


def test_load_from_files(tmp_path):
    doc = {"d": 3, "edges": [[0, 1, 1.0], [1, 2, 3.0]]}
    jpath = tmp_path / "net.json"
    jpath.write_text(json.dumps(doc))
    tpath = tmp_path / "net.txt"
    tpath.write_text("0 1 1.0\n1 2 3.0\n")
    a = load_network(jpath)
    b = load_network(tpath)
    assert np.array_equal(a.weights, b.weights)
    assert a.d == 3


def test_validation_errors():
    with pytest.raises(ValidationError):
        load_network(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    with pytest.raises(ValidationError):
        load_network(np.array([[0.0, 1.0], [2.0, 0.0]]))  # asymmetric
    with pytest.raises(ZeroNetworkError):
        load_network(np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        load_network(np.zeros((1, 1)))
    with pytest.raises(ValidationError):
        load_network(np.array([[1.0, 1.0], [1.0, 0.0]]))  # self-loop
    with pytest.raises(ValidationError):
        load_network({"d": 2, "edges": [[0, 2, 1.0]]})  # out of range


def test_one_step_average_fixes_constants():
    n = complete_network(5)
    p = np.full(5, 0.37)
    assert np.allclose(one_step_average(n, p), p, atol=1e-15)


def test_one_step_average_single_edge_swaps():
    n = load_network({"d": 2, "edges": [[0, 1, 1.0]]})
    assert np.allclose(one_step_average(n, [0.2, 0.9]), [0.9, 0.2], atol=0)


def test_one_step_average_path3():
    n = path_network(3)
    assert np.allclose(one_step_average(n, [0.0, 1.0, 0.0]), [1.0, 0.0, 1.0], atol=0)


def test_isolated_vertex_rejected():
    n = load_network({"d": 3, "edges": [[0, 1, 1.0]]})
    assert not n.connected
    with pytest.raises(IsolatedVertexError):
        one_step_average(n, [0.1, 0.2, 0.3])


def test_laplacian_kernel_and_example():
    n = load_network({"d": 2, "edges": [[0, 1, 1.0]]})
    assert np.allclose(laplacian_apply(n, [0.5, 0.5]), 0.0, atol=0)
    assert np.allclose(laplacian_apply(n, [1.0, 0.0]), [1.0, -1.0], atol=0)


def test_laplacian_self_adjoint(rng):
    for net in (complete_network(4), path_network(5), random_connected_network(rng, 7)):
        for _ in range(1000):
            p = rng.random(net.d)
            q = rng.random(net.d)
            lhs = weighted_inner(net, laplacian_apply(net, p), q)
            rhs = weighted_inner(net, p, laplacian_apply(net, q))
            assert abs(lhs - rhs) <= 1e-12


def test_weighted_inner():
    n = load_network({"d": 2, "edges": [[0, 1, 1.0]]})
    assert weighted_inner(n, np.ones(2), np.ones(2)) == pytest.approx(1.0, abs=1e-15)
    assert weighted_inner(n, [1.0, 0.0], [1.0, 0.0]) == pytest.approx(0.5, abs=1e-15)
    with pytest.raises(DimensionError):
        weighted_inner(n, [1.0, 0.0, 0.0], [1.0, 0.0])


def test_barycenter_is_inner_with_ones(rng):
    n = path_network(3)
    p = rng.random(3)
    assert barycenter(n, p) == pytest.approx(weighted_inner(n, p, np.ones(3)), abs=1e-15)
    assert barycenter(n, [0.0, 1.0, 0.0]) == pytest.approx(0.5, abs=1e-15)


def test_dirichlet_energy_forms_agree(rng):
    n = load_network({"d": 2, "edges": [[0, 1, 1.0]]})
    assert dirichlet_energy(n, [1.0, 0.0]) == pytest.approx(0.5, abs=1e-12)
    assert dirichlet_energy(n, [0.3, 0.3]) == pytest.approx(0.0, abs=1e-15)
    for net in (complete_network(6), random_connected_network(rng, 9)):
        for _ in range(50):
            p = rng.random(net.d)
            assert dirichlet_energy(net, p) == pytest.approx(
                dirichlet_energy_pairwise(net, p), abs=1e-12
            )


def test_spectral_complete_closed_form():
    for d in range(2, 17):
        s = spectral_summary(complete_network(d))
        assert abs(s.lam - d / (d - 1)) < 1e-10
        assert abs(s.gamma - 1 / (d - 1)) < 1e-10
        assert s.beta == pytest.approx(1.0 / d, abs=1e-15)


def test_spectral_small_examples():
    s = spectral_summary(load_network({"d": 2, "edges": [[0, 1, 1.0]]}))
    assert np.allclose(s.eigenvalues, [0.0, 2.0], atol=1e-12)
    assert s.lam == pytest.approx(2.0, abs=1e-12)
    assert s.gamma == pytest.approx(1.0, abs=1e-12)
    assert s.beta == pytest.approx(0.5, abs=0)

    s = spectral_summary(path_network(3))
    assert np.allclose(s.eigenvalues, [0.0, 1.0, 2.0], atol=1e-12)
    assert s.beta == pytest.approx(0.25, abs=0)


def test_spectral_eigenvalue_range(rng):
    for d in (2, 3, 5, 9, 16):
        s = spectral_summary(random_connected_network(rng, d))
        assert abs(s.eigenvalues[0]) <= 1e-10
        assert np.all(s.eigenvalues >= -1e-10)
        assert np.all(s.eigenvalues <= 2.0 + 1e-10)
        assert s.lam > 0
        assert s.beta <= s.gamma + 1e-12


def test_spectral_disconnected_raises():
    n = load_network({"d": 4, "edges": [[0, 1, 1.0], [2, 3, 1.0]]})
    with pytest.raises(DisconnectedError):
        spectral_summary(n)


def test_spectral_matches_lapack(rng):
    # independent cross-check of the Jacobi sweep against LAPACK
    for d in (2, 3, 4, 8, 16, 64):
        n = random_connected_network(rng, d)
        ours = spectral_summary(n).eigenvalues
        ref = np.linalg.eigvalsh(symmetrized_laplacian(n))
        assert np.max(np.abs(ours - ref)) < 1e-10


def test_spectral_bounds_random_vectors(rng):
    for net in (complete_network(4), path_network(6), random_connected_network(rng, 8)):
        s = spectral_summary(net)
        ones = np.ones(net.d)
        for _ in range(200):
            p = rng.standard_normal(net.d)
            p_perp = p - weighted_inner(net, p, ones) * ones
            e = dirichlet_energy(net, p_perp)
            assert e >= s.lam * weighted_inner(net, p_perp, p_perp) - 1e-10
            ph = one_step_average(net, p_perp)
            assert weighted_inner(net, ph, ph) <= s.gamma ** 2 * weighted_inner(net, p_perp, p_perp) + 1e-10
            lap = laplacian_apply(net, p)
            assert weighted_inner(net, lap, lap) >= s.lam * weighted_inner(net, p, lap) - 1e-10


def test_degree_bounded_by_gamma(rng):
    for d in range(2, 9):
        for _ in range(10):
            net = random_connected_network(rng, d)
            s = spectral_summary(net)
            assert float(np.max(net.degrees)) <= s.gamma + 1e-12


def test_components_two_disjoint_edges():
    n = load_network({"d": 4, "edges": [[0, 1, 3.0], [2, 3, 1.0]]})
    comps, isolated = connected_components(n)
    assert isolated == []
    assert [c.vertices for c in comps] == [(0, 1), (2, 3)]
    assert comps[0].weight_fraction == pytest.approx(0.75, abs=1e-15)
    assert comps[1].weight_fraction == pytest.approx(0.25, abs=1e-15)
    for c in comps:
        assert abs(c.network.degrees.sum() - 1.0) < 1e-12
        assert c.network.connected


def test_components_edge_plus_isolated():
    n = load_network({"d": 3, "edges": [[0, 1, 2.0]]})
    comps, isolated = connected_components(n)
    assert len(comps) == 1 and comps[0].vertices == (0, 1)
    assert isolated == [2]
    assert comps[0].weight_fraction == pytest.approx(1.0, abs=1e-15)


def test_connected_single_component():
    comps, isolated = connected_components(complete_network(5))
    assert len(comps) == 1 and isolated == []
    assert comps[0].weight_fraction == pytest.approx(1.0, abs=1e-15)


def test_two_blocks_normalization():
    eps = 1e-6
    n = two_blocks_network(eps)
    assert abs(n.degrees.sum() - 1.0) < 1e-12
    assert n.weights[0, 1] == pytest.approx(0.25 - 2 * eps, abs=1e-15)
    assert n.weights[0, 2] == pytest.approx(eps, abs=1e-18)
    assert n.connected


def test_cycle_spectrum_formula():
    d = 8
    s = spectral_summary(cycle_network(d))
    expected = np.sort([1.0 - np.cos(2.0 * np.pi * k / d) for k in range(d)])
    assert np.max(np.abs(s.eigenvalues - expected)) < 1e-10
