import numpy as np
import pytest
from scipy import integrate

from graphsamp.errors import DimensionCap, InvalidCutoff, MissingBasis, NotConverged
from graphsamp.graph import Graph, gen_small_world, normalized_laplacian
from graphsamp.spectral import (SpectrumSlice, apply_filter_dense, chebyshev_fit,
                                dense_spectrum, ideal_lowpass_exact, lanczos_lambda_k,
                                lowpass_filter, sigmoid_step)

from conftest import complete, cycle, path, weighted_random_graph


def test_dense_path_matches_characteristic_polynomial():
    L = normalized_laplacian(path(3)).toarray()
    roots = np.sort(np.roots(np.poly(L)).real)
    sp = dense_spectrum(normalized_laplacian(path(3)), 3)
    np.testing.assert_allclose(sp.lambdas, roots, atol=1e-10)
    np.testing.assert_allclose(sp.lambdas, [0, 1, 2], atol=1e-12)


def test_dense_cycle_circulant():
    sp = dense_spectrum(normalized_laplacian(cycle(4)), 2)
    circ = np.sort(1 - np.cos(2 * np.pi * np.arange(4) / 4))
    assert sp.lambda_k == pytest.approx(circ[1], abs=1e-12) and sp.lambda_k == pytest.approx(1.0)


def test_dense_null_vector_and_residuals():
    g = weighted_random_graph(50, 2)
    L = normalized_laplacian(g)
    sp = dense_spectrum(L, 10)
    v1 = np.sqrt(g.degrees())
    v1 /= np.linalg.norm(v1)
    assert abs(sp.lambdas[0]) < 1e-12
    assert abs(abs(sp.basis[:, 0] @ v1) - 1) < 1e-10
    res = np.linalg.norm(L @ sp.basis - sp.basis * sp.lambdas, axis=0)
    assert res.max() <= 1e-8
    np.testing.assert_allclose(sp.basis.T @ sp.basis, np.eye(10), atol=1e-8)
    assert np.all(np.diff(sp.lambdas) >= 0)


def test_dense_cap_and_k_range():
    L = normalized_laplacian(cycle(10))
    with pytest.raises(DimensionCap):
        dense_spectrum(L, 2, cap=5)
    with pytest.raises(ValueError):
        dense_spectrum(L, 11)


def test_lanczos_small_exact():
    L = normalized_laplacian(path(3))
    assert lanczos_lambda_k(L, 2, m_steps=3) == pytest.approx(1.0, abs=1e-12)


def test_lanczos_first_eigenvalue_zero(sw200):
    _, L = sw200
    assert abs(lanczos_lambda_k(L, 1, seed=4)) < 1e-8


def test_lanczos_full_size_graph():
    L = normalized_laplacian(gen_small_world(1000, 8, 0.1, 0))
    ref = dense_spectrum(L, 50).lambda_k
    assert abs(lanczos_lambda_k(L, 50, seed=1) - ref) <= 1e-6


def test_lanczos_degenerate_spectrum_breakdown():
    # K_10: eigenvalue 10/9 with multiplicity 9, so the Krylov space is invariant
    # after two steps and the iteration must restart
    L = normalized_laplacian(complete(10))
    for k in (2, 5, 10):
        assert lanczos_lambda_k(L, k, m_steps=10) == pytest.approx(10 / 9, abs=1e-10)


def test_lanczos_step_cap():
    L = normalized_laplacian(gen_small_world(400, 6, 0.1, 2))
    with pytest.raises(NotConverged):
        lanczos_lambda_k(L, 60, m_steps=61, tol=1e-300, max_steps=80)


def test_lanczos_single_shot_is_ritz_value(sw200):
    _, L = sw200
    rough = lanczos_lambda_k(L, 20, m_steps=25, converge=False, seed=0)
    # Ritz values interlace from above for the k-th smallest
    assert rough >= dense_spectrum(L, 20).lambda_k - 1e-12


def test_lanczos_preconditions():
    L = normalized_laplacian(cycle(10))
    with pytest.raises(ValueError):
        lanczos_lambda_k(L, 5, m_steps=5)
    with pytest.raises(ValueError):
        lanczos_lambda_k(L, 11)


def test_ideal_full_basis_is_identity():
    sp = dense_spectrum(normalized_laplacian(cycle(6)), 6)
    np.testing.assert_allclose(ideal_lowpass_exact(sp), np.eye(6), atol=1e-12)


def test_ideal_two_nodes():
    sp = dense_spectrum(normalized_laplacian(Graph.from_edges(2, [(0, 1)])), 1)
    np.testing.assert_allclose(ideal_lowpass_exact(sp), [[0.5, 0.5], [0.5, 0.5]], atol=1e-12)


def test_ideal_projector_identities(sw200):
    _, L = sw200
    T = ideal_lowpass_exact(dense_spectrum(L, 20))
    assert np.abs(T - T.T).max() <= 1e-9
    assert np.abs(T @ T - T).max() <= 1e-8
    assert np.trace(T) == pytest.approx(20, abs=1e-6)
    w = np.linalg.eigvalsh(T)
    assert np.all(np.minimum(np.abs(w), np.abs(w - 1)) <= 1e-6)


def test_ideal_missing_basis():
    with pytest.raises(MissingBasis):
        ideal_lowpass_exact(SpectrumSlice(2, np.array([0.0, 1.0])))


def test_fit_unit_cutoff():
    f = chebyshev_fit(1.0, 25, 30.0, 2.0)
    assert abs(f(0.0) - 1) <= 0.05
    assert abs(f(2.0)) <= 0.05
    assert abs(f(1.0) - 0.5) <= 0.05


@pytest.mark.parametrize("cut", [0.1, 0.4, 0.7, 1.0, 1.3, 1.6, 1.9])
def test_fit_endpoint_invariants(cut):
    f = chebyshev_fit(cut, 25, 30.0)
    assert 0.9 <= f(0.0) <= 1.1
    assert -0.1 <= f(2.0) <= 0.1


def test_fit_error_nonincreasing_in_order():
    assert chebyshev_fit(1.0, 40).max_error() <= chebyshev_fit(1.0, 10).max_error()


def test_fit_coefficients_match_quadrature():
    f = chebyshev_fit(0.7, 12, 30.0)
    g = lambda t: sigmoid_step(np.cos(t) + 1.0, 0.7, 30.0)
    for j in range(13):
        cj, _ = integrate.quad(lambda t: g(t) * np.cos(j * t), 0, np.pi, limit=200)
        cj *= (1 if j == 0 else 2) / np.pi
        assert f.coeffs[j] == pytest.approx(cj, abs=1e-10)


def test_fit_deterministic_and_errors():
    a, b = chebyshev_fit(0.5), chebyshev_fit(0.5)
    assert np.array_equal(a.coeffs, b.coeffs)
    for bad in (0.0, 2.0, -1.0):
        with pytest.raises(InvalidCutoff):
            chebyshev_fit(bad)
    with pytest.raises(ValueError):
        chebyshev_fit(1.0, p=0)
    with pytest.raises(ValueError):
        chebyshev_fit(1.0, alpha=0)


def test_sigmoid_is_logistic():
    lam = np.linspace(0, 2, 50)
    np.testing.assert_allclose(sigmoid_step(lam, 0.8, 30), 1 / (1 + np.exp(30 * (lam - 0.8))),
                               rtol=1e-13, atol=1e-15)


def test_filter_functional_calculus(sw200):
    _, L = sw200
    f = chebyshev_fit(0.4, 25, 30.0)
    T = apply_filter_dense(f, L)
    w, V = np.linalg.eigh(L.toarray())
    diag = np.einsum("ij,ij->j", V, T @ V)
    np.testing.assert_allclose(diag, f(w), atol=1e-10)
    np.testing.assert_allclose(np.linalg.eigvalsh(T), np.sort(f(w)), atol=1e-9)
    assert np.abs(T - T.T).max() <= 1e-9


def test_filter_matches_monomial_sum():
    g = weighted_random_graph(25, 8)
    L = normalized_laplacian(g)
    f = chebyshev_fit(0.9, 8, 10.0)
    mono = np.polynomial.chebyshev.cheb2poly(f.coeffs)
    # chebyshev variable x = L - I for lambda_max = 2
    X = L.toarray() - np.eye(25)
    ref = sum(c * np.linalg.matrix_power(X, j) for j, c in enumerate(mono))
    np.testing.assert_allclose(apply_filter_dense(f, L), ref, atol=1e-10)


def test_filter_close_to_ideal_away_from_cutoff(sw200):
    _, L = sw200
    w, V = np.linalg.eigh(L.toarray())
    lam_k = w[19]
    Tp = lowpass_filter(L, lam_k, 25, 30.0)
    Te = V[:, :20] @ V[:, :20].T
    keep = V[:, np.abs(w - lam_k) >= 0.05]
    P = keep @ keep.T
    assert np.abs(P @ (Tp - Te) @ P).max() <= 0.1


def test_filter_dimension_cap():
    with pytest.raises(DimensionCap):
        apply_filter_dense(chebyshev_fit(1.0), normalized_laplacian(cycle(10)), cap=4)
