import numpy as np
import pytest

from graphsamp.errors import DeltaOutOfRange, MissingGamma, NotQualified, ShapeMismatch
from graphsamp.graph import Graph, normalized_laplacian
from graphsamp.reconstruct import (exact_truncated_operator, ls_operator, ls_reconstruct,
                                   mia_operator, mia_reconstruct, mse, predict_ls_mse,
                                   predict_mia_mse_bound, truncation_vector)
from graphsamp.sampling import SamplingSet, deltas, mia_sample, neumann_gamma, random_sample
from graphsamp.signals import gen_bandlimited
from graphsamp.spectral import dense_spectrum, ideal_lowpass_exact, lowpass_filter

from conftest import spectrum_of, weighted_random_graph


def with_gamma(T, indices, L):
    return SamplingSet(tuple(indices), T.shape[0], "fixed", L, None,
                       neumann_gamma(T, indices, L))


@pytest.fixture(scope="module")
def fix64(sw64):
    _, L, sp = sw64
    T = ideal_lowpass_exact(sp)
    s = mia_sample(T, 24, 40, mode="fast")
    return sp, T, s


def test_ls_two_nodes():
    sp = dense_spectrum(normalized_laplacian(Graph.from_edges(2, [(0, 1)])), 1)
    x = np.array([0.7071, 0.7071])
    x_hat = ls_reconstruct(sp, SamplingSet((0,), 2, "x"), [0.7071])
    np.testing.assert_allclose(x_hat, x, atol=1e-12)


def test_ls_full_sampling_projects(sw64):
    _, _, sp = sw64
    x = gen_bandlimited(sp, seed=1).x
    x_hat = ls_reconstruct(sp, SamplingSet(tuple(range(64)), 64, "x"), x)
    np.testing.assert_allclose(x_hat, ideal_lowpass_exact(sp) @ x, atol=1e-12)
    np.testing.assert_allclose(x_hat, x, atol=1e-12)


def test_ls_noiseless_random_qualified(sw64):
    _, _, sp = sw64
    done = 0
    for seed in range(40):
        s = random_sample(64, 8 + seed % 20, seed)
        try:
            R = ls_operator(sp, s)
        except NotQualified:
            continue
        x = gen_bandlimited(sp, seed=seed).x
        assert np.abs(R @ x[list(s.indices)] - x).max() <= 1e-8
        done += 1
    assert done >= 20


def test_ls_errors(sw64):
    _, _, sp = sw64
    with pytest.raises(NotQualified):
        ls_reconstruct(sp, SamplingSet((0, 1), 64, "x"), [1.0, 2.0])
    with pytest.raises(ShapeMismatch):
        ls_reconstruct(sp, random_sample(64, 20, 0), np.ones(19))


def test_mia_exact_filter_matches_ls(fix64):
    sp, T, s = fix64
    x = gen_bandlimited(sp, seed=5).x
    y = x[list(s.indices)]
    rho = deltas(sp, s.indices).max()
    assert rho < 1
    np.testing.assert_allclose(mia_reconstruct(T, s, y), ls_reconstruct(sp, s, y), atol=1e-6)


def test_mia_zero_and_zero_order(fix64):
    sp, T, s = fix64
    np.testing.assert_array_equal(mia_reconstruct(T, s, np.zeros(s.m)), np.zeros(64))
    s0 = with_gamma(T, s.indices, 0)
    y = np.arange(s.m, dtype=float)
    np.testing.assert_allclose(mia_reconstruct(T, s0, y), T[:, list(s.indices)] @ y, atol=1e-13)


def test_mia_linear(fix64):
    sp, T, s = fix64
    rng = np.random.default_rng(3)
    y1, y2 = rng.standard_normal((2, s.m))
    lhs = mia_reconstruct(T, s, 2.5 * y1 - 0.75 * y2)
    rhs = 2.5 * mia_reconstruct(T, s, y1) - 0.75 * mia_reconstruct(T, s, y2)
    assert np.abs(lhs - rhs).max() <= 1e-10


def test_mia_errors(fix64):
    sp, T, s = fix64
    with pytest.raises(MissingGamma):
        mia_reconstruct(T, SamplingSet(s.indices, 64, "x"), np.ones(s.m))
    with pytest.raises(ShapeMismatch):
        mia_reconstruct(T, s, np.ones(s.m + 1))
    with pytest.raises(ShapeMismatch):
        mia_reconstruct(T[:10, :10], s, np.ones(s.m))
    bad = SamplingSet(s.indices, 64, "x", 2, None, np.eye(3))
    with pytest.raises(ShapeMismatch):
        mia_reconstruct(T, bad, np.ones(s.m))


def test_mia_operator_consistent(fix64):
    sp, T, s = fix64
    y = np.linspace(-1, 1, s.m)
    np.testing.assert_allclose(mia_operator(T, s) @ y, mia_reconstruct(T, s, y), atol=1e-12)


def test_mia_converges_to_ls_geometrically(sw64):
    _, _, sp = sw64
    T = ideal_lowpass_exact(sp)
    s = random_sample(64, 14, 4)
    x = gen_bandlimited(sp, seed=2).x
    y = x[list(s.indices)]
    rho = deltas(sp, s.indices).max()
    VS = sp.basis[list(s.indices)]
    c = np.linalg.norm(np.linalg.solve(VS.T @ VS, VS.T @ y))
    x_ls = ls_reconstruct(sp, s, y)
    gaps = []
    for L in (5, 10, 20, 40):
        gap = np.linalg.norm(mia_reconstruct(T, with_gamma(T, s.indices, L), y) - x_ls)
        assert gap <= c * rho ** (L + 1) * (1 + 1e-9) + 1e-12
        gaps.append(gap)
    assert all(b <= a for a, b in zip(gaps, gaps[1:]))


def test_truncation_vector_is_the_gap(sw64):
    _, _, sp = sw64
    T = ideal_lowpass_exact(sp)
    s = random_sample(64, 14, 4)
    x = gen_bandlimited(sp, seed=2).x
    y = x[list(s.indices)]
    t = truncation_vector(sp, s.indices, y, 7)
    gap = ls_reconstruct(sp, s, y) - mia_reconstruct(T, with_gamma(T, s.indices, 7), y)
    np.testing.assert_allclose(t, gap, atol=1e-10)
    np.testing.assert_allclose(exact_truncated_operator(sp, s.indices, 7),
                               mia_operator(T, with_gamma(T, s.indices, 7)), atol=1e-10)


def test_predictors_arithmetic():
    assert predict_ls_mse([0.0], 1.0) == 1.0
    assert predict_ls_mse([0.5, 0.5], 2.0) == pytest.approx(8.0)
    assert predict_mia_mse_bound([0.5], 1.0, 1, 0.0) == pytest.approx(1.125)
    d = [0.1, 0.6, 0.9]
    assert predict_mia_mse_bound(d, 1.3, 2000) == pytest.approx(predict_ls_mse(d, 1.3), rel=1e-12)


def test_predictors_reject_bad_deltas():
    for bad in ([1.0], [-0.1], [0.2, 1.5]):
        with pytest.raises(DeltaOutOfRange):
            predict_ls_mse(bad, 1.0)
        with pytest.raises(DeltaOutOfRange):
            predict_mia_mse_bound(bad, 1.0, 3)
    with pytest.raises(ValueError):
        predict_mia_mse_bound([0.1], 1.0, 3, -1.0)


def test_predictors_permutation_and_monotone():
    d = np.array([0.05, 0.3, 0.7, 0.95])
    rng = np.random.default_rng(0)
    assert predict_ls_mse(rng.permutation(d), 1.0) == pytest.approx(predict_ls_mse(d, 1.0), rel=1e-15)
    s2 = [0.01, 0.1, 1.0, 10.0]
    ls = [predict_ls_mse(d, v) for v in s2]
    mi = [predict_mia_mse_bound(d, v, 10, 0.3) for v in s2]
    assert np.all(np.diff(ls) > 0) and np.all(np.diff(mi) > 0)


def test_ls_monte_carlo_matches_prediction(sw64):
    _, _, sp = sw64
    s = random_sample(64, 20, 7)
    R = ls_operator(sp, s)
    x = gen_bandlimited(sp, seed=0).x
    sigma2 = 0.3
    rng = np.random.default_rng(11)
    noise = np.sqrt(sigma2) * rng.standard_normal((10_000, s.m))
    errs = np.sum((((x[list(s.indices)] + noise) @ R.T) - x) ** 2, axis=1)
    pred = predict_ls_mse(deltas(sp, s.indices), sigma2)
    assert abs(errs.mean() - pred) <= 0.05 * pred


def test_mse_examples():
    x = np.array([1.0, -2.0, 3.0])
    assert mse(x, x) == 0.0
    e1 = np.zeros(3); e1[0] = 1
    assert mse(x + e1, x) == 1.0
    rng = np.random.default_rng(4)
    for _ in range(20):
        a, b = rng.standard_normal((2, 500))
        naive = 0.0
        for u, v in zip(a.tolist(), b.tolist()):
            naive += (u - v) * (u - v)
        assert mse(a, b) == pytest.approx(naive, rel=1e-12)


def test_polynomial_filter_path(sw64):
    _, L, sp = sw64
    T = lowpass_filter(L, sp.lambda_k)
    s = mia_sample(T, 20, 10, mode="fast")
    y = np.ones(20)
    np.testing.assert_allclose(mia_reconstruct(T, s, y),
                               T[:, list(s.indices)] @ neumann_gamma(T, s.indices, 10) @ y)
