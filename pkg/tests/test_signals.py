import inspect

import numpy as np
import pytest

from graphsamp.errors import MissingBasis
from graphsamp.signals import add_noise, gen_bandlimited, noise_variance
from graphsamp.spectral import SpectrumSlice, dense_spectrum


def test_zero_std_gives_constant_coeffs(sw64):
    _, _, sp = sw64
    s = gen_bandlimited(sp, mean=1.7, std=0.0, seed=0)
    np.testing.assert_array_equal(s.coeffs, np.full(8, 1.7))
    np.testing.assert_allclose(s.x, 1.7 * sp.basis.sum(axis=1), atol=1e-14)


def test_default_distribution():
    sig = inspect.signature(gen_bandlimited)
    assert sig.parameters["mean"].default == 1.0 and sig.parameters["std"].default == 0.5


def test_coefficient_statistics():
    V = np.linalg.qr(np.random.default_rng(0).standard_normal((60, 50)))[0]
    sp = SpectrumSlice(50, np.zeros(50), V)
    c = np.concatenate([gen_bandlimited(sp, seed=s).coeffs for s in range(2000)])
    N = c.size
    assert N == 100_000
    assert abs(c.mean() - 1.0) <= 3 * 0.5 / np.sqrt(N)
    assert abs(c.std(ddof=1) - 0.5) <= 3 * 0.5 / np.sqrt(2 * N)


def test_bandlimited_gft(sw64):
    _, L, sp = sw64
    s = gen_bandlimited(sp, seed=9)
    _, V = np.linalg.eigh(L.toarray())
    gft = V.T @ s.x
    np.testing.assert_allclose(sp.basis.T @ s.x, s.coeffs, atol=1e-9)
    assert np.abs(gft[8:]).max() < 1e-9
    assert s.k == 8 and s.power == pytest.approx(np.mean(s.x ** 2))


def test_signal_needs_basis():
    with pytest.raises(MissingBasis):
        gen_bandlimited(SpectrumSlice(2, np.zeros(2)), seed=0)
    with pytest.raises(ValueError):
        gen_bandlimited(SpectrumSlice(1, np.zeros(1), np.ones((1, 1))), std=-1, seed=0)


def test_infinite_snr_is_noiseless():
    x = np.array([1.0, -2.0, 0.5])
    y, s2 = add_noise(x, np.inf, 3.0, seed=0)
    assert s2 == 0.0 and np.array_equal(y, x) and y is not x


def test_zero_db_variance_equals_power():
    assert noise_variance(0.0, 2.5) == 2.5
    assert noise_variance(10.0, 2.5) == pytest.approx(0.25)
    with pytest.raises(ValueError):
        noise_variance(5.0, 0.0)


def test_empirical_noise_variance():
    x = np.zeros(100_000)
    y, s2 = add_noise(x, 3.0, 2.0, seed=42)
    N = x.size
    assert abs(y.var(ddof=1) - s2) <= 3 * s2 * np.sqrt(2 / (N - 1))
    assert abs(y.mean()) <= 3 * np.sqrt(s2 / N)


def test_noise_deterministic():
    a, _ = add_noise(np.ones(5), 0.0, 1.0, seed=np.random.SeedSequence([1, 2]))
    b, _ = add_noise(np.ones(5), 0.0, 1.0, seed=np.random.SeedSequence([1, 2]))
    assert np.array_equal(a, b)
