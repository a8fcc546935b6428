"""Bandlimited signal synthesis and additive white Gaussian noise."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectrumSlice


@dataclass(frozen=True, eq=False)
class BandlimitedSignal:
    """Graph signal ``x = V_K @ coeffs`` together with its K GFT coefficients."""
    x: np.ndarray = field(repr=False)
    k: int
    coeffs: np.ndarray = field(repr=False)

    @property
    def power(self) -> float:
        """Mean squared entry of the full signal."""
        return float(np.mean(self.x ** 2))


def gen_bandlimited(basis: SpectrumSlice, mean: float = 1.0, std: float = 0.5,
                    seed=None) -> BandlimitedSignal:
    """Draw iid ``Normal(mean, std^2)`` GFT coefficients on the first K modes."""
    V = basis.require_basis()
    if std < 0:
        raise ValueError("std must be non-negative")
    rng = np.random.default_rng(seed)
    coeffs = mean + std * rng.standard_normal(V.shape[1])
    return BandlimitedSignal(V @ coeffs, V.shape[1], coeffs)


def noise_variance(snr_db: float, signal_power: float) -> float:
    if np.isinf(snr_db) and snr_db > 0:
        return 0.0
    if not signal_power > 0:
        raise ValueError("signal_power must be positive for a finite SNR")
    return float(signal_power / 10.0 ** (snr_db / 10.0))


def add_noise(x_S, snr_db: float, signal_power: float, seed=None):
    """Corrupt samples with AWGN at the given SNR.

    ``sigma^2 = signal_power / 10^(snr_db / 10)``; an infinite SNR returns the
    samples unchanged. Returns ``(y_S, sigma2)``.
    """
    x_S = np.asarray(x_S, dtype=float)
    sigma2 = noise_variance(snr_db, signal_power)
    if sigma2 == 0.0:
        return x_S.copy(), 0.0
    rng = np.random.default_rng(seed)
    return x_S + np.sqrt(sigma2) * rng.standard_normal(x_S.shape), sigma2
