"""Signal recovery from samples and closed-form MSE predictors.

Reconstructions are linear in the observations, so each method also exposes
its ``n x m`` operator; the Monte-Carlo harness builds it once per sample set
and applies it to every trial.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import DeltaOutOfRange, MissingGamma, NotQualified, ShapeMismatch
from .sampling import RANK_TOL, SamplingSet, neumann_power_sum, psi_matrix
from .spectral import SpectrumSlice

_DELTA_SLACK = 1e-10


def _check_obs(s: SamplingSet, y_S):
    y = np.asarray(y_S, dtype=float)
    if y.shape != (s.m,):
        raise ShapeMismatch(f"expected {s.m} observations, got shape {y.shape}")
    return y


def ls_operator(basis: SpectrumSlice, s: SamplingSet, rank_tol: float = RANK_TOL) -> np.ndarray:
    """``V_K (C V_K)^+`` with the pseudo-inverse taken by a thresholded SVD."""
    V = basis.require_basis()
    K = V.shape[1]
    VS = V[list(s.indices)]
    U, sv, Wt = np.linalg.svd(VS, full_matrices=False)
    if len(sv) < K or sv[K - 1] <= rank_tol * sv[0]:
        raise NotQualified(f"sampled rows have rank below K = {K}")
    pinv = (Wt.T / sv) @ U.T
    return V @ pinv


def ls_reconstruct(basis: SpectrumSlice, s: SamplingSet, y_S) -> np.ndarray:
    """Least-squares bandlimited recovery ``x_hat = V_K (C V_K)^+ y_S``."""
    y = _check_obs(s, y_S)
    return ls_operator(basis, s) @ y


def mia_operator(T: np.ndarray, s: SamplingSet) -> np.ndarray:
    """``T[:, S] @ Gamma_tilde``, the linear map applied by :func:`mia_reconstruct`."""
    G = _gamma(s)
    return T[:, list(s.indices)] @ G


def _gamma(s: SamplingSet):
    G = s.gamma_tilde
    if G is None:
        raise MissingGamma("sample set carries no truncated Neumann matrix")
    if G.shape != (s.m, s.m):
        raise ShapeMismatch(f"Gamma_tilde has shape {G.shape}, expected ({s.m}, {s.m})")
    return G


def mia_reconstruct(T: np.ndarray, s: SamplingSet, y_S) -> np.ndarray:
    """Closed-form recovery ``x_hat = T[:, S] (Gamma_tilde y_S)``.

    ``T`` must be the filter that produced ``s.gamma_tilde``; only
    matrix-vector products are performed.
    """
    y = _check_obs(s, y_S)
    G = _gamma(s)
    if T.shape[0] != T.shape[1] or T.shape[0] != s.n:
        raise ShapeMismatch(f"filter has shape {T.shape}, sample set lives on {s.n} nodes")
    return T[:, list(s.indices)] @ (G @ y)


def truncation_vector(basis: SpectrumSlice, indices: Sequence[int], x_S, L: int) -> np.ndarray:
    """Bias of the order-L Neumann recovery on clean samples.

    ``t = V_K sum_{l>L} Phi^l (C V_K)^T x_S = V_K Phi^{L+1} Psi^{-1} (C V_K)^T x_S``.
    """
    V = basis.require_basis()
    VS = V[np.asarray(indices, dtype=np.intp)]
    P = VS.T @ VS
    Phi = np.eye(len(P)) - P
    z = np.linalg.solve(P, VS.T @ np.asarray(x_S, dtype=float))
    return V @ (np.linalg.matrix_power(Phi, L + 1) @ z)


def _check_deltas(deltas):
    d = np.asarray(deltas, dtype=float)
    if np.any(d < -_DELTA_SLACK) or np.any(d >= 1.0):
        raise DeltaOutOfRange("every delta must lie in [0, 1)")
    return np.clip(d, 0.0, None)


def predict_ls_mse(deltas, sigma2: float) -> float:
    """Expected LS error ``sigma^2 sum_i 1 / (1 - delta_i)``."""
    d = _check_deltas(deltas)
    return float(sigma2 * np.sum(1.0 / (1.0 - d)))


def predict_mia_mse_bound(deltas, sigma2: float, L: int, t_norm2: float = 0.0) -> float:
    """Upper bound ``||t||^2 + sigma^2 sum_i (1 - delta_i^{L+1})^2 / (1 - delta_i)``."""
    d = _check_deltas(deltas)
    if t_norm2 < 0:
        raise ValueError("t_norm2 must be non-negative")
    return float(t_norm2 + sigma2 * np.sum((1.0 - d ** (L + 1)) ** 2 / (1.0 - d)))


def mse(x_hat, x) -> float:
    """Squared error ``||x_hat - x||_2^2`` of one reconstruction."""
    r = np.asarray(x_hat, dtype=float) - np.asarray(x, dtype=float)
    return float(r @ r)


def exact_truncated_operator(basis: SpectrumSlice, indices: Sequence[int], L: int) -> np.ndarray:
    """``V_K sum_{l<=L} Phi^l (C V_K)^T``: the order-L estimator written with eigenvectors."""
    V = basis.require_basis()
    VS = V[np.asarray(indices, dtype=np.intp)]
    P = psi_matrix(basis, indices)
    return V @ neumann_power_sum(np.eye(len(P)) - P, L) @ VS.T
