"""Eigen-information of the normalized Laplacian and low-pass graph filters.

Two routes to the cutoff eigenvalue are provided: a dense eigensolver used
as the oracle for small graphs, and a Lanczos iteration with full
reorthogonalization that only needs sparse matrix-vector products.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigvalsh_tridiagonal

from .errors import (Breakdown, DimensionCap, InvalidCutoff, MissingBasis,
                     NotConverged)

DENSE_CAP = 4096
LAMBDA_MAX = 2.0   # exact upper bound for the normalized Laplacian spectrum


@dataclass(frozen=True, eq=False)
class SpectrumSlice:
    """The ``k`` smallest eigenvalues, optionally with their eigenvectors (n x k)."""
    k: int
    lambdas: np.ndarray
    basis: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def n(self) -> Optional[int]:
        return None if self.basis is None else self.basis.shape[0]

    @property
    def lambda_k(self) -> float:
        return float(self.lambdas[self.k - 1])

    def require_basis(self) -> np.ndarray:
        if self.basis is None:
            raise MissingBasis("spectrum slice carries no eigenvectors")
        return self.basis


def _as_dense(L, cap):
    n = L.shape[0]
    if n > cap:
        raise DimensionCap(f"n = {n} exceeds the dense cap of {cap}")
    return L.toarray() if sp.issparse(L) else np.asarray(L, dtype=float)


def _fix_signs(V):
    # largest-magnitude entry of every column made positive (first on ties)
    idx = np.argmax(np.abs(V), axis=0)
    s = np.sign(V[idx, np.arange(V.shape[1])])
    s[s == 0] = 1.0
    return V * s


def dense_spectrum(L, k: int, cap: int = DENSE_CAP) -> SpectrumSlice:
    """First ``k`` eigenpairs of ``L`` by a dense symmetric eigensolver."""
    A = _as_dense(L, cap)
    n = A.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"bandwidth k must lie in [1, {n}], got {k}")
    w, V = np.linalg.eigh(A)
    V = _fix_signs(V[:, :k])
    return SpectrumSlice(k, w[:k].copy(), np.ascontiguousarray(V))


class _Lanczos:
    """Lanczos tridiagonalization with full (twice-applied) reorthogonalization.

    When the Krylov space becomes invariant the recursion continues from a
    fresh random vector orthogonal to everything so far; the tridiagonal
    matrix then decouples (zero off-diagonal) and multiple eigenvalues are
    still recovered.
    """

    def __init__(self, L, rng, breakdown_tol=1e-10):
        self.L = L
        self.n = L.shape[0]
        self.rng = rng
        self.Q = np.zeros((self.n, 0))
        self.alpha = []
        self.beta = []
        self.tol = breakdown_tol
        self._next = self._fresh(0)

    def _orth(self, w, upto):
        Q = self.Q[:, :upto]
        for _ in range(2):
            w = w - Q @ (Q.T @ w)
        return w

    def _fresh(self, upto):
        for _ in range(5):
            r = self._orth(self.rng.standard_normal(self.n), upto)
            nr = np.linalg.norm(r)
            if nr > 1e-8:
                return r / nr
        raise Breakdown("cannot extend the Krylov basis with a new direction")

    def extend(self, steps):
        steps = min(steps, self.n)
        if steps <= len(self.alpha):
            return
        Q = np.zeros((self.n, steps))
        Q[:, :self.Q.shape[1]] = self.Q
        self.Q = Q
        j = len(self.alpha)
        while j < steps:
            q = self._next
            self.Q[:, j] = q
            w = self.L @ q
            a = float(q @ w)
            self.alpha.append(a)
            if j + 1 == self.n:
                break
            w = self._orth(w, j + 1)
            b = float(np.linalg.norm(w))
            if b <= self.tol:
                self.beta.append(0.0)
                self._next = self._fresh(j + 1)
            else:
                self.beta.append(b)
                self._next = w / b
            j += 1

    def ritz_value(self, k, steps):
        a = np.asarray(self.alpha[:steps])
        b = np.asarray(self.beta[:steps - 1])
        if steps == 1:
            return float(a[0])
        w = eigvalsh_tridiagonal(a, b, select="i", select_range=(k - 1, k - 1))
        return float(w[0])


def default_lanczos_steps(n, k):
    return min(n, max(2 * k, k + 50))


def lanczos_lambda_k(L, k: int, m_steps: Optional[int] = None, seed: int = 0, *,
                     tol: float = 1e-8, increment: int = 10,
                     max_steps: Optional[int] = None, converge: bool = True) -> float:
    """Estimate the ``k``-th smallest eigenvalue of ``L`` with Lanczos.

    Parameters
    ----------
    L : sparse or dense symmetric matrix
    k : which eigenvalue (1-based, ascending)
    m_steps : initial tridiagonal size; defaults to ``min(n, max(2k, k + 50))``
    seed : seeds the random start vector
    tol : the estimate is accepted once ``m`` and ``m + increment`` steps agree
        to within ``tol``
    converge : if False, return the ``k``-th Ritz value at ``m_steps`` directly

    Raises
    ------
    NotConverged
        if ``max_steps`` is reached without two consecutive estimates agreeing.
    """
    n = L.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    M = default_lanczos_steps(n, k) if m_steps is None else int(m_steps)
    if not (k < M <= n or k == M == n):
        raise ValueError(f"need k < m_steps <= n, got k={k}, m_steps={M}, n={n}")
    cap = n if max_steps is None else min(int(max_steps), n)
    lz = _Lanczos(L, np.random.default_rng(seed))
    lz.extend(M)
    est = lz.ritz_value(k, M)
    if not converge:
        return est
    while M < n:
        if M >= cap:
            raise NotConverged(f"lambda_{k} not converged within {cap} Lanczos steps")
        nxt = min(M + increment, n)
        lz.extend(nxt)
        new = lz.ritz_value(k, nxt)
        if abs(new - est) <= tol:
            return new
        M, est = nxt, new
    return est


# --------------------------------------------------------------------------
# filters

@dataclass(frozen=True, eq=False)
class ChebyshevFilter:
    """Degree-``order`` Chebyshev expansion of a smoothed low-pass step on [0, lambda_max].

    The target kernel is ``1 / (1 + exp(alpha * (lam - cutoff)))``.
    """
    order: int
    coeffs: np.ndarray = field(repr=False)
    cutoff: float
    alpha: float
    lambda_max: float = LAMBDA_MAX

    def _x(self, lam):
        return 2.0 * np.asarray(lam, dtype=float) / self.lambda_max - 1.0

    def __call__(self, lam):
        return np.polynomial.chebyshev.chebval(self._x(lam), self.coeffs)

    def target(self, lam):
        return sigmoid_step(lam, self.cutoff, self.alpha)

    def max_error(self, points: int = 1000) -> float:
        lam = np.linspace(0.0, self.lambda_max, points)
        return float(np.max(np.abs(self(lam) - self.target(lam))))


def sigmoid_step(lam, cutoff, alpha):
    z = alpha * (np.asarray(lam, dtype=float) - cutoff)
    return 0.5 * (1.0 - np.tanh(0.5 * z))   # == 1 / (1 + exp(z)) without overflow


def chebyshev_fit(lambda_k: float, p: int = 25, alpha: float = 30.0,
                  lambda_max: float = LAMBDA_MAX, quad_points: Optional[int] = None
                  ) -> ChebyshevFilter:
    """Truncated Chebyshev series of the sigmoid low-pass kernel.

    Coefficients are the Chebyshev projections
    ``c_j = (2/pi) int_0^pi g(cos t) cos(j t) dt`` (halved for ``j = 0``),
    evaluated by Gauss-Chebyshev quadrature.
    """
    if not (0.0 < lambda_k < lambda_max):
        raise InvalidCutoff(f"cutoff must lie in (0, {lambda_max}), got {lambda_k}")
    if p < 1:
        raise ValueError("polynomial order must be at least 1")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    N = quad_points or max(1024, 4 * (p + 1))
    theta = np.pi * (np.arange(N) + 0.5) / N
    lam = 0.5 * lambda_max * (np.cos(theta) + 1.0)
    g = sigmoid_step(lam, lambda_k, alpha)
    c = (2.0 / N) * (np.cos(np.outer(np.arange(p + 1), theta)) @ g)
    c[0] *= 0.5
    c.setflags(write=False)
    return ChebyshevFilter(int(p), c, float(lambda_k), float(alpha), float(lambda_max))


def ideal_lowpass_exact(spectrum: SpectrumSlice) -> np.ndarray:
    """Spectral projector ``V_K V_K^T`` onto the first K eigenvectors."""
    V = spectrum.require_basis()
    T = V @ V.T
    return 0.5 * (T + T.T)


def apply_filter_dense(f: ChebyshevFilter, L, cap: int = DENSE_CAP) -> np.ndarray:
    """Materialize the matrix polynomial ``f(L)`` as a dense n x n array.

    Uses the three-term Chebyshev recurrence on the shifted operator
    ``X = (2/lambda_max) L - I`` applied to all identity columns at once.
    """
    n = L.shape[0]
    if n > cap:
        raise DimensionCap(f"n = {n} exceeds the dense cap of {cap}")
    L = sp.csr_array(L)
    X = (2.0 / f.lambda_max) * L - sp.eye_array(n, format="csr")
    c = f.coeffs
    prev = np.eye(n)
    out = c[0] * prev
    if f.order >= 1:
        cur = X @ prev
        out += c[1] * cur
        for j in range(2, f.order + 1):
            prev, cur = cur, 2.0 * (X @ cur) - prev
            out += c[j] * cur
    return 0.5 * (out + out.T)


def lowpass_filter(L, lambda_k, p=25, alpha=30.0) -> np.ndarray:
    """Shorthand: fit the Chebyshev filter at ``lambda_k`` and materialize it."""
    return apply_filter_dense(chebyshev_fit(lambda_k, p, alpha), L)
