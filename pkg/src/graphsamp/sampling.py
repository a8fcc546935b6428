"""Sample-set selection for K-bandlimited graph signals.

The main selector, :func:`mia_sample`, greedily minimizes the truncated
Neumann-series proxy of the A-optimality criterion,

    tr( sum_{l=0}^{L} (I_S - T_S)^l ),

where ``T`` is a (polynomial approximation of the) ideal low-pass filter.
:func:`mfn_sample` and :func:`eopt_sample` are eigenvector-based baselines
that also serve as oracles in the tests.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .errors import BudgetExceedsN, NotQualified
from .spectral import SpectrumSlice

METHODS = ("mia", "mfn", "eoptimal", "random")
RANK_TOL = 1e-10
RANK_PENALTY = 1e12
_BATCH_BYTES = 64 * 2**20


@dataclass(eq=False)
class SamplingSet:
    """Ordered sample set plus what the selector recorded along the way.

    ``indices`` keeps selection order; ``step_scores[t]`` is the objective
    value of the node picked at step ``t`` and ``candidate_scores[t]`` (when
    recorded) holds every node's score at that step, ``nan`` for nodes that
    were already selected.
    """
    indices: tuple
    n: int
    method: str
    trunc_L: Optional[int] = None
    seed: Optional[int] = None
    gamma_tilde: Optional[np.ndarray] = field(default=None, repr=False)
    step_scores: List[float] = field(default_factory=list, repr=False)
    candidate_scores: Optional[List[np.ndarray]] = field(default=None, repr=False)
    meta: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.indices = tuple(int(i) for i in self.indices)
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("sample indices must be distinct")
        if any(i < 0 or i >= self.n for i in self.indices):
            raise ValueError(f"sample index outside [0, {self.n})")

    @property
    def m(self) -> int:
        return len(self.indices)

    def prefix(self, m: int) -> "SamplingSet":
        """First ``m`` selections. Greedy selections do not depend on the budget,
        so this equals rerunning the selector with budget ``m``."""
        cand = None if self.candidate_scores is None else self.candidate_scores[:m]
        return SamplingSet(self.indices[:m], self.n, self.method, self.trunc_L,
                           self.seed, None, list(self.step_scores[:m]), cand,
                           dict(self.meta))

    def gamma_digest(self) -> Optional[str]:
        if self.gamma_tilde is None:
            return None
        return array_digest(self.gamma_tilde)

    def to_dict(self) -> dict:
        d = {"n": self.n, "method": self.method, "m": self.m, "L": self.trunc_L,
             "indices": list(self.indices)}
        if self.seed is not None:
            d["seed"] = self.seed
        d["per_step_scores"] = [float(s) for s in self.step_scores]
        if self.gamma_tilde is not None:
            d["gamma_digest"] = self.gamma_digest()
        d.update(self.meta)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=False) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SamplingSet":
        known = {"n", "method", "m", "L", "indices", "seed", "per_step_scores", "gamma_digest"}
        meta = {k: v for k, v in d.items() if k not in known}
        s = cls(tuple(d["indices"]), int(d["n"]), d["method"], d.get("L"), d.get("seed"),
                None, list(d.get("per_step_scores", [])), None, meta)
        if "m" in d and int(d["m"]) != s.m:
            raise ValueError(f"'m' = {d['m']} disagrees with {s.m} indices")
        if "gamma_digest" in d:
            s.meta["gamma_digest"] = d["gamma_digest"]
        return s

    @classmethod
    def from_json(cls, text: str) -> "SamplingSet":
        return cls.from_dict(json.loads(text))


def array_digest(a: np.ndarray) -> str:
    a = np.ascontiguousarray(a, dtype="<f8")
    return "sha256:" + hashlib.sha256(a.tobytes()).hexdigest()


# --------------------------------------------------------------------------
# Neumann-series helpers

def neumann_power_sum(A: np.ndarray, L: int) -> np.ndarray:
    """``sum_{l=0}^{L} A^l`` by Horner's rule (``S <- A S + I``)."""
    n = A.shape[-1]
    eye = np.eye(n)
    S = np.broadcast_to(eye, A.shape).copy()
    for _ in range(L):
        S = A @ S
        S += eye
    return S


def neumann_gamma(T: np.ndarray, indices: Sequence[int], L: int) -> np.ndarray:
    """``sum_{l=0}^{L} (I_S - T_S)^l`` on the ordered index set ``S``."""
    S = np.asarray(indices, dtype=np.intp)
    G = np.eye(len(S)) - T[np.ix_(S, S)]
    P = neumann_power_sum(G, L)
    return 0.5 * (P + P.T)   # exact in theory; removes rounding asymmetry


def mia_objective(T: np.ndarray, indices: Sequence[int], L: int) -> float:
    return float(np.trace(neumann_gamma(T, indices, L)))


def _check_budget(n, m):
    if m < 1:
        raise ValueError(f"budget must be at least 1, got {m}")
    if m > n:
        raise BudgetExceedsN(f"budget m = {m} exceeds n = {n}")


def _chunks(count, per_item_bytes):
    size = max(1, int(_BATCH_BYTES // max(per_item_bytes, 1)))
    for start in range(0, count, size):
        yield slice(start, min(start + size, count))


# --------------------------------------------------------------------------
# MIA

def _mia_scores_literal(T, S, cand, L):
    s = len(S)
    G = np.eye(s) - T[np.ix_(S, S)]
    out = np.empty(len(cand))
    for sl in _chunks(len(cand), 3 * 8 * (s + 1) ** 2):
        c = cand[sl]
        B = np.empty((len(c), s + 1, s + 1))
        B[:, :s, :s] = G
        col = -T[np.ix_(S, c)].T
        B[:, :s, s] = col
        B[:, s, :s] = col
        B[:, s, s] = 1.0 - T[c, c]
        out[sl] = np.trace(neumann_power_sum(B, L), axis1=1, axis2=2)
    return out


def _mia_scores_fast(T, S, cand, L):
    # Bordered-matrix generating function.  With B = [[A, b], [b^T, c]],
    #   tr (I - tB)^{-1} - tr (I - tA)^{-1} = (1 + t^2 b^T R^2 b) / (1 - tc - t^2 b^T R b),
    # R = (I - tA)^{-1}; expanding in t gives every tr B^l from the moments
    # b^T A^j b, so all candidates cost O(L s^2) each.
    s = len(S)
    base = 0.0
    c = 1.0 - T[cand, cand]
    mom = np.zeros((max(L - 1, 0), len(cand)))
    if s:
        A = np.eye(s) - T[np.ix_(S, S)]
        base = float(np.trace(neumann_power_sum(A, L)))
        b = -T[np.ix_(S, cand)]
        v = b
        for j in range(L - 1):
            mom[j] = np.einsum("ij,ij->j", b, v)
            if j + 1 < L - 1:
                v = A @ v
    # q_l = [t^l] of the ratio: q_l = N_l + c q_{l-1} + sum_j m_j q_{l-2-j},
    # numerator coefficients N_0 = 1, N_1 = 0, N_l = (l - 1) m_{l-2}
    q = np.zeros((L + 1, len(cand)))
    q[0] = 1.0
    for l in range(1, L + 1):
        acc = c * q[l - 1]
        for j in range(l - 1):
            acc = acc + mom[j] * q[l - 2 - j]
        if l >= 2:
            acc = acc + (l - 1) * mom[l - 2]
        q[l] = acc
    return base + q.sum(axis=0)


def mia_sample(T_poly: np.ndarray, m: int, L: int = 10, *, mode: str = "literal",
               record_candidates: bool = False) -> SamplingSet:
    """Greedy MIA sample selection.

    At every step each unselected node ``i`` is scored by
    ``tr(sum_{l<=L} Gamma_i^l)`` with ``Gamma_i = I - T_{S+i}``; the lowest
    score wins, ties going to the smallest node index.

    ``mode="literal"`` forms every ``Gamma_i`` and its power sum explicitly.
    ``mode="fast"`` obtains the same scores from moments of the bordered
    matrix and is much cheaper for large budgets; both select identical sets
    up to floating-point ties.
    """
    T = np.asarray(T_poly, dtype=float)
    n = T.shape[0]
    _check_budget(n, m)
    if L < 0:
        raise ValueError("truncation order L must be non-negative")
    if mode not in ("literal", "fast"):
        raise ValueError(f"unknown mode {mode!r}")
    score_fn = _mia_scores_literal if mode == "literal" else _mia_scores_fast
    selected: List[int] = []
    mask = np.ones(n, dtype=bool)
    steps, cands = [], [] if record_candidates else None
    for _ in range(m):
        cand = np.flatnonzero(mask)
        sc = score_fn(T, np.asarray(selected, dtype=np.intp), cand, L)
        full = np.full(n, np.inf)
        full[cand] = sc
        u = int(np.argmin(full))
        steps.append(float(full[u]))
        if cands is not None:
            full[~mask] = np.nan
            cands.append(full)
        selected.append(u)
        mask[u] = False
    gamma = neumann_gamma(T, selected, L)
    return SamplingSet(tuple(selected), n, "mia", L, None, gamma, steps, cands,
                       {"mia_mode": mode})


# --------------------------------------------------------------------------
# eigenvector-based baselines

def _singular_values(V, S, cand):
    s = len(S)
    K = V.shape[1]
    out = np.empty((len(cand), min(s + 1, K)))
    for sl in _chunks(len(cand), 3 * 8 * (s + 1) * K):
        c = cand[sl]
        R = np.empty((len(c), s + 1, K))
        R[:, :s, :] = V[S]
        R[:, s, :] = V[c]
        out[sl] = np.linalg.svd(R, compute_uv=False)
    return out


def _full_rank_inverse(VS, rank_tol):
    sv = np.linalg.svd(VS, compute_uv=False)
    if sv[-1] <= rank_tol * sv[0]:
        return None
    return np.linalg.inv(VS.T @ VS)


def _smallest_sv_gram(P, rows):
    # sigma_K of [V_S; v] is sqrt(lambda_min(P + v v^T))
    K = P.shape[0]
    out = np.empty(len(rows))
    for sl in _chunks(len(rows), 3 * 8 * K * K):
        r = rows[sl]
        G = P + r[:, :, None] * r[:, None, :]
        out[sl] = np.linalg.eigvalsh(G)[:, 0]
    return np.sqrt(np.clip(out, 0.0, None))


def pinv_trace(sv: np.ndarray, rank_tol: float = RANK_TOL):
    """``(rank, tr((R^T R)^+))`` from singular values (last axis, descending)."""
    sv = np.atleast_2d(sv)
    keep = sv > rank_tol * sv[:, :1]
    with np.errstate(divide="ignore"):
        inv = np.where(keep, 1.0 / np.where(keep, sv, 1.0) ** 2, 0.0)
    return keep.sum(axis=1), inv.sum(axis=1)


def aopt_objective(basis: SpectrumSlice, indices: Sequence[int]) -> float:
    """Exact A-optimality value ``tr[((C V_K)^T C V_K)^{-1}]``; inf if not qualified."""
    V = basis.require_basis()
    sv = np.linalg.svd(V[np.asarray(indices, dtype=np.intp)], compute_uv=False)
    if len(sv) < V.shape[1] or sv[-1] <= RANK_TOL * sv[0]:
        return float("inf")
    return float(np.sum(1.0 / sv**2))


def mfn_sample(basis: SpectrumSlice, m: int, *, rank_tol: float = RANK_TOL,
               record_candidates: bool = False) -> SamplingSet:
    """Greedy minimization of the exact A-optimality criterion.

    While fewer than K independent rows are selected the pseudo-inverse trace
    is used, and candidates are compared first on rank deficit, so every step
    prefers growing the rank. The recorded score is
    ``(K - rank) * 1e12 + tr(pinv)``.
    """
    V = basis.require_basis()
    n, K = V.shape
    _check_budget(n, m)
    selected: List[int] = []
    mask = np.ones(n, dtype=bool)
    steps, cands = [], [] if record_candidates else None
    for _ in range(m):
        cand = np.flatnonzero(mask)
        S = np.asarray(selected, dtype=np.intp)
        Pinv = _full_rank_inverse(V[S], rank_tol) if len(S) >= K else None
        if Pinv is not None:
            # rank-one update of an invertible information matrix
            W = V[cand] @ Pinv
            tr = np.trace(Pinv) - np.einsum("ij,ij->i", W, W) / (
                1.0 + np.einsum("ij,ij->i", W, V[cand]))
            deficit = np.zeros(len(cand), dtype=np.int64)
        else:
            rank, tr = pinv_trace(_singular_values(V, S, cand), rank_tol)
            deficit = K - rank
        order = np.lexsort((cand, tr, deficit))
        u = int(cand[order[0]])
        score = deficit * RANK_PENALTY + tr
        steps.append(float(score[order[0]]))
        if cands is not None:
            full = np.full(n, np.nan)
            full[cand] = score
            cands.append(full)
        selected.append(u)
        mask[u] = False
    return SamplingSet(tuple(selected), n, "mfn", None, None, None, steps, cands)


def smallest_singular_value(basis: SpectrumSlice, indices: Sequence[int]) -> float:
    """``sigma_K(C V_K)``; zero whenever the sampled rows have rank below K."""
    V = basis.require_basis()
    sv = np.linalg.svd(V[np.asarray(indices, dtype=np.intp)], compute_uv=False)
    if len(sv) < V.shape[1]:
        return 0.0
    return float(sv[-1])


def eopt_sample(basis: SpectrumSlice, m: int, *, record_candidates: bool = False) -> SamplingSet:
    """Greedy E-optimal selection: maximize the smallest singular value.

    Before K rows are selected the smallest of the ``|S|`` available singular
    values is maximized instead (the K-th one is identically zero there).
    """
    V = basis.require_basis()
    n, K = V.shape
    _check_budget(n, m)
    selected: List[int] = []
    mask = np.ones(n, dtype=bool)
    steps, cands = [], [] if record_candidates else None
    for _ in range(m):
        cand = np.flatnonzero(mask)
        S = np.asarray(selected, dtype=np.intp)
        if len(S) >= K:
            smin = _smallest_sv_gram(V[S].T @ V[S], V[cand])
        else:
            smin = _singular_values(V, S, cand)[:, -1]
        full = np.full(n, -np.inf)
        full[cand] = smin
        u = int(np.argmax(full))
        steps.append(float(full[u]))
        if cands is not None:
            full[~mask] = np.nan
            cands.append(full)
        selected.append(u)
        mask[u] = False
    return SamplingSet(tuple(selected), n, "eoptimal", None, None, None, steps, cands)


def random_sample(n: int, m: int, seed: int) -> SamplingSet:
    """Uniform sampling without replacement, fully determined by ``seed``."""
    _check_budget(n, m)
    idx = np.random.default_rng(seed).choice(n, size=m, replace=False)
    return SamplingSet(tuple(int(i) for i in idx), n, "random", None, int(seed))


# --------------------------------------------------------------------------
# diagnostics

def is_qualified(s: SamplingSet, basis: SpectrumSlice, tol: float = RANK_TOL) -> bool:
    """True iff the sampled eigenvector rows ``V_K[S]`` have full column rank K."""
    V = basis.require_basis()
    if s.m < V.shape[1]:
        return False
    sv = np.linalg.svd(V[list(s.indices)], compute_uv=False)
    return bool(sv[V.shape[1] - 1] > tol * sv[0])


def psi_matrix(basis: SpectrumSlice, indices: Sequence[int]) -> np.ndarray:
    """Information matrix ``(C V_K)^T (C V_K)``."""
    VS = basis.require_basis()[np.asarray(indices, dtype=np.intp)]
    return VS.T @ VS


def psi_spectrum(basis: SpectrumSlice, indices: Sequence[int]) -> np.ndarray:
    """Eigenvalues ``mu_i = 1 - delta_i`` of ``Psi``, ascending."""
    return np.linalg.eigvalsh(psi_matrix(basis, indices))


def deltas(basis: SpectrumSlice, indices: Sequence[int]) -> np.ndarray:
    """Eigenvalues of ``I - Psi``, ascending."""
    P = psi_matrix(basis, indices)
    return np.linalg.eigvalsh(np.eye(len(P)) - P)


def truncation_error(deltas_: np.ndarray, L: int) -> float:
    """Tail ``sum_i delta_i^{L+1} / (1 - delta_i)`` dropped by truncating at order L."""
    d = np.asarray(deltas_, dtype=float)
    return float(np.sum(d ** (L + 1) / (1.0 - d)))


def neumann_tail(mu: np.ndarray, L: int) -> float:
    """:func:`truncation_error` written in the eigenvalues of ``Psi``.

    Passing ``mu`` rather than ``delta`` keeps ``1 - delta`` exact when some
    ``delta`` is close to 1, i.e. for badly conditioned sample sets.
    """
    mu = np.asarray(mu, dtype=float)
    return float(np.sum((1.0 - mu) ** (L + 1) / mu))


def truncation_ratio(basis: SpectrumSlice, s: SamplingSet, L: int) -> float:
    """Truncation error at order L relative to the exact A-optimality value."""
    if not is_qualified(s, basis):
        raise NotQualified("sample set does not have full column rank")
    num = neumann_tail(psi_spectrum(basis, s.indices), L)
    P = psi_matrix(basis, s.indices)
    exact = float(np.trace(np.linalg.inv(P)))
    truncated = float(np.trace(neumann_power_sum(np.eye(len(P)) - P, L)))
    if abs((exact - truncated) - num) > 1e-8 * max(1.0, exact):
        raise FloatingPointError(
            f"trace identity violated: {exact - truncated!r} vs {num!r}")
    return num / exact
