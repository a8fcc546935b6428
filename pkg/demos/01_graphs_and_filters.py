"""
Graphs, spectra and the polynomial low-pass filter
==================================================

Builds the two synthetic graph families, estimates the cutoff eigenvalue
lambda_K with Lanczos, and looks at how well a degree-25 Chebyshev
polynomial reproduces the ideal low-pass projector.

Run:  python3 demos/01_graphs_and_filters.py
"""
# %%
import numpy as np

from graphsamp import (chebyshev_fit, dense_spectrum, gen_community, gen_small_world,
                       ideal_lowpass_exact, lanczos_lambda_k, normalized_laplacian)
from graphsamp.spectral import apply_filter_dense

K = 50

# %% two graph models, 1000 nodes each
graphs = {
    "small-world": gen_small_world(1000, degree=8, rewire_p=0.1, seed=1),
    "community": gen_community(1000, communities=10, p_in=0.2, p_out=0.002, seed=1),
}
for name, g in graphs.items():
    print(f"{name:12s} n={g.n} edges={g.num_edges} connected={g.connected}")

# %% lambda_K: dense eigensolver vs Lanczos (sparse mat-vecs only)
for name, g in graphs.items():
    L = normalized_laplacian(g)
    sp = dense_spectrum(L, K)
    lam = lanczos_lambda_k(L, K, seed=0)
    gap = dense_spectrum(L, K + 1).lambdas[-1] - sp.lambda_k
    print(f"{name:12s} lambda_K dense={sp.lambda_k:.10f} lanczos={lam:.10f} "
          f"gap to lambda_K+1={gap:.2e}")

# %% the smoothed step and its Chebyshev approximation
# The community graph has its cutoff inside a dense band of eigenvalues, so the
# sigmoid's transition region covers many modes; the polynomial fit is also
# worse for cutoffs near the middle of [0, 2].
for cut in (0.17, 0.69, 1.0):
    f = chebyshev_fit(cut, p=25, alpha=30.0)
    print(f"cutoff {cut:.2f}: max |poly - sigmoid| on [0, 2] = {f.max_error():.4f}")

# %% how close is T^Poly to the exact projector V_K V_K^T?
for name, g in graphs.items():
    L = normalized_laplacian(g)
    sp = dense_spectrum(L, K)
    T = apply_filter_dense(chebyshev_fit(sp.lambda_k), L)
    Te = ideal_lowpass_exact(sp)
    w = np.linalg.eigvalsh(L.toarray())
    band = np.sum(np.abs(w - sp.lambda_k) < 2 / 30)
    print(f"{name:12s} trace(T^Poly)={np.trace(T):.2f} (K={K}), "
          f"||T^Poly - T||_2={np.linalg.norm(T - Te, 2):.3f}, "
          f"eigenvalues within 2/alpha of the cutoff: {band}")
