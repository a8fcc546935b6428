"""
Recovering the signal
=====================

Least-squares and MIA reconstruction from noisy samples, together with the
closed-form error predictions. At low SNR the truncated Neumann operator
trades a small bias for lower noise gain.

Run:  python3 demos/03_reconstruction.py
"""
# %%
import numpy as np

from graphsamp import (add_noise, dense_spectrum, gen_bandlimited, gen_small_world,
                       lanczos_lambda_k, mia_sample, normalized_laplacian)
from graphsamp.reconstruct import (ls_operator, mia_operator, predict_ls_mse,
                                   predict_mia_mse_bound, truncation_vector)
from graphsamp.sampling import deltas
from graphsamp.spectral import lowpass_filter

K, M, TRUNC = 50, 80, 10
g = gen_small_world(1000, 8, 0.1, seed=1)
L = normalized_laplacian(g)
sp = dense_spectrum(L, K)
T = lowpass_filter(L, lanczos_lambda_k(L, K), 25, 30.0)
s = mia_sample(T, M, TRUNC, mode="fast")
idx = list(s.indices)

R_ls = ls_operator(sp, s)
R_mia = mia_operator(T, s)

# %% Monte-Carlo MSE at a few SNRs, fresh signal and noise per trial
rng = np.random.default_rng(0)
for snr in (20, 10, 0, -5):
    e_ls, e_mia = [], []
    for t in range(200):
        sig = gen_bandlimited(sp, seed=rng.integers(2**63))
        y, sigma2 = add_noise(sig.x[idx], snr, sig.power, seed=rng.integers(2**63))
        e_ls.append(np.sum((R_ls @ y - sig.x) ** 2))
        e_mia.append(np.sum((R_mia @ y - sig.x) ** 2))
    print(f"SNR {snr:3d} dB  LS {np.mean(e_ls):8.3f}   MIA {np.mean(e_mia):8.3f}")

# %% closed-form predictions with the exact projector
d = deltas(sp, idx)
sig = gen_bandlimited(sp, seed=7)
t2 = float(np.sum(truncation_vector(sp, idx, sig.x[idx], TRUNC) ** 2))
for sigma2 in (0.01, 0.1, 1.0):
    print(f"sigma^2={sigma2:5.2f}  LS predicted {predict_ls_mse(d, sigma2):8.3f}  "
          f"MIA bound {predict_mia_mse_bound(d, sigma2, TRUNC, t2):8.3f}  (||t||^2={t2:.3f})")
