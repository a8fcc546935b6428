"""Sampling and reconstruction of bandlimited graph signals.

The main entry points are re-exported here; see the submodules for the
diagnostics and lower-level helpers.
"""
from .errors import *  # noqa: F401,F403
from .graph import (Graph, gen_community, gen_small_world, load_graph,
                    normalized_laplacian, save_graph)
from .reconstruct import (ls_reconstruct, mia_reconstruct, mse, predict_ls_mse,
                          predict_mia_mse_bound)
from .sampling import (SamplingSet, eopt_sample, is_qualified, mfn_sample, mia_sample,
                       random_sample, truncation_ratio)
from .signals import BandlimitedSignal, add_noise, gen_bandlimited
from .spectral import (ChebyshevFilter, SpectrumSlice, apply_filter_dense, chebyshev_fit,
                       dense_spectrum, ideal_lowpass_exact, lanczos_lambda_k)
from .experiment import ExperimentConfig, ExperimentResult, run_experiment

__version__ = "0.1.0"
