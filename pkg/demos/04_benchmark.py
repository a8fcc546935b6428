"""
Monte-Carlo benchmark
=====================

Runs a small experiment config through the same harness the ``graphsamp
bench`` command uses and prints the tidy per-panel tables. The bundled
full-size configs (fig1a, fig1b, fig1c, fig2, fig2_community) take tens of
seconds each; run them with e.g.

    graphsamp bench --config fig1b.json --out fig1b.csv --plot-data plots/

Run:  python3 demos/04_benchmark.py
"""
# %%
from graphsamp import ExperimentConfig, run_experiment

cfg = ExperimentConfig.from_dict({
    "graph": {"model": "small-world", "n": 300, "degree": 8, "rewire_p": 0.1, "seed": 1},
    "k": 30,
    "m_grid": [36, 48, 60, 72],
    "snr_db_grid": [10, 0],
    "methods": ["mia", "eoptimal", "random"],
    "recon": ["ls", "mia"],
    "trials": 50,
    "master_seed": 1,
})
res = run_experiment(cfg)
print(f"lambda_K = {res.info['lambda_k']:.6f}; selection times (ms): "
      + ", ".join(f"{k} {v:.0f}" for k, v in res.info["selection_ms"].items()))

# %% one table per (reconstruction, SNR) panel
for panel, table in res.plot_tables().items():
    print(f"\n[{panel}]")
    print(table, end="")

# %% the full CSV is what `graphsamp bench` writes
print()
print(res.to_csv().splitlines()[0])
