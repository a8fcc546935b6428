"""Monte-Carlo comparison of sampling and reconstruction methods.

Seed scheme (all derived from ``master_seed`` with ``numpy.random.SeedSequence``):

* signal of trial ``t``:                 ``SeedSequence([master_seed, 0, t])``
* noise of SNR index ``j``, trial ``t``:  ``SeedSequence([master_seed, 1, j, t])``
* random selector at budget ``m``:       first word of ``SeedSequence([master_seed, 2, m])``
* Lanczos start vector:                  first word of ``SeedSequence([master_seed, 3])``

The signal of a trial does not depend on the SNR, the budget or the method,
and the noise does not depend on the method, so every method is compared on
identical draws.
"""
from __future__ import annotations

import csv
import io
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import ConfigError, NotQualified
from .graph import Graph, gen_community, gen_small_world, load_graph, normalized_laplacian
from .reconstruct import ls_operator, mse
from .sampling import (METHODS, SamplingSet, eopt_sample, mfn_sample, mia_sample,
                       neumann_gamma, random_sample)
from .signals import add_noise, gen_bandlimited
from .spectral import dense_spectrum, lanczos_lambda_k, lowpass_filter

CSV_HEADER = ["method", "recon", "m", "snr_db", "mean_mse", "stderr", "trials",
              "seed_base", "wall_ms"]
RECONS = ("ls", "mia")


def derived_seed(*words) -> int:
    return int(np.random.SeedSequence(list(words)).generate_state(1, dtype=np.uint64)[0])


def threads_from_env(default=1) -> int:
    raw = os.environ.get("GRAPHSAMP_THREADS")
    if not raw:
        return default
    try:
        v = int(raw)
    except ValueError:
        raise ConfigError(f"GRAPHSAMP_THREADS must be an integer, got {raw!r}") from None
    return max(1, v)


@dataclass
class ExperimentConfig:
    graph: dict
    k: int
    m_grid: List[int]
    snr_db_grid: List[float]
    methods: List[str]
    master_seed: int
    recon: List[str] = field(default_factory=lambda: ["ls"])
    trials: int = 50
    trunc_L: int = 10
    poly_p: int = 25
    alpha: float = 30.0
    signal_mean: float = 1.0
    signal_std: float = 0.5
    lambda_k_method: str = "lanczos"
    mia_mode: str = "fast"
    name: str = ""

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        if "master_seed" not in d:
            raise ConfigError("config must set master_seed")
        unknown = set(d) - {f for f in cls.__dataclass_fields__}
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(d.get("recon"), str):
            d["recon"] = [d["recon"]]
        if "snr_db_grid" in d:
            d["snr_db_grid"] = [_parse_snr(v) for v in d["snr_db_grid"]]
        try:
            cfg = cls(**d)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None
        cfg.validate()
        return cfg

    def to_dict(self) -> dict:
        d = asdict(self)
        d["snr_db_grid"] = [_snr_text(s) if math.isinf(s) else s for s in self.snr_db_grid]
        return d

    def validate(self):
        if not isinstance(self.graph, dict) or "model" not in self.graph:
            raise ConfigError("graph must be an object with a 'model' key")
        if self.graph["model"] not in ("small-world", "community", "file"):
            raise ConfigError(f"unknown graph model {self.graph['model']!r}")
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if not self.m_grid:
            raise ConfigError("m_grid is empty")
        if any(m < self.k for m in self.m_grid):
            raise ConfigError("every budget in m_grid must be >= k")
        if not self.snr_db_grid:
            raise ConfigError("snr_db_grid is empty")
        bad = set(self.methods) - set(METHODS)
        if bad or not self.methods:
            raise ConfigError(f"methods must be a non-empty subset of {METHODS}")
        bad = set(self.recon) - set(RECONS)
        if bad or not self.recon:
            raise ConfigError(f"recon must be a non-empty subset of {RECONS}")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.trunc_L < 0 or self.poly_p < 1 or self.alpha <= 0:
            raise ConfigError("need trunc_L >= 0, poly_p >= 1, alpha > 0")
        if self.lambda_k_method not in ("lanczos", "dense"):
            raise ConfigError("lambda_k_method must be 'lanczos' or 'dense'")
        if self.mia_mode not in ("literal", "fast"):
            raise ConfigError("mia_mode must be 'literal' or 'fast'")
        if self.signal_std < 0:
            raise ConfigError("signal_std must be non-negative")


def _parse_snr(v) -> float:
    if isinstance(v, str):
        if v.strip().lower() in ("inf", "+inf", "infinity"):
            return math.inf
        try:
            return float(v)
        except ValueError:
            raise ConfigError(f"bad SNR value {v!r}") from None
    return float(v)


def _snr_text(s: float) -> str:
    return "inf" if math.isinf(s) else repr(float(s))


def build_graph(gcfg: dict, base_dir: Optional[str] = None) -> Graph:
    gcfg = dict(gcfg)
    model = gcfg.pop("model")
    try:
        if model == "small-world":
            return gen_small_world(gcfg["n"], gcfg.get("degree", 8), gcfg.get("rewire_p", 0.1),
                                   gcfg["seed"])
        if model == "community":
            return gen_community(gcfg["n"], gcfg.get("communities", 10), gcfg.get("p_in", 0.2),
                                 gcfg.get("p_out", 0.002), gcfg["seed"])
        path = gcfg["path"]
    except KeyError as exc:
        raise ConfigError(f"graph config is missing {exc}") from None
    if base_dir and not os.path.isabs(path):
        path = os.path.join(base_dir, path)
    return load_graph(path)


@dataclass
class ResultRow:
    method: str
    recon: str
    m: int
    snr_db: float
    mean_mse: float
    stderr: float
    trials: int
    seed_base: int
    wall_ms: float
    flag: str = ""

    def csv_fields(self) -> list:
        return [self.method, self.recon, str(self.m), _snr_text(self.snr_db),
                repr(float(self.mean_mse)), repr(float(self.stderr)), str(self.trials),
                str(self.seed_base), f"{self.wall_ms:.3f}"]


@dataclass
class ExperimentResult:
    rows: List[ResultRow]
    info: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for r in self.rows:
            w.writerow(r.csv_fields())
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ExperimentResult":
        rd = csv.reader(io.StringIO(text))
        header = next(rd)
        if header != CSV_HEADER:
            raise ValueError(f"unexpected CSV header {header}")
        rows = []
        for f in rd:
            rows.append(ResultRow(f[0], f[1], int(f[2]), _parse_snr(f[3]), float(f[4]),
                                  float(f[5]), int(f[6]), int(f[7]), float(f[8])))
        return cls(rows)

    def lookup(self, method, recon, m, snr_db) -> ResultRow:
        for r in self.rows:
            if (r.method, r.recon, r.m) == (method, recon, m) and (
                    r.snr_db == snr_db or (math.isinf(r.snr_db) and math.isinf(snr_db))):
                return r
        raise KeyError((method, recon, m, snr_db))

    def plot_tables(self) -> Dict[str, str]:
        """Tidy ``m, method, mean_mse, stderr`` tables, one per (recon, snr) panel."""
        out = {}
        keys = []
        for r in self.rows:
            key = (r.recon, r.snr_db)
            if key not in keys:
                keys.append(key)
        for recon, snr in keys:
            buf = io.StringIO()
            w = csv.writer(buf, lineterminator="\n")
            w.writerow(["m", "method", "mean_mse", "stderr"])
            for r in self.rows:
                if r.recon == recon and (r.snr_db == snr or (math.isinf(r.snr_db) and math.isinf(snr))):
                    w.writerow([r.m, r.method, repr(float(r.mean_mse)), repr(float(r.stderr))])
            snr_tag = "inf" if math.isinf(snr) else f"{snr:g}dB"
            out[f"{recon}_{snr_tag}"] = buf.getvalue()
        return out


def select(method: str, cfg: ExperimentConfig, spectrum, T, m: int) -> SamplingSet:
    if method == "mia":
        return mia_sample(T, m, cfg.trunc_L, mode=cfg.mia_mode)
    if method == "mfn":
        return mfn_sample(spectrum, m)
    if method == "eoptimal":
        return eopt_sample(spectrum, m)
    if method == "random":
        return random_sample(spectrum.basis.shape[0], m, derived_seed(cfg.master_seed, 2, m))
    raise ConfigError(f"unknown method {method!r}")


def run_experiment(cfg: ExperimentConfig, *, workers: Optional[int] = None,
                   base_dir: Optional[str] = None) -> ExperimentResult:
    """Run the full (method x recon x m x SNR x trial) sweep described by ``cfg``.

    Greedy selections are computed once at the largest budget and truncated,
    which is exact because a greedy run does not look at its budget. An
    unqualified sample set under LS recovery yields a row with ``nan``
    statistics and ``flag="unqualified"`` instead of an exception.
    """
    workers = threads_from_env() if workers is None else max(1, int(workers))
    g = build_graph(cfg.graph, base_dir)
    n = g.n
    if max(cfg.m_grid) > n or cfg.k > n:
        raise ConfigError(f"budgets and k must not exceed n = {n}")
    L = normalized_laplacian(g)
    spectrum = dense_spectrum(L, cfg.k)

    T = None
    lambda_k = spectrum.lambda_k
    if "mia" in cfg.methods or "mia" in cfg.recon:
        if cfg.lambda_k_method == "lanczos":
            lambda_k = lanczos_lambda_k(L, cfg.k, seed=derived_seed(cfg.master_seed, 3))
        T = lowpass_filter(L, lambda_k, cfg.poly_p, cfg.alpha)

    m_max = max(cfg.m_grid)
    greedy = [meth for meth in cfg.methods if meth != "random"]

    def timed_select(meth):
        t0 = time.perf_counter()
        s = select(meth, cfg, spectrum, T, m_max)
        return s, 1e3 * (time.perf_counter() - t0)

    if workers > 1 and len(greedy) > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            done = dict(zip(greedy, ex.map(timed_select, greedy)))
    else:
        done = {meth: timed_select(meth) for meth in greedy}
    selection_ms = {meth: done[meth][1] for meth in greedy}

    signals = [gen_bandlimited(spectrum, cfg.signal_mean, cfg.signal_std,
                               np.random.SeedSequence([cfg.master_seed, 0, t]))
               for t in range(cfg.trials)]

    rows: List[ResultRow] = []
    sets: Dict[str, List[int]] = {}
    for meth in cfg.methods:
        for recon in cfg.recon:
            for m in cfg.m_grid:
                if meth == "random":
                    s = select("random", cfg, spectrum, T, m)
                else:
                    s = done[meth][0].prefix(m)
                sets[f"{meth}:{m}"] = list(s.indices)
                t0 = time.perf_counter()
                try:
                    if recon == "ls":
                        R = ls_operator(spectrum, s)
                    else:
                        R = T[:, list(s.indices)] @ neumann_gamma(T, s.indices, cfg.trunc_L)
                except NotQualified:
                    R = None
                idx = np.asarray(s.indices)
                for j, snr in enumerate(cfg.snr_db_grid):
                    if R is None:
                        rows.append(ResultRow(meth, recon, m, snr, math.nan, math.nan,
                                              cfg.trials, cfg.master_seed, 0.0, "unqualified"))
                        continue
                    t1 = time.perf_counter()
                    errs = np.empty(cfg.trials)
                    for t, sig in enumerate(signals):
                        y, _ = add_noise(sig.x[idx], snr, sig.power,
                                         np.random.SeedSequence([cfg.master_seed, 1, j, t]))
                        errs[t] = mse(R @ y, sig.x)
                    se = float(np.std(errs, ddof=1) / np.sqrt(cfg.trials)) if cfg.trials > 1 else 0.0
                    elapsed = (t1 - t0) if j == 0 else 0.0
                    rows.append(ResultRow(meth, recon, m, snr, float(np.mean(errs)), se,
                                          cfg.trials, cfg.master_seed,
                                          1e3 * (elapsed + time.perf_counter() - t1)))
    info = {"n": n, "edges": g.num_edges, "lambda_k": lambda_k,
            "lambda_k_dense": spectrum.lambda_k, "selection_ms": selection_ms,
            "sample_sets": sets}
    return ExperimentResult(rows, info)
