"""Command-line interface: ``graphsamp {gen-graph,sample,reconstruct,bench,replay}``.

Exit codes
----------
0 success, 1 unexpected library error, 2 invalid arguments / config / input
file, 3 graph generation failed, 4 unqualified sample set (only under
``--require-qualified``, or LS recovery from an unqualified set), 5 shape
mismatch, 6 replay produced different bytes.

Every command writes ``<output>.manifest.json`` beside its primary output.
The manifest holds the resolved arguments, library versions and SHA-256
digests of inputs and outputs; ``graphsamp replay`` reruns from it and
compares digests.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import platform
import sys
import tempfile
import warnings
from importlib import metadata, resources

import numpy as np
from threadpoolctl import threadpool_limits

from . import errors as E
from .experiment import ExperimentConfig, run_experiment, threads_from_env
from .graph import (atomic_write_text, gen_community, gen_small_world, load_graph,
                    normalized_laplacian, save_graph)
from .reconstruct import ls_operator, mse
from .sampling import (METHODS, eopt_sample, is_qualified, mfn_sample, mia_sample,
                       neumann_gamma, random_sample, array_digest)
from .spectral import (DENSE_CAP, dense_spectrum, ideal_lowpass_exact, lanczos_lambda_k,
                       lowpass_filter)

EXIT_OK, EXIT_ERROR, EXIT_ARGS, EXIT_GEN, EXIT_QUAL, EXIT_SHAPE, EXIT_REPLAY = 0, 1, 2, 3, 4, 5, 6

MANIFEST_SUFFIX = ".manifest.json"
# which namespace entries name output files / directories, per command
OUTPUT_ARGS = {"gen-graph": ["out"], "sample": ["out"], "reconstruct": ["out", "report"],
               "bench": ["out", "plot_data"]}
INPUT_ARGS = {"gen-graph": [], "sample": ["graph"], "reconstruct": ["graph", "set", "obs", "truth"],
              "bench": ["config"]}


class CliError(Exception):
    def __init__(self, message, code=EXIT_ARGS):
        super().__init__(message)
        self.code = code


# --------------------------------------------------------------------------
# small helpers

def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return "sha256:" + h.hexdigest()


def _csv_without_timing(path) -> str:
    # digest of a results CSV with the wall_ms column dropped
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    head = lines[0].split(",")
    if "wall_ms" not in head:
        return sha256_file(path)
    col = head.index("wall_ms")
    kept = [",".join(f for i, f in enumerate(ln.split(",")) if i != col) if ln else ln
            for ln in lines]
    return "sha256:" + hashlib.sha256("\n".join(kept).encode()).hexdigest()


def _versions():
    out = {"python": platform.python_version()}
    for pkg in ("graphsamp", "numpy", "scipy", "networkx", "threadpoolctl"):
        try:
            out[pkg] = metadata.version(pkg)
        except metadata.PackageNotFoundError:
            out[pkg] = None
    return out


def _now():
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _json_dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _write_vector(path, v):
    atomic_write_text(path, "".join(f"{float(x)!r}\n" for x in v))


def _read_vector(path, what):
    try:
        with open(path, encoding="utf-8") as fh:
            vals = [float(t) for t in fh.read().split()]
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read {what} vector from {path}: {exc}") from None
    return np.array(vals, dtype=float)


def _load_graph(path):
    try:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            g = load_graph(path)
    except OSError as exc:
        raise CliError(f"cannot read graph: {exc}") from None
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return g


def _lambda_k(L, k, use_dense, seed):
    if use_dense:
        return dense_spectrum(L, k).lambda_k, "dense"
    return lanczos_lambda_k(L, k, seed=seed), "lanczos"


def resolve_config_path(name: str) -> str:
    """A config path, or the file name of a bundled config (``fig1b.json``)."""
    if os.path.exists(name):
        return os.path.abspath(name)
    bundled = resources.files("graphsamp") / "configs" / os.path.basename(name)
    if bundled.is_file():
        return str(bundled)
    raise CliError(f"config {name!r} not found (and no bundled config of that name)")


def bundled_configs():
    root = resources.files("graphsamp") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


# --------------------------------------------------------------------------
# commands; each returns (exit_code, outputs written)

def cmd_gen_graph(ns):
    if ns.n is None or ns.n < 1:
        raise CliError("--n must be a positive integer")
    try:
        if ns.model == "small-world":
            if ns.degree % 2 or not 0 < ns.degree < ns.n:
                raise CliError("--degree must be even and in (0, n)")
            if not 0.0 <= ns.p <= 1.0:
                raise CliError("--p must lie in [0, 1]")
            g = gen_small_world(ns.n, ns.degree, ns.p, ns.seed)
        else:
            if ns.communities < 2 or not (0 < ns.p_out <= ns.p_in <= 1):
                raise CliError("need --communities >= 2 and 0 < p_out <= p_in <= 1")
            g = gen_community(ns.n, ns.communities, ns.p_in, ns.p_out, ns.seed)
    except E.GenerationFailed as exc:
        raise CliError(str(exc), EXIT_GEN) from None
    save_graph(g, ns.out)
    print(f"wrote {ns.out}: n={g.n} edges={g.num_edges}")
    return EXIT_OK, [ns.out]


def cmd_sample(ns):
    if ns.method == "random" and ns.seed is None:
        raise CliError("--method random needs an explicit --seed")
    g = _load_graph(ns.graph)
    if not 1 <= ns.k <= g.n:
        raise CliError(f"--k must lie in [1, {g.n}]")
    if not 1 <= ns.m <= g.n:
        raise CliError(f"--m must lie in [1, {g.n}]")
    L = normalized_laplacian(g)
    basis = dense_spectrum(L, ns.k) if g.n <= DENSE_CAP else None
    extra = {"k": ns.k}
    if ns.method == "mia":
        lam, how = _lambda_k(L, ns.k, ns.dense, ns.lanczos_seed)
        T = lowpass_filter(L, lam, ns.poly_order, ns.alpha)
        s = mia_sample(T, ns.m, ns.trunc, mode=ns.mia_mode)
        extra.update(poly_order=ns.poly_order, alpha=ns.alpha, lambda_k=lam,
                     lambda_k_method=how)
        if how == "lanczos":
            extra["lanczos_seed"] = ns.lanczos_seed
    elif ns.method == "random":
        s = random_sample(g.n, ns.m, ns.seed)
    elif basis is None:
        raise CliError(f"method {ns.method!r} needs eigenvectors; n exceeds the dense cap")
    elif ns.method == "mfn":
        s = mfn_sample(basis, ns.m)
    else:
        s = eopt_sample(basis, ns.m)
    if basis is not None:
        extra["qualified"] = bool(is_qualified(s, basis))
    s.meta.update(extra)
    atomic_write_text(ns.out, s.to_json())
    print(f"wrote {ns.out}: method={ns.method} m={s.m}")
    if ns.require_qualified and not extra.get("qualified", False):
        print(f"error: sample set is not qualified (rank of sampled rows < K = {ns.k})",
              file=sys.stderr)
        return EXIT_QUAL, [ns.out]
    return EXIT_OK, [ns.out]


def cmd_reconstruct(ns):
    from .sampling import SamplingSet

    g = _load_graph(ns.graph)
    try:
        with open(ns.set, encoding="utf-8") as fh:
            sset = SamplingSet.from_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read sample set {ns.set}: {exc}") from None
    if sset.n != g.n:
        raise CliError(f"sample set is for n={sset.n}, graph has n={g.n}", EXIT_SHAPE)
    y = _read_vector(ns.obs, "observation")
    if y.shape != (sset.m,):
        raise CliError(f"expected {sset.m} observations, got {y.size}", EXIT_SHAPE)
    truth = None
    if ns.truth:
        truth = _read_vector(ns.truth, "ground-truth")
        if truth.shape != (g.n,):
            raise CliError(f"ground truth has {truth.size} entries, graph has {g.n}", EXIT_SHAPE)
    k = ns.k if ns.k is not None else sset.meta.get("k")
    if k is None:
        raise CliError("--k is required when the sample set does not record k")
    k = int(k)
    L = normalized_laplacian(g)
    report = {"recon": ns.recon, "n": g.n, "m": sset.m, "k": k}
    idx = list(sset.indices)
    if ns.recon == "ls":
        basis = dense_spectrum(L, k)
        try:
            x_hat = ls_operator(basis, sset) @ y
        except E.NotQualified as exc:
            raise CliError(str(exc), EXIT_QUAL) from None
    else:
        trunc = ns.trunc if ns.trunc is not None else (sset.trunc_L if sset.trunc_L is not None else 10)
        if ns.exact_filter:
            T = ideal_lowpass_exact(dense_spectrum(L, k))
        else:
            lam = sset.meta.get("lambda_k")
            if lam is None or int(sset.meta.get("k", k)) != k:
                lam = lanczos_lambda_k(L, k, seed=ns.lanczos_seed)
            T = lowpass_filter(L, float(lam), int(sset.meta.get("poly_order", 25)),
                               float(sset.meta.get("alpha", 30.0)))
        G = neumann_gamma(T, idx, trunc)
        x_hat = T[:, idx] @ (G @ y)
        digest = array_digest(G)
        report.update(L=trunc, exact_filter=bool(ns.exact_filter), gamma_digest=digest)
        recorded = sset.meta.get("gamma_digest")
        if recorded is not None and not ns.exact_filter and trunc == sset.trunc_L:
            report["gamma_digest_match"] = recorded == digest
            if recorded != digest:
                print("warning: recomputed Gamma_tilde differs from the one recorded "
                      "in the sample set", file=sys.stderr)
    if truth is not None:
        report["mse"] = mse(x_hat, truth)
    _write_vector(ns.out, x_hat)
    outputs = [ns.out]
    report_path = ns.report or ns.out + ".report.json"
    atomic_write_text(report_path, _json_dump(report))
    outputs.append(report_path)
    ns.report = report_path
    msg = f"wrote {ns.out}"
    if "mse" in report:
        msg += f": mse={report['mse']:.6g}"
    print(msg)
    return EXIT_OK, outputs


def cmd_bench(ns):
    path = resolve_config_path(ns.config)
    ns.config = path
    try:
        with open(path, encoding="utf-8") as fh:
            cfg = ExperimentConfig.from_dict(json.load(fh))
    except json.JSONDecodeError as exc:
        raise CliError(f"config is not valid JSON: {exc}") from None
    if ns.trials is not None:
        cfg.trials = ns.trials
        cfg.validate()
    workers = ns.workers if ns.workers is not None else threads_from_env()
    res = run_experiment(cfg, workers=workers, base_dir=os.path.dirname(path))
    atomic_write_text(ns.out, res.to_csv())
    outputs = [ns.out]
    if ns.plot_data:
        os.makedirs(ns.plot_data, exist_ok=True)
        stem = cfg.name or os.path.splitext(os.path.basename(path))[0]
        for key, text in res.plot_tables().items():
            p = os.path.join(ns.plot_data, f"{stem}_{key}.csv")
            atomic_write_text(p, text)
            outputs.append(p)
    ns.resolved_config = cfg.to_dict()
    ns.lambda_k = res.info["lambda_k"]
    flagged = sum(1 for r in res.rows if r.flag)
    print(f"wrote {ns.out}: {len(res.rows)} rows" + (f", {flagged} flagged" if flagged else ""))
    return EXIT_OK, outputs


COMMANDS = {"gen-graph": cmd_gen_graph, "sample": cmd_sample,
            "reconstruct": cmd_reconstruct, "bench": cmd_bench}


# --------------------------------------------------------------------------
# manifests and replay

def _digest_entry(command, path):
    ent = {"path": os.path.abspath(path), "sha256": sha256_file(path)}
    if path.endswith(".csv"):
        with open(path, encoding="utf-8") as fh:
            timed = "wall_ms" in fh.readline().strip().split(",")
        if timed:
            ent["sha256_without_timing"] = _csv_without_timing(path)
    return ent


def write_manifest(command, ns, outputs, started):
    args = {k: v for k, v in vars(ns).items() if k not in ("func", "command")}
    for key in INPUT_ARGS[command] + OUTPUT_ARGS[command]:
        if args.get(key):
            args[key] = os.path.abspath(args[key])
    inputs = [_digest_entry(command, args[k]) for k in INPUT_ARGS[command] if args.get(k)]
    seed = args.get("seed")
    if command == "bench":
        seed = args.get("resolved_config", {}).get("master_seed")
    man = {"command": command, "args": args, "master_seed": seed,
           "threads": threads_from_env(), "versions": _versions(),
           "started": started, "finished": _now(),
           "inputs": inputs, "outputs": [_digest_entry(command, p) for p in outputs]}
    path = outputs[0] + MANIFEST_SUFFIX
    atomic_write_text(path, _json_dump(man))
    return path


def cmd_replay(ns):
    try:
        with open(ns.manifest, encoding="utf-8") as fh:
            man = json.load(fh)
        command, args = man["command"], dict(man["args"])
    except (OSError, ValueError, KeyError) as exc:
        raise CliError(f"cannot read manifest {ns.manifest}: {exc}") from None
    if command not in COMMANDS:
        raise CliError(f"manifest names unknown command {command!r}")
    for ent in man.get("inputs", []):
        if not os.path.exists(ent["path"]) or sha256_file(ent["path"]) != ent["sha256"]:
            raise CliError(f"input {ent['path']} is missing or changed since the recorded run")

    out_dir = ns.out_dir or tempfile.mkdtemp(prefix="graphsamp-replay-")
    os.makedirs(out_dir, exist_ok=True)
    mapping = {}
    for key in OUTPUT_ARGS[command]:
        old = args.get(key)
        if old:
            new = os.path.join(out_dir, os.path.basename(old.rstrip(os.sep)))
            args[key] = new
            mapping[os.path.abspath(old)] = new
    for key in ("resolved_config", "lambda_k"):
        args.pop(key, None)
    rns = argparse.Namespace(**args)
    code, _ = COMMANDS[command](rns)

    same = True
    for ent in man["outputs"]:
        old = ent["path"]
        new = mapping.get(old)
        if new is None:
            # file inside a replayed output directory, or the reconstruct report
            for src, dst in mapping.items():
                if old.startswith(src.rstrip(os.sep) + os.sep):
                    new = os.path.join(dst, os.path.relpath(old, src))
        if new is None or not os.path.exists(new):
            print(f"MISSING  {old}")
            same = False
            continue
        if "sha256_without_timing" in ent:
            ok = _csv_without_timing(new) == ent["sha256_without_timing"]
            note = " (wall_ms column excluded)"
        else:
            ok = sha256_file(new) == ent["sha256"]
            note = ""
        print(f"{'SAME' if ok else 'DIFFERS'}  {old} -> {new}{note}")
        same &= ok
    if code != man.get("exit_code", EXIT_OK):
        print(f"exit code {code} differs from recorded {man.get('exit_code')}")
        same = False
    return (EXIT_OK if same else EXIT_REPLAY), []


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="graphsamp", description=__doc__.split("\n")[0],
                epilog="Exit codes: 2 arguments, 3 generation, 4 qualification, "
                       "5 shape, 6 replay mismatch.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-graph", help="generate a synthetic graph as an edge list")
    g.add_argument("--model", choices=["small-world", "community"], required=True)
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--degree", type=int, default=8, help="small-world lattice degree (even)")
    g.add_argument("--p", type=float, default=0.1, help="small-world rewiring probability")
    g.add_argument("--communities", type=int, default=10)
    g.add_argument("--p-in", type=float, default=0.2)
    g.add_argument("--p-out", type=float, default=0.002)
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--out", required=True)

    s = sub.add_parser("sample", help="select a sample set")
    s.add_argument("--graph", required=True)
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--method", choices=METHODS, default="mia")
    s.add_argument("--trunc", type=int, default=10, help="Neumann truncation order L")
    s.add_argument("--poly-order", type=int, default=25)
    s.add_argument("--alpha", type=float, default=30.0)
    s.add_argument("--dense", action="store_true", help="dense eigensolver for lambda_K")
    s.add_argument("--lanczos-seed", type=int, default=0)
    s.add_argument("--mia-mode", choices=["literal", "fast"], default="literal")
    s.add_argument("--seed", type=int, default=None, help="required for --method random")
    s.add_argument("--require-qualified", action="store_true")
    s.add_argument("--out", required=True)

    r = sub.add_parser("reconstruct", help="recover a signal from its samples")
    r.add_argument("--graph", required=True)
    r.add_argument("--set", required=True, help="sample-set JSON written by 'sample'")
    r.add_argument("--obs", required=True, help="observations, one value per line")
    r.add_argument("--recon", choices=["ls", "mia"], default="ls")
    r.add_argument("--k", type=int, default=None, help="defaults to the k stored in the set")
    r.add_argument("--trunc", type=int, default=None)
    r.add_argument("--exact-filter", action="store_true",
                   help="use V_K V_K^T instead of the polynomial filter (test oracle)")
    r.add_argument("--lanczos-seed", type=int, default=0)
    r.add_argument("--truth", default=None, help="ground-truth signal for an MSE report")
    r.add_argument("--out", required=True)
    r.add_argument("--report", default=None, help="defaults to <out>.report.json")

    b = sub.add_parser("bench", help="run a Monte-Carlo experiment config")
    b.add_argument("--config", required=True,
                   help=f"JSON config path or a bundled name: {', '.join(bundled_configs())}")
    b.add_argument("--out", required=True)
    b.add_argument("--plot-data", default=None, help="directory for per-panel tidy CSVs")
    b.add_argument("--trials", type=int, default=None, help="override the config's trial count")
    b.add_argument("--workers", type=int, default=None,
                   help="selector threads (default: GRAPHSAMP_THREADS or 1)")

    rp = sub.add_parser("replay", help="rerun a command from its manifest and compare outputs")
    rp.add_argument("manifest")
    rp.add_argument("--out-dir", default=None)
    return p


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    started = _now()
    try:
        # BLAS stays single-threaded so results never depend on the thread count
        with threadpool_limits(limits=1):
            if ns.command == "replay":
                code, _ = cmd_replay(ns)
                return code
            code, outputs = COMMANDS[ns.command](ns)
        man = write_manifest(ns.command, ns, outputs, started)
        if code != EXIT_OK:
            with open(man, encoding="utf-8") as fh:
                d = json.load(fh)
            d["exit_code"] = code
            atomic_write_text(man, _json_dump(d))
        return code
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except E.ShapeMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SHAPE
    except E.GenerationFailed as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GEN
    except (E.ConfigError, E.ParseError, E.SelfLoop, E.DuplicateEdge, E.BudgetExceedsN,
            E.InvalidCutoff, E.DimensionCap) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except E.GraphSampError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
