"""
Command-line interface.

Subcommands::

    netclust simulate CONFIG OUT_DIR      write sampled graphs, manifest and truth labels
    netclust run CONFIG OUT_DIR           run a full scenario and write its report
    netclust cluster MANIFEST --method M --K K --out DIR
    netclust tune MANIFEST --K K --out DIR
    netclust report RUN_DIR [RUN_DIR ...]

Exit codes: 0 success, 2 bad configuration or input, 3 node correspondence
required, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .baselines import graph_stats_features, topeig_features
from .estimation import estimate, load_lpm, save_lpm
from .evaluation import (METHOD_ALIASES, ConfigError, clustering_error, compare_report,
                         generate_collection, load_config, load_report, run_scenario)
from .formats import save_features_csv, save_labels_csv, save_matrix_csv
from .graphs import load_edge_list, read_manifest, save_edge_list, write_manifest
from .nclm import (MOMENT_FLOOR, FeatureVector, MomentVector, feature_distance_matrix,
                   graph_moments, kernel_spectral_cluster, log_features, tune_J)
from .ncge import (NodeCorrespondenceError, check_correspondence, frobenius_distance_matrix,
                   spectral_cluster_distance)

logger = logging.getLogger("netclust")

EXIT_OK, EXIT_INPUT, EXIT_PRECONDITION, EXIT_NUMERIC = 0, 2, 3, 4

CLUSTER_METHODS = ("ncge-usvt", "ncge-nbs", "ncge-naive", "nclm", "topeig", "graphstats")


class InputError(Exception):
    """Bad command-line input (exit code 2)."""


# ---------------------------------------------------------------------------
# Cache
# ---------------------------------------------------------------------------

def default_cache_dir() -> str:
    return os.environ.get("NETCLUST_CACHE_DIR") or os.path.join(
        os.path.expanduser("~"), ".cache", "netclust")


class Cache:
    """
    On-disk store keyed by (file content hash, kind, parameters).

    Arrays go to ``.npz`` files, link-probability estimates to ``.lpm``.
    A disabled cache computes every value.
    """

    def __init__(self, root: str | None):
        self.root = root
        if root:
            os.makedirs(root, exist_ok=True)

    @staticmethod
    def file_hash(path) -> str:
        h = hashlib.sha256()
        with open(path, "rb") as fh:
            for block in iter(lambda: fh.read(1 << 20), b""):
                h.update(block)
        return h.hexdigest()

    def _path(self, digest: str, kind: str, params: dict, ext: str) -> str:
        key = json.dumps([digest, kind, params], sort_keys=True)
        return os.path.join(self.root, hashlib.sha256(key.encode()).hexdigest()[:32] + ext)

    def arrays(self, digest, kind, params, compute):
        if not self.root:
            return compute()
        path = self._path(digest, kind, params, ".npz")
        if os.path.exists(path):
            with np.load(path) as data:
                return {k: data[k] for k in data.files}
        value = compute()
        tmp = path + f".{os.getpid()}.tmp.npz"
        np.savez(tmp, **value)
        os.replace(tmp, path)
        return value

    def lpm(self, digest, kind, params, compute):
        if not self.root:
            return compute()
        path = self._path(digest, kind, params, ".lpm")
        if os.path.exists(path):
            return load_lpm(path)
        value = compute()
        tmp = path + f".{os.getpid()}.tmp"
        save_lpm(value, tmp)
        os.replace(tmp, path)
        return value


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _parse_grid(text):
    if text is None:
        return None
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--t-grid must be comma-separated numbers, got {text!r}") from None
    if not grid or any(not 0 < t < float("inf") for t in grid):
        raise InputError("--t-grid values must be positive and finite")
    return grid


class Collection:
    """Graphs listed in a manifest, with ids, truth labels and content hashes."""

    def __init__(self, manifest, jobs: int = 1):
        entries = read_manifest(manifest)
        base = os.path.dirname(os.path.abspath(manifest))
        self.paths = [p for p, _ in entries]
        self.ids = [os.path.relpath(p, base) for p in self.paths]
        labels = [lab for _, lab in entries]
        self.truth = np.array(labels) if all(lab is not None for lab in labels) else None
        self.jobs = max(1, jobs)
        self.graphs = self.map(load_edge_list, self.paths)
        self.hashes = self.map(Cache.file_hash, self.paths)

    def map(self, fn, *iterables):
        # ordered results regardless of the number of workers
        if self.jobs == 1:
            return list(map(fn, *iterables))
        with ThreadPoolExecutor(self.jobs) as pool:
            return list(pool.map(fn, *iterables))

    def moments(self, J: int, cache: Cache) -> list[MomentVector]:
        def one(g, digest):
            data = cache.arrays(digest, "moments", {"J": J},
                                lambda: {"values": graph_moments(g, J).values})
            return MomentVector(J, data["values"], g.n)
        return self.map(one, self.graphs, self.hashes)

    def features(self, method: str, J: int, cache: Cache) -> list[FeatureVector]:
        def one(g, digest):
            if method == "topeig":
                data = cache.arrays(digest, "topeig", {"J": J},
                                    lambda: {"values": topeig_features(g, J).values})
                return FeatureVector("topeig", data["values"], J)

            def compute():
                f = graph_stats_features(g)
                return {"values": f.values, "flags": np.array(f.flags, dtype=str)}
            data = cache.arrays(digest, "graphstats", {}, compute)
            return FeatureVector("graphstats", data["values"], len(data["values"]),
                                 tuple(str(s) for s in data["flags"]))
        return self.map(one, self.graphs, self.hashes)

    def estimates(self, estimator: str, params: dict, cache: Cache) -> list[np.ndarray]:
        def one(g, digest):
            return cache.lpm(digest, f"estimate-{estimator}", params,
                             lambda: estimate(g, estimator, **params))
        return self.map(one, self.graphs, self.hashes)


def _estimator_params(args, estimator):
    if estimator == "usvt" and args.eta is not None:
        return {"eta": args.eta}
    if estimator == "nbs" and args.C0 is not None:
        return {"C0": args.C0}
    return {}


def _write_json(path, obj):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(x):
    if isinstance(x, np.ndarray):
        return [_jsonable(v) for v in x.tolist()]
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (float, np.floating)):
        v = float(x)
        return v if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    return x


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    seed = cfg.seeds[0] if args.seed is None else args.seed
    params = cfg.params()
    param = params[0] if args.eps is None else args.eps
    data = generate_collection(cfg, seed, param)
    gdir = os.path.join(args.out, "graphs")
    os.makedirs(gdir, exist_ok=True)
    width = max(4, len(str(len(data) - 1)))
    entries = []
    for i, (g, label) in enumerate(data):
        rel = os.path.join("graphs", f"g{i:0{width}d}.txt")
        save_edge_list(g, os.path.join(args.out, rel))
        entries.append((rel, label))
    write_manifest(os.path.join(args.out, "manifest.csv"), entries)
    save_labels_csv([p for p, _ in entries], [lab for _, lab in entries],
                    os.path.join(args.out, "truth.csv"))
    print(f"wrote {len(data)} graphs ({cfg.scenario}, seed={seed}"
          + (f", eps={param}" if param is not None else "") + f") to {args.out}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    cfg.output_dir = args.out
    if args.seed is not None:
        cfg.seeds = [args.seed]
    report = run_scenario(cfg)
    print(compare_report([report]).to_text(), end="")
    return EXIT_OK


def cmd_cluster(args) -> int:
    method = args.method
    t_grid = _parse_grid(args.t_grid)
    if args.K < 1:
        raise InputError("--K must be positive")
    cache = Cache(None if args.no_cache else (args.cache_dir or default_cache_dir()))
    t0 = time.perf_counter()
    col = Collection(args.manifest, args.jobs)
    timing = {"load": time.perf_counter() - t0}
    os.makedirs(args.out, exist_ok=True)
    summary = {"method": method, "K": args.K, "T": len(col.graphs), "seed": args.seed}

    if method.startswith("ncge-"):
        estimator = method[5:]
        check_correspondence(col.graphs)
        params = _estimator_params(args, estimator)
        t0 = time.perf_counter()
        ps = col.estimates(estimator, params, cache)
        t1 = time.perf_counter()
        D = frobenius_distance_matrix(ps)
        t2 = time.perf_counter()
        res = spectral_cluster_distance(D, args.K, args.seed)
        timing.update(estimate=t1 - t0, distance=t2 - t1, cluster=time.perf_counter() - t2)
        summary["estimator_params"] = params
    else:
        J = args.J
        t0 = time.perf_counter()
        if method == "nclm":
            moments = col.moments(J, cache)
            feats = [log_features(m, J, args.floor) for m in moments]
        else:
            feats = col.features(method, J, cache)
        t1 = time.perf_counter()
        D = feature_distance_matrix(feats)
        t2 = time.perf_counter()
        res = kernel_spectral_cluster(D, args.K, t_grid, args.seed, args.n_vectors,
                                      method=method)
        timing.update(featurize=t1 - t0, distance=t2 - t1, **res.diagnostics["time"])
        save_features_csv(col.ids, feats, os.path.join(args.out, "features.csv"))
        save_matrix_csv(res.diagnostics["kernel"], col.ids, os.path.join(args.out, "kernel.csv"))
        diag = res.diagnostics
        summary.update(J=J if method != "graphstats" else None, t=diag["t"],
                       gap=diag.get("gap"), t_grid=diag.get("t_grid"), t_gaps=diag.get("t_gaps"))
        flagged = {i: f.flags for i, f in zip(col.ids, feats) if f.flags}
        if flagged:
            summary["flagged"] = flagged
    save_matrix_csv(D, col.ids, os.path.join(args.out, "distance.csv"))
    save_labels_csv(col.ids, res.labels, os.path.join(args.out, "labels.csv"))
    if col.truth is not None:
        summary["error"] = clustering_error(res.labels, col.truth, args.K)
    _write_json(os.path.join(args.out, "summary.json"),
                {k: _jsonable(v) for k, v in summary.items()})
    timing["total"] = sum(timing.values())
    _write_json(os.path.join(args.out, "timing.json"), timing)

    print(f"method={method} K={args.K} T={len(col.graphs)}")
    if "t" in summary:
        print(f"t*={summary['t']:.6g} gap={summary.get('gap')}")
    print("time: " + " ".join(f"{k}={v:.3f}s" for k, v in timing.items()))
    if "error" in summary:
        print(f"clustering error: {summary['error']:.4f}")
    return EXIT_OK


def cmd_tune(args) -> int:
    t_grid = _parse_grid(args.t_grid)
    if not 2 <= args.J_min <= args.J_max:
        raise InputError("need 2 <= --J-min <= --J-max")
    cache = Cache(None if args.no_cache else (args.cache_dir or default_cache_dir()))
    col = Collection(args.manifest, args.jobs)
    if len(col.graphs) < args.K + 1:
        raise InputError(f"tuning needs at least K+1={args.K + 1} graphs, got {len(col.graphs)}")
    moments = col.moments(args.J_max, cache)
    res = tune_J(None, args.K, range(args.J_min, args.J_max + 1), t_grid,
                 moments=moments, floor=args.floor)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "gaps.csv"), "w", encoding="utf-8") as fh:
        fh.write("J,gap,t,chosen\n")
        for J in sorted(res.gaps):
            fh.write(f"{J},{res.gaps[J]!r},{res.t[J]!r},{int(J == res.J)}\n")
    print(f"{'J':>3}  {'gap':>12}  {'t':>12}")
    for J in sorted(res.gaps):
        mark = "  *" if J == res.J else ""
        print(f"{J:>3}  {res.gaps[J]:>12.6g}  {res.t[J]:>12.6g}{mark}")
    print(f"J*={res.J} t*={res.t[res.J]:.6g}")
    return EXIT_OK


def cmd_report(args) -> int:
    reports = []
    for d in args.runs:
        try:
            reports.append(load_report(d))
        except (OSError, ValueError) as exc:
            raise InputError(f"cannot read report from {d}: {exc}") from None
    table = compare_report(reports)
    text = table.to_text()
    print(text, end="")
    out = args.out or "."
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "comparison.csv"), "w", encoding="utf-8") as fh:
        fh.write(table.to_csv())
    with open(os.path.join(out, "comparison.txt"), "w", encoding="utf-8") as fh:
        fh.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _add_common(p, J_default=5):
    p.add_argument("--t-grid", help="comma-separated kernel bandwidths (default: data-driven)")
    p.add_argument("--floor", type=float, default=MOMENT_FLOOR,
                   help="floor applied to moments before taking logs")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for per-graph work")
    p.add_argument("--cache-dir", help="cache directory (default: $NETCLUST_CACHE_DIR)")
    p.add_argument("--cache", dest="no_cache", action="store_false", help="use the cache (default)")
    p.add_argument("--no-cache", dest="no_cache", action="store_true", help="bypass the cache")
    p.set_defaults(no_cache=False)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="netclust", description="Cluster collections of networks.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a scenario's graphs to edge-list files")
    p.add_argument("config")
    p.add_argument("out")
    p.add_argument("--seed", type=int)
    p.add_argument("--eps", type=float, help="perturbation for eps scenarios (default: first)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("run", help="run a full scenario and write report.json, errors.csv, gaps.csv")
    p.add_argument("config")
    p.add_argument("out")
    p.add_argument("--seed", type=int, help="restrict the run to one seed")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("cluster", help="cluster the graphs of a manifest")
    p.add_argument("manifest")
    p.add_argument("--method", required=True,
                   choices=CLUSTER_METHODS + tuple(k for k in METHOD_ALIASES.values()))
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--J", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n-vectors", type=int, help="kernel eigenvectors used (default K)")
    p.add_argument("--eta", type=float, help="USVT threshold slack")
    p.add_argument("--C0", type=float, help="NBS bandwidth constant")
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("tune", help="choose the moment order J by the relative eigengap")
    p.add_argument("manifest")
    p.add_argument("--K", type=int, required=True)
    p.add_argument("--J-max", type=int, default=8)
    p.add_argument("--J-min", type=int, default=2)
    p.add_argument("--out", required=True)
    _add_common(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("report", help="compare the reports of one or more runs")
    p.add_argument("runs", nargs="+")
    p.add_argument("--out", help="directory for comparison.csv/.txt (default: current)")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "method", None):
        inverse = {v: k for k, v in METHOD_ALIASES.items()}
        args.method = inverse.get(args.method, args.method)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "jobs", 1) < 1:
        print("error: --jobs must be at least 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except NodeCorrespondenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (InputError, ConfigError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
