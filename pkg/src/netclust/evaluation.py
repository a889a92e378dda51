"""
Clustering error and the simulation harness.

A scenario is described by an :class:`ExperimentConfig`; :func:`run_scenario`
generates the graph collections, runs every configured method for every
seed, and returns a JSON-serializable report. :func:`compare_report` turns
one or more reports into a method-by-(error, time) table.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from .baselines import graph_stats_features, topeig_features
from .graphs import (DEFAULT_SMOOTH, BlockmodelGraphon, Graph, MixtureModel, SmoothGraphon,
                     _generator, sample_graphon, sample_mixture)
from .nclm import (MOMENT_FLOOR, feature_distance_matrix, graph_moments, kernel_spectral_cluster,
                   nclm_pipeline, tune_J)
from .ncge import ncge_pipeline

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

METHODS = ("cl-usvt", "cl-nbs", "cl-naive", "nclm", "topeig", "graphstats")
METHOD_ALIASES = {"ncge-usvt": "cl-usvt", "ncge-nbs": "cl-nbs", "ncge-naive": "cl-naive"}

SCENARIOS = ("sbm-eps", "smooth-eps", "theta-suite", "pseudo-corpus")

# Planted-partition settings (p, q, blocks, rho) of the simulated suite.
THETA_SUITE = (
    {"p": 0.1, "q": 0.05, "m": 2, "rho": 0.6},
    {"p": 0.1, "q": 0.05, "m": 2, "rho": 1.0},
    {"p": 0.1, "q": 0.05, "m": 8, "rho": 0.6},
    {"p": 0.2, "q": 0.1, "m": 8, "rho": 0.6},
)

# Four sparse "sources" with their own structure, density and size range.
PSEUDO_CORPUS = (
    {"name": "community", "B": [[1.0, 0.01], [0.01, 1.0]], "blocks": 10,
     "degree": 8, "n_range": [2500, 4000], "count": 11},
    {"name": "sparse", "B": [[1.0, 0.5], [0.5, 1.0]], "blocks": 4,
     "degree": 3, "n_range": [2000, 3500], "count": 11},
    {"name": "core-periphery", "B": [[1.0, 0.2], [0.2, 0.005]], "pi": [0.05, 0.95],
     "degree": 6, "n_range": [1500, 2500], "count": 17},
    {"name": "ego", "B": [[1.0, 0.5], [0.5, 0.1]], "pi": [0.2, 0.8],
     "degree": 25, "n_range": [350, 1200], "count": 10},
)


# ---------------------------------------------------------------------------
# Clustering error
# ---------------------------------------------------------------------------

def _encode(labels):
    uniq, codes = np.unique(np.asarray(labels), return_inverse=True)
    return codes, len(uniq)


def clustering_error(pred, truth, K: int | None = None) -> float:
    """
    Minimum normalized Hamming distance over relabelings of the prediction.

    Solved as a maximum-weight matching on the confusion matrix, which is
    equivalent to minimizing over all label permutations.
    """
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same length")
    if pred.size == 0:
        return 0.0
    pc, kp = _encode(pred)
    tc, kt = _encode(truth)
    size = max(kp, kt, K or 0)
    C = np.zeros((size, size), dtype=np.int64)
    np.add.at(C, (pc, tc), 1)
    rows, cols = linear_sum_assignment(C, maximize=True)
    return float((pred.size - C[rows, cols].sum()) / pred.size)


def clustering_error_bruteforce(pred, truth, K: int | None = None) -> float:
    """Reference implementation enumerating every label permutation."""
    pred, truth = np.asarray(pred), np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have the same length")
    if pred.size == 0:
        return 0.0
    pc, kp = _encode(pred)
    tc, kt = _encode(truth)
    size = max(kp, kt, K or 0)
    best = 1.0
    for perm in itertools.permutations(range(size)):
        best = min(best, float(np.count_nonzero(np.asarray(perm)[pc] != tc) / pc.size))
    return best


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------

class ConfigError(ValueError):
    """Invalid experiment configuration."""


@dataclass
class ExperimentConfig:
    """
    Parameters of one simulation scenario.

    ``scenario`` selects the generator:

    ``sbm-eps``
        Two planted partitions ``(p, q, m)`` with the second scaled by
        ``1 + eps``; ``T`` graphs on ``n`` shared nodes split by ``counts``.
    ``smooth-eps``
        Same with the smooth graphon ``smooth``.
    ``theta-suite``
        ``per_group`` graphs for each entry of ``thetas`` and each size in
        ``sizes``; truth is the setting, not the size.
    ``pseudo-corpus``
        Sparse groups described by ``corpus``, sizes drawn per graph.

    ``rho`` fixes the density multiplier of the eps scenarios; when it is
    None, it is calibrated so the first component has expected average
    degree ``target_degree``.
    """

    scenario: str = "sbm-eps"
    schema_version: int = SCHEMA_VERSION
    methods: list = field(default_factory=lambda: ["cl-usvt", "cl-nbs", "cl-naive"])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    K: int | None = None
    # eps scenarios
    p: float = 0.6
    q: float = 0.2
    m: int = 2
    smooth: str = DEFAULT_SMOOTH
    rho: float | None = None
    target_degree: float = 22.0
    eps: list = field(default_factory=lambda: [0.05, 0.10, 0.15])
    n: int = 150
    T: int = 20
    counts: list | None = field(default_factory=lambda: [13, 7])
    # theta suite
    thetas: list = field(default_factory=lambda: [dict(t) for t in THETA_SUITE])
    sizes: list = field(default_factory=lambda: [500, 1000])
    per_group: int = 20
    # pseudo corpus
    corpus: list = field(default_factory=lambda: [dict(g) for g in PSEUDO_CORPUS])
    # methods
    J: int = 5
    J_range: list | None = None
    floor: float = MOMENT_FLOOR
    topeig_J: int | None = None
    t_grid: list | None = None
    n_vectors: int | None = None
    estimator_params: dict = field(default_factory=dict)
    output_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}; expected one of {SCENARIOS}")
        self.methods = [METHOD_ALIASES.get(m, m) for m in self.methods]
        bad = [m for m in self.methods if m not in METHODS]
        if bad:
            raise ConfigError(f"unknown methods {bad}")
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.scenario in ("sbm-eps", "smooth-eps"):
            for v in (self.p, self.q):
                if not 0 <= v <= 1:
                    raise ConfigError("p and q must lie in [0, 1]")
            if self.m < 1 or self.n < 2 or self.T < 1:
                raise ConfigError("need m >= 1, n >= 2, T >= 1")
            if self.counts is not None and (len(self.counts) != 2 or sum(self.counts) != self.T):
                raise ConfigError("counts must have two entries summing to T")
            if self.rho is not None and not 0 < self.rho <= 1:
                raise ConfigError("rho must lie in (0, 1]")
            if not self.eps or any(e < 0 for e in self.eps):
                raise ConfigError("eps values must be nonnegative")
        elif self.scenario == "theta-suite":
            for th in self.thetas:
                if set(th) - {"p", "q", "m", "rho"} or not {"p", "q", "m", "rho"} <= set(th):
                    raise ConfigError(f"theta entries need keys p, q, m, rho: {th}")
                if not (0 <= th["p"] <= 1 and 0 <= th["q"] <= 1 and 0 < th["rho"] <= 1):
                    raise ConfigError(f"theta out of range: {th}")
            if self.per_group < 1 or not self.sizes or min(self.sizes) < 2:
                raise ConfigError("need per_group >= 1 and sizes >= 2")
        else:
            for grp in self.corpus:
                lo, hi = grp["n_range"]
                if not 2 <= lo <= hi or grp["count"] < 1 or grp["degree"] <= 0:
                    raise ConfigError(f"bad corpus group {grp.get('name')}")
        if not self.floor > 0:
            raise ConfigError("floor must be positive")
        if self.K is not None and self.K < 1:
            raise ConfigError("K must be positive")

    @property
    def num_classes(self) -> int:
        if self.K is not None:
            return self.K
        if self.scenario == "theta-suite":
            return len(self.thetas)
        if self.scenario == "pseudo-corpus":
            return len(self.corpus)
        return 2

    def params(self) -> list:
        """Swept parameter values (the eps list, or ``[None]``)."""
        return list(self.eps) if self.scenario.endswith("-eps") else [None]

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        if "schema_version" not in data:
            raise ConfigError("config must declare schema_version")
        if "T" in data and "counts" not in data:
            # a custom collection size without fixed counts samples the mixture
            data = {**data, "counts": None}
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    """Read an :class:`ExperimentConfig` from a ``.json`` or ``.toml`` file."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    try:
        if str(path).endswith(".toml"):
            try:
                import tomllib
            except ModuleNotFoundError:
                import tomli as tomllib
            data = tomllib.loads(raw.decode("utf-8"))
        else:
            data = json.loads(raw.decode("utf-8"))
    except ValueError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping")
    return ExperimentConfig.from_dict(data)


# ---------------------------------------------------------------------------
# Graph generation
# ---------------------------------------------------------------------------

def eps_components(cfg: ExperimentConfig, eps: float):
    """The two mixture components of an eps scenario."""
    if cfg.scenario == "sbm-eps":
        base = BlockmodelGraphon.planted_partition(cfg.p, cfg.q, cfg.m)
    else:
        base = SmoothGraphon(cfg.smooth)
    base = base.with_rho(cfg.rho) if cfg.rho is not None else base.calibrated(cfg.n, cfg.target_degree)
    rho2 = base.rho * (1 + eps)
    if rho2 * base.max_f() > 1 or rho2 > 1:
        raise ConfigError(f"eps={eps} pushes probabilities above 1")
    return base, base.with_rho(rho2)


def generate_collection(cfg: ExperimentConfig, seed: int, param=None) -> list[tuple[Graph, object]]:
    """Graphs with truth labels for one ``(seed, param)`` cell of ``cfg``."""
    if cfg.scenario.endswith("-eps"):
        model = MixtureModel(eps_components(cfg, param))
        return sample_mixture(model, cfg.T, cfg.n, seed, counts=cfg.counts)
    out = []
    idx = 0
    if cfg.scenario == "theta-suite":
        for s, th in enumerate(cfg.thetas, start=1):
            graphon = BlockmodelGraphon.planted_partition(th["p"], th["q"], th["m"], th["rho"])
            for n in cfg.sizes:
                for _ in range(cfg.per_group):
                    out.append((sample_graphon(graphon, n, seed, graph_index=idx), s))
                    idx += 1
        return out
    for s, grp in enumerate(cfg.corpus, start=1):
        B = np.asarray(grp["B"], dtype=float)
        if "blocks" in grp:
            # two-level pattern expanded to a planted partition with `blocks` blocks
            B = (B[0, 0] - B[0, 1]) * np.eye(grp["blocks"]) + B[0, 1]
        base = BlockmodelGraphon(B, grp.get("pi"))
        lo, hi = grp["n_range"]
        sizes = _generator(seed, 3, s).integers(lo, hi + 1, size=grp["count"])
        for n in sizes:
            graphon = base.calibrated(int(n), grp["degree"])
            out.append((sample_graphon(graphon, int(n), seed, graph_index=idx), s))
            idx += 1
    return out


# ---------------------------------------------------------------------------
# Running methods
# ---------------------------------------------------------------------------

def run_method(method: str, graphs: Sequence[Graph], K: int, cfg: ExperimentConfig,
               seed: int, moments=None):
    """
    Cluster ``graphs`` with ``method``.

    Returns ``(labels, stage_times, diagnostics)``.
    """
    method = METHOD_ALIASES.get(method, method)
    if method.startswith("cl-"):
        est = method[3:]
        res = ncge_pipeline(graphs, est, K, seed, **cfg.estimator_params.get(est, {}))
        return res.labels, res.diagnostics["time"], {}
    if method == "nclm":
        res = nclm_pipeline(graphs, cfg.J, K, cfg.t_grid, seed, n_vectors=cfg.n_vectors,
                            floor=cfg.floor, moments=moments)
        diag = {"t": res.diagnostics.get("t"), "gap": res.diagnostics.get("gap")}
        return res.labels, res.diagnostics["time"], diag
    t0 = time.perf_counter()
    if method == "topeig":
        J = cfg.topeig_J or cfg.J
        feats = [topeig_features(g, J) for g in graphs]
    elif method == "graphstats":
        feats = [graph_stats_features(g) for g in graphs]
    else:
        raise ValueError(f"unknown method {method!r}")
    t1 = time.perf_counter()
    D = feature_distance_matrix(feats)
    t2 = time.perf_counter()
    res = kernel_spectral_cluster(D, K, cfg.t_grid, seed, cfg.n_vectors, method=method)
    times = {"featurize": t1 - t0, "distance": t2 - t1, **res.diagnostics["time"]}
    diag = {"t": res.diagnostics.get("t"), "gap": res.diagnostics.get("gap")}
    flagged = sum(1 for f in feats if f.flags)
    if flagged:
        diag["flagged_graphs"] = flagged
    return res.labels, times, diag


def _clean(obj):
    """Make ``obj`` JSON-safe: numpy scalars to Python, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def run_scenario(cfg: ExperimentConfig) -> dict:
    """
    Generate every ``(seed, param)`` collection and run every method on it.

    A failing method is recorded in its cell (``status``) and the run goes
    on. When ``cfg.output_dir`` is set the report is also written there.
    """
    K = cfg.num_classes
    report = {"schema_version": SCHEMA_VERSION, "scenario": cfg.scenario,
              "config": cfg.to_dict(), "generation": [], "cells": [], "gaps": []}
    for param in cfg.params():
        for seed in cfg.seeds:
            t0 = time.perf_counter()
            data = generate_collection(cfg, seed, param)
            gen_time = time.perf_counter() - t0
            graphs = [g for g, _ in data]
            truth = np.array([lab for _, lab in data])
            report["generation"].append({
                "seed": seed, "param": param, "graphs": len(graphs),
                "sizes": sorted({g.n for g in graphs}),
                "mean_degree": float(np.mean([2 * g.num_edges / g.n for g in graphs])),
                "time": {"generate": gen_time}})
            moments = None
            if "nclm" in cfg.methods or cfg.J_range:
                Jmax = max([cfg.J] + list(cfg.J_range or []))
                t0 = time.perf_counter()
                moments = [graph_moments(g, Jmax) for g in graphs]
                mom_time = time.perf_counter() - t0
            if cfg.J_range:
                tj = tune_J(None, K, cfg.J_range, cfg.t_grid, moments=moments, floor=cfg.floor)
                for J in sorted(tj.gaps):
                    report["gaps"].append({"seed": seed, "param": param, "J": J,
                                           "gap": tj.gaps[J], "t": tj.t[J],
                                           "chosen": J == tj.J})
            for method in cfg.methods:
                cell = {"seed": seed, "param": param, "method": method}
                try:
                    labels, times, diag = run_method(method, graphs, K, cfg, seed, moments)
                    if method == "nclm":
                        times = {**times, "featurize": mom_time}
                    cell.update(status="ok", error=clustering_error(labels, truth, K),
                                labels=labels, diagnostics=diag, time=times)
                except Exception as exc:  # recorded per cell; the run continues
                    logger.warning("%s failed on seed %s: %s", method, seed, exc)
                    cell.update(status=f"failed: {exc}", error=None, labels=None,
                                diagnostics={}, time={})
                report["cells"].append(cell)
    report["summary"] = summarize(report)
    report = _clean(report)
    if cfg.output_dir:
        write_report(report, cfg.output_dir)
    return report


def summarize(report: dict) -> list[dict]:
    """Mean and standard deviation of error and total time per (method, param)."""
    groups: dict = {}
    for cell in report["cells"]:
        groups.setdefault((cell["method"], cell["param"]), []).append(cell)
    rows = []
    for (method, param), cells in groups.items():
        errs = [c["error"] for c in cells if c["error"] is not None]
        tims = [sum(c["time"].values()) for c in cells if c["error"] is not None]
        rows.append({"method": method, "param": param, "runs": len(cells), "ok": len(errs),
                     "error_mean": float(np.mean(errs)) if errs else None,
                     "error_std": float(np.std(errs)) if errs else None,
                     "time_mean": float(np.mean(tims)) if tims else None})
    return rows


def strip_timing(report: dict) -> dict:
    """Copy of ``report`` without wall-clock fields (for reproducibility checks)."""
    def walk(obj):
        if isinstance(obj, dict):
            return {k: walk(v) for k, v in obj.items() if k not in ("time", "time_mean")}
        if isinstance(obj, list):
            return [walk(v) for v in obj]
        return obj
    return walk(report)


def write_report(report: dict, out_dir) -> None:
    """Write ``report.json``, ``errors.csv`` and ``gaps.csv`` into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "errors.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "param", "method", "error", "status"])
        for c in report["cells"]:
            w.writerow([c["seed"], "" if c["param"] is None else c["param"], c["method"],
                        "" if c["error"] is None else repr(c["error"]), c["status"]])
    with open(os.path.join(out_dir, "gaps.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["seed", "param", "J", "gap", "t", "chosen"])
        for r in report["gaps"]:
            w.writerow([r["seed"], "" if r["param"] is None else r["param"], r["J"],
                        r["gap"], r["t"], int(r["chosen"])])


def load_report(path) -> dict:
    """Read a ``report.json`` (or the one inside a run directory)."""
    if os.path.isdir(path):
        path = os.path.join(path, "report.json")
    with open(path, encoding="utf-8") as fh:
        report = json.load(fh)
    for key in ("scenario", "cells"):
        if key not in report:
            raise ValueError(f"{path}: not a scenario report (missing {key!r})")
    if "summary" not in report:
        report["summary"] = summarize(report)
    return report


# ---------------------------------------------------------------------------
# Comparison tables
# ---------------------------------------------------------------------------

MISSING = "n/a"


@dataclass
class ComparisonTable:
    scenario: str
    rows: list

    columns = ("method", "param", "error", "error_std", "time_s", "runs")

    def _cells(self, row):
        def fmt(v, spec):
            return MISSING if v is None else format(v, spec)
        return [row["method"], "" if row["param"] is None else str(row["param"]),
                fmt(row["error_mean"], ".3f"), fmt(row["error_std"], ".3f"),
                fmt(row["time_mean"], ".2f"), str(row["runs"])]

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow(self._cells(row))
        return buf.getvalue()

    def to_text(self) -> str:
        body = [list(self.columns)] + [self._cells(r) for r in self.rows]
        widths = [max(len(r[i]) for r in body) for i in range(len(self.columns))]
        lines = [f"scenario: {self.scenario}"]
        for k, r in enumerate(body):
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * w for w in widths))
        return "\n".join(lines) + "\n"


def compare_report(reports: Sequence[dict]) -> ComparisonTable:
    """
    Merge reports of one scenario into a method x (error, time) table.

    Rows are ordered by parameter, then error, then time; methods with no
    successful run show :data:`MISSING`.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("no reports given")
    scenarios = {r["scenario"] for r in reports}
    if len(scenarios) > 1:
        raise ValueError(f"reports come from different scenarios: {sorted(scenarios)}")
    merged = {"cells": [c for r in reports for c in r["cells"]]}
    rows = summarize(merged)

    def key(row):
        inf = float("inf")
        param = row["param"]
        return (param is not None, param if param is not None else 0,
                inf if row["error_mean"] is None else row["error_mean"],
                inf if row["time_mean"] is None else row["time_mean"], row["method"])

    return ComparisonTable(scenarios.pop(), sorted(rows, key=key))
