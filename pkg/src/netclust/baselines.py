"""
Comparison featurizers: top eigenvalues and six classical graph statistics.
"""
from __future__ import annotations

import logging
import math

import numpy as np

from .graphs import Graph, largest_connected_component
from .linalg import sym_eigvals
from .nclm import FeatureVector, log_moment_features

logger = logging.getLogger(__name__)

GRAPH_STATS = (
    "algebraic_connectivity",
    "global_clustering",
    "local_clustering",
    "distance_distribution",
    "assortativity",
    "rich_club",
)


def topeig_features(g: Graph, J: int) -> FeatureVector:
    """The ``J`` largest-magnitude eigenvalues of ``A/n`` (signed, positive first on ties)."""
    if J > g.n:
        raise ValueError(f"J={J} exceeds n={g.n}")
    if g.num_edges == 0:
        return FeatureVector("topeig", np.zeros(J), J)
    lam = sym_eigvals(g.to_dense() / g.n, mode="largest-magnitude")
    return FeatureVector("topeig", lam[:J], J)


def algebraic_connectivity(g: Graph) -> float:
    """Second smallest eigenvalue of the normalized Laplacian of the largest component."""
    lcc = largest_connected_component(g)
    if lcc.n < 2:
        raise ValueError("largest connected component is a single node")
    A = lcc.to_dense()
    s = 1.0 / np.sqrt(A.sum(axis=1))
    L = np.eye(lcc.n) - s[:, None] * A * s[None, :]
    return float(sym_eigvals(L, mode="smallest-algebraic")[1])


def triangles_per_node(g: Graph) -> np.ndarray:
    A = g.adjacency
    return np.asarray((A @ A).multiply(A).sum(axis=1)).ravel() / 2.0


def clustering_coefficients(g: Graph) -> tuple[float, float]:
    """
    Global (transitivity) and average local clustering coefficients.

    Nodes of degree below 2 are left out of the local average; a graph
    without connected triples gets 0 for both.
    """
    tri = triangles_per_node(g)
    deg = g.degrees.astype(float)
    triples = deg * (deg - 1) / 2.0
    total = triples.sum()
    glob = float(tri.sum() / total) if total > 0 else 0.0
    ok = deg >= 2
    # fsum keeps the average independent of node order
    local = math.fsum(tri[ok] / triples[ok]) / ok.sum() if ok.any() else 0.0
    return glob, local


def distance_distribution(g: Graph, h: int = 3) -> float:
    """Fraction of unordered node pairs within ``h`` hops of each other."""
    if h < 1:
        raise ValueError("h must be at least 1")
    n = g.n
    if n < 2:
        return 0.0
    A = g.adjacency.astype(np.float32)
    reach = np.eye(n, dtype=np.float32)
    for _ in range(h):
        step = np.asarray(A @ reach)
        new = ((reach + step) > 0).astype(np.float32)
        if np.array_equal(new, reach):
            break
        reach = new
    within = (np.count_nonzero(reach) - n) / 2
    return float(within / (n * (n - 1) / 2))


def assortativity(g: Graph) -> float:
    """
    Degree assortativity: Pearson correlation of endpoint degrees.

    Each edge contributes both orientations, so both marginals coincide.
    The moments are accumulated in integers, which makes the value exact
    under node relabeling. Regular graphs (zero variance) return 0.
    """
    if g.num_edges == 0:
        raise ValueError("assortativity needs at least one edge")
    deg = g.degrees.astype(object)  # Python ints: no overflow, exact sums
    du, dv = deg[g.edges[:, 0]], deg[g.edges[:, 1]]
    m2 = 2 * g.num_edges
    s1 = int(np.sum(du + dv))
    s2 = int(np.sum(du * du + dv * dv))
    sxy = int(np.sum(2 * du * dv))
    var = m2 * s2 - s1 * s1
    if var == 0:
        return 0.0
    r = (m2 * sxy - s1 * s1) / var
    return float(min(1.0, max(-1.0, r)))


def nearest_rank_quantile(values, q: float) -> float:
    """Type-1 (nearest-rank) empirical quantile."""
    v = np.sort(np.asarray(values))
    if v.size == 0:
        raise ValueError("empty sample")
    rank = max(1, math.ceil(q * v.size))
    return float(v[rank - 1])


def rich_club(g: Graph, quantile: float = 0.8) -> float:
    """
    Edge density among nodes whose degree exceeds the degree ``quantile``.

    Returns 0 when at most one node qualifies.
    """
    if g.n == 0:
        return 0.0
    deg = g.degrees
    tau = nearest_rank_quantile(deg, quantile)
    S = np.flatnonzero(deg > tau)
    s = len(S)
    if s <= 1:
        return 0.0
    sub = g.subgraph(S)
    return float(sub.num_edges / (s * (s - 1) / 2))


def graph_stats_features(g: Graph, h: int = 3, quantile: float = 0.8) -> FeatureVector:
    """
    Six-statistic summary, in the order of :data:`GRAPH_STATS`.

    A statistic that cannot be computed is set to 0 and its name recorded
    in ``flags``.
    """
    glob, local = clustering_coefficients(g)
    values = {"global_clustering": glob, "local_clustering": local,
              "distance_distribution": distance_distribution(g, h),
              "rich_club": rich_club(g, quantile)}
    flags = []
    for name, fn in (("algebraic_connectivity", algebraic_connectivity),
                     ("assortativity", assortativity)):
        try:
            values[name] = fn(g)
        except ValueError as exc:
            logger.warning("%s undefined for %r: %s", name, g, exc)
            values[name] = 0.0
            flags.append(name)
    return FeatureVector("graphstats", [values[k] for k in GRAPH_STATS], len(GRAPH_STATS),
                         tuple(flags))


def featurize(g: Graph, method: str, J: int | None = None) -> FeatureVector:
    """Feature vector for ``method`` in ``{'nclm', 'topeig', 'graphstats'}``."""
    if method == "nclm":
        return log_moment_features(g, J or 5)
    if method == "topeig":
        return topeig_features(g, J or 5)
    if method == "graphstats":
        return graph_stats_features(g)
    raise ValueError(f"unknown feature method {method!r}")
