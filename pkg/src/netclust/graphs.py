"""
Graph containers, edge-list ingestion and random graph generation.

Graphs are simple, undirected and unweighted. Edges are stored once as
``(i, j)`` pairs with ``i < j`` in lexicographic order; the adjacency matrix
is built lazily as a ``scipy.sparse.csr_matrix``.

Random graphs follow the latent-position (graphon) model: each node gets a
latent value ``xi ~ Uniform(0, 1)``, the link probability between ``i`` and
``j`` is ``rho * f(xi_i, xi_j)``, and edges are independent Bernoulli draws.
"""
from __future__ import annotations

import csv
import logging
import os
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

logger = logging.getLogger(__name__)

# Rows of the link-probability matrix generated per chunk while sampling.
_ROW_CHUNK = 256


class EdgeListError(ValueError):
    """Raised when an edge-list or manifest file cannot be parsed."""


# ---------------------------------------------------------------------------
# Graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Graph:
    """
    Simple undirected graph on nodes ``0..n-1``.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : array_like, shape (m, 2)
        Canonical edge array, ``i < j``, lexicographically sorted, no
        duplicates. Use :meth:`from_edges` to build from arbitrary pairs.
    node_ids : tuple, optional
        Original identifiers of the nodes (for ingested data).
    """

    n: int
    edges: np.ndarray
    node_ids: tuple | None = field(default=None)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", edges)
        if self.n < 0:
            raise ValueError("n must be non-negative")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint outside [0, n)")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must satisfy i < j (no self-loops)")
            keys = edges[:, 0] * self.n + edges[:, 1]
            if np.any(np.diff(keys) <= 0):
                raise ValueError("edges must be sorted and unique")
        if self.node_ids is not None and len(self.node_ids) != self.n:
            raise ValueError("node_ids must have length n")
        edges.flags.writeable = False

    @classmethod
    def from_edges(cls, n: int, pairs, node_ids=None) -> "Graph":
        """Build a graph from arbitrary pairs, dropping self-loops and duplicates."""
        pairs = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        lo = np.minimum(pairs[:, 0], pairs[:, 1])
        hi = np.maximum(pairs[:, 0], pairs[:, 1])
        keys = np.unique(lo * max(n, 1) + hi)
        edges = np.column_stack([keys // max(n, 1), keys % max(n, 1)])
        return cls(n, edges, None if node_ids is None else tuple(node_ids))

    @classmethod
    def from_adjacency(cls, A) -> "Graph":
        """Build a graph from a symmetric 0/1 matrix (dense or sparse); the diagonal is ignored."""
        A = sp.triu(sp.csr_matrix(A), k=1).tocoo()
        mask = A.data != 0
        return cls.from_edges(A.shape[0], np.column_stack([A.row[mask], A.col[mask]]))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric adjacency matrix as CSR with float64 entries."""
        i, j = self.edges[:, 0], self.edges[:, 1]
        data = np.ones(2 * len(i))
        A = sp.csr_matrix((data, (np.r_[i, j], np.r_[j, i])), shape=(self.n, self.n))
        A.sort_indices()
        return A

    def to_dense(self) -> np.ndarray:
        return self.adjacency.toarray()

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.bincount(self.edges.ravel(), minlength=self.n)

    def density(self) -> float:
        if self.n < 2:
            return 0.0
        return 2.0 * self.num_edges / (self.n * (self.n - 1))

    def permute(self, perm) -> "Graph":
        """Relabel nodes so that old node ``v`` becomes ``perm[v]``."""
        perm = np.asarray(perm, dtype=np.int64)
        if sorted(perm.tolist()) != list(range(self.n)):
            raise ValueError("perm must be a permutation of range(n)")
        ids = None
        if self.node_ids is not None:
            ids = [None] * self.n
            for old, new in enumerate(perm):
                ids[new] = self.node_ids[old]
        return Graph.from_edges(self.n, perm[self.edges], ids)

    def subgraph(self, nodes) -> "Graph":
        """Induced subgraph on ``nodes``; nodes are re-indexed in increasing order."""
        nodes = np.unique(np.asarray(nodes, dtype=np.int64))
        index = np.full(self.n, -1, dtype=np.int64)
        index[nodes] = np.arange(len(nodes))
        keep = (index[self.edges[:, 0]] >= 0) & (index[self.edges[:, 1]] >= 0)
        ids = None if self.node_ids is None else tuple(self.node_ids[v] for v in nodes)
        return Graph.from_edges(len(nodes), index[self.edges[keep]], ids)

    def __eq__(self, other):
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


def largest_connected_component(g: Graph) -> Graph:
    """
    Induced subgraph on the largest connected component.

    Ties between equally large components go to the one holding the smallest
    node index. Nodes are re-indexed in their original order.
    """
    if g.n < 1:
        raise ValueError("graph has no nodes")
    ncomp, labels = csgraph.connected_components(g.adjacency, directed=False)
    if ncomp == 1:
        return g
    sizes = np.bincount(labels, minlength=ncomp)
    first = np.full(ncomp, g.n)
    np.minimum.at(first, labels, np.arange(g.n))
    best = min(range(ncomp), key=lambda c: (-sizes[c], first[c]))
    return g.subgraph(np.flatnonzero(labels == best))


# ---------------------------------------------------------------------------
# Edge-list files
# ---------------------------------------------------------------------------

@dataclass
class LoadStats:
    lines: int = 0
    self_loops: int = 0
    duplicates: int = 0


def load_edge_list(path, *, with_stats: bool = False):
    """
    Read a whitespace-separated edge list (SNAP style).

    Lines starting with ``#`` are comments. A ``# nodes: N`` comment (as
    written by :func:`save_edge_list`) declares the node count so isolated
    nodes survive a round trip. Integer node ids are kept in numeric order;
    any non-integer id switches to first-appearance order. Self-loops and
    duplicate edges are dropped and counted.
    """
    declared_n = None
    tokens = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip().lower()
                if body.startswith("nodes:"):
                    try:
                        declared_n = int(body.split(":", 1)[1])
                    except ValueError:
                        raise EdgeListError(f"{path}:{lineno}: bad node-count header") from None
                continue
            parts = line.split()
            if len(parts) < 2:
                raise EdgeListError(f"{path}:{lineno}: expected two node ids, got {line!r}")
            tokens.append((parts[0], parts[1], lineno))
    if not tokens and declared_n is None:
        raise EdgeListError(f"{path}: empty edge list")

    flat = [t for a, b, _ in tokens for t in (a, b)]
    try:
        ints = [int(t) for t in flat]
        numeric = True
    except ValueError:
        numeric = False

    if numeric and declared_n is not None and all(0 <= v < declared_n for v in ints):
        n = declared_n
        ids = np.asarray(ints, dtype=np.int64)
        node_ids = None
    else:
        if numeric:
            uniq = sorted(set(ints))
            lookup = {v: k for k, v in enumerate(uniq)}
            ids = np.fromiter((lookup[v] for v in ints), dtype=np.int64, count=len(ints))
            node_ids = tuple(uniq)
        else:
            lookup = {}
            for t in flat:
                lookup.setdefault(t, len(lookup))
            ids = np.fromiter((lookup[t] for t in flat), dtype=np.int64, count=len(flat))
            node_ids = tuple(lookup)
        n = len(node_ids)
        if node_ids == tuple(range(n)):
            node_ids = None

    pairs = ids.reshape(-1, 2)
    stats = LoadStats(lines=len(tokens))
    stats.self_loops = int(np.sum(pairs[:, 0] == pairs[:, 1]))
    g = Graph.from_edges(n, pairs, node_ids)
    stats.duplicates = len(pairs) - stats.self_loops - g.num_edges
    if stats.self_loops or stats.duplicates:
        logger.info("%s: dropped %d self-loops and %d duplicate edges",
                    path, stats.self_loops, stats.duplicates)
    return (g, stats) if with_stats else g


def save_edge_list(g: Graph, path) -> None:
    """Write ``g`` as a sorted edge list with a ``# nodes: N`` header."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# nodes: {g.n}\n")
        for i, j in g.edges:
            fh.write(f"{i} {j}\n")


def read_manifest(path) -> list[tuple[str, object]]:
    """
    Read a ``path,label`` CSV manifest.

    Relative paths are resolved against the manifest's directory. Labels are
    returned as ints when every present label is an integer, else as
    strings; rows without a label give ``None``.
    """
    base = os.path.dirname(os.path.abspath(path))
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "path" not in reader.fieldnames:
            raise EdgeListError(f"{path}: manifest needs a 'path' column")
        for row in reader:
            p = (row.get("path") or "").strip()
            if not p:
                raise EdgeListError(f"{path}: row {reader.line_num} has no path")
            label = (row.get("label") or "").strip() or None
            rows.append((os.path.join(base, p), label))
    if not rows:
        raise EdgeListError(f"{path}: manifest lists no graphs")
    present = [lab for _, lab in rows if lab is not None]
    if present and all(_is_int(lab) for lab in present):
        rows = [(p, None if lab is None else int(lab)) for p, lab in rows]
    return rows


def write_manifest(path, entries: Iterable[tuple[str, object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["path", "label"])
        for p, label in entries:
            w.writerow([p, "" if label is None else label])


def _is_int(s: str) -> bool:
    try:
        int(s)
    except ValueError:
        return False
    return True


# ---------------------------------------------------------------------------
# Graphons
# ---------------------------------------------------------------------------

class Graphon:
    """
    Base class for edge-probability models ``(u, v) -> rho * f(u, v)``.

    Subclasses implement :meth:`f`, the unscaled symmetric function on
    ``[0, 1]^2``, and :meth:`mean_f`, its integral.
    """

    rho: float

    def f(self, u: np.ndarray, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def mean_f(self) -> float:
        raise NotImplementedError

    def max_f(self) -> float:
        raise NotImplementedError

    def with_rho(self, rho: float) -> "Graphon":
        raise NotImplementedError

    def probabilities(self, xi: np.ndarray, xj: np.ndarray | None = None) -> np.ndarray:
        """``rho * f(xi[:, None], xj[None, :])`` (no diagonal handling)."""
        xj = xi if xj is None else xj
        return self.rho * self.f(xi[:, None], xj[None, :])

    def link_probability_matrix(self, xi: np.ndarray) -> np.ndarray:
        """Realized ``P`` for latent positions ``xi``, with zero diagonal."""
        P = self.probabilities(np.asarray(xi, dtype=float))
        np.fill_diagonal(P, 0.0)
        return P

    def expected_degree(self, n: int) -> float:
        return self.rho * (n - 1) * self.mean_f()

    def calibrated(self, n: int, target_degree: float) -> "Graphon":
        """Copy with ``rho`` set so that the expected average degree is ``target_degree``."""
        rho = target_degree / ((n - 1) * self.mean_f())
        if not 0 < rho <= 1 or rho * self.max_f() > 1:
            raise ValueError(f"target degree {target_degree} unreachable at n={n}")
        return self.with_rho(rho)


def _check_rho(rho):
    if not 0 < rho <= 1:
        raise ValueError(f"rho must lie in (0, 1], got {rho}")


class BlockmodelGraphon(Graphon):
    """
    Stochastic blockmodel as a step graphon.

    Parameters
    ----------
    B : array_like, (K, K)
        Symmetric block connectivity matrix with entries in [0, 1].
    pi : array_like, (K,), optional
        Block proportions (default: equal). A node with latent value ``xi``
        belongs to the block whose cumulative-proportion interval holds it.
    rho : float
        Density multiplier in (0, 1].
    """

    def __init__(self, B, pi=None, rho: float = 1.0):
        B = np.array(B, dtype=float, ndmin=2)
        if B.shape[0] != B.shape[1] or not np.allclose(B, B.T, atol=0, rtol=0):
            raise ValueError("B must be a symmetric square matrix")
        if np.any(B < 0) or np.any(B > 1):
            raise ValueError("B entries must lie in [0, 1]")
        K = B.shape[0]
        pi = np.full(K, 1.0 / K) if pi is None else np.asarray(pi, dtype=float)
        if pi.shape != (K,) or np.any(pi <= 0) or abs(pi.sum() - 1) > 1e-12:
            raise ValueError("pi must be positive and sum to 1")
        _check_rho(rho)
        self.B, self.pi, self.rho = B, pi, float(rho)
        self._edges = np.cumsum(pi)[:-1]

    @classmethod
    def planted_partition(cls, p: float, q: float, m: int, rho: float = 1.0):
        """``B = (p - q) I_m + q E_m`` with equal block sizes."""
        return cls((p - q) * np.eye(m) + q * np.ones((m, m)), rho=rho)

    def blocks(self, x: np.ndarray) -> np.ndarray:
        return np.searchsorted(self._edges, x, side="right")

    def f(self, u, v):
        return self.B[self.blocks(u), self.blocks(v)]

    def mean_f(self):
        return float(self.pi @ self.B @ self.pi)

    def max_f(self):
        return float(self.B.max())

    def with_rho(self, rho):
        return BlockmodelGraphon(self.B, self.pi, rho)

    def __repr__(self):
        return f"BlockmodelGraphon(K={len(self.pi)}, rho={self.rho:.4g})"


def _logistic_distance(u, v):
    d = np.abs(u - v)
    return 1.0 - 1.0 / (1.0 + np.exp(15.0 * (0.8 * d) ** 0.8 - 0.1))


# Closed-form smooth graphons available by name. Each takes (u, v, **params).
SMOOTH_GRAPHONS: dict[str, Callable] = {
    "constant": lambda u, v, c=1.0: np.full(np.broadcast(u, v).shape, float(c)),
    "product": lambda u, v, a=1.0: (u * v) ** a,
    "logistic-distance": lambda u, v: _logistic_distance(u, v),
}

# Default smooth graphon used by the simulation harness. It is a stand-in:
# edge probability rises with latent distance |u - v| along a logistic curve.
DEFAULT_SMOOTH = "logistic-distance"


class SmoothGraphon(Graphon):
    """
    Graphon given by a named closed-form expression or an ``m x m`` grid.

    Parameters
    ----------
    name : str, optional
        Key of :data:`SMOOTH_GRAPHONS`.
    params : dict, optional
        Keyword parameters passed to the expression.
    grid : array_like, optional
        Symmetric ``m x m`` array; ``f`` is the step function over the
        regular partition of ``[0, 1]``. Exactly one of ``name``/``grid``.
    rho : float
        Density multiplier in (0, 1].
    """

    _CHECK_POINTS = 201

    def __init__(self, name: str | None = None, params: dict | None = None,
                 grid=None, rho: float = 1.0):
        if (name is None) == (grid is None):
            raise ValueError("give exactly one of name or grid")
        _check_rho(rho)
        self.name, self.params, self.rho = name, dict(params or {}), float(rho)
        if grid is not None:
            grid = np.array(grid, dtype=float, ndmin=2)
            if grid.shape[0] != grid.shape[1] or not np.array_equal(grid, grid.T):
                raise ValueError("grid must be square and symmetric")
            self.grid = grid
        else:
            if name not in SMOOTH_GRAPHONS:
                raise ValueError(f"unknown smooth graphon {name!r}")
            self.grid = None
        x = (np.arange(self._CHECK_POINTS) + 0.5) / self._CHECK_POINTS
        vals = self.f(x[:, None], x[None, :])
        if not np.allclose(vals, vals.T) or vals.min() < 0 or self.rho * vals.max() > 1:
            raise ValueError("graphon values must be symmetric with rho * f in [0, 1]")
        self._mean = float(vals.mean())
        self._max = float(vals.max())

    def f(self, u, v):
        if self.grid is not None:
            m = self.grid.shape[0]
            iu = np.minimum((np.asarray(u) * m).astype(int), m - 1)
            iv = np.minimum((np.asarray(v) * m).astype(int), m - 1)
            return self.grid[iu, iv]
        return SMOOTH_GRAPHONS[self.name](u, v, **self.params)

    def mean_f(self):
        # midpoint rule on a 201 x 201 grid (exact for grid graphons whose size divides 201)
        return self._mean

    def max_f(self):
        return self._max

    def with_rho(self, rho):
        if self.grid is not None:
            return SmoothGraphon(grid=self.grid, rho=rho)
        return SmoothGraphon(self.name, self.params, rho=rho)

    def __repr__(self):
        what = self.name if self.grid is None else f"grid{self.grid.shape}"
        return f"SmoothGraphon({what}, rho={self.rho:.4g})"


@dataclass
class MixtureModel:
    """Finite mixture of graphons with weights summing to one."""

    components: Sequence[Graphon]
    weights: Sequence[float] | None = None

    def __post_init__(self):
        K = len(self.components)
        if K < 1:
            raise ValueError("mixture needs at least one component")
        w = np.full(K, 1.0 / K) if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (K,) or np.any(w < 0) or abs(w.sum() - 1) > 1e-12:
            raise ValueError("weights must be nonnegative and sum to 1")
        self.weights = w

    @property
    def K(self) -> int:
        return len(self.components)


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def _generator(seed, *stream) -> np.random.Generator:
    """Counter-based Philox stream keyed by ``(seed, *stream)``."""
    ss = np.random.SeedSequence([int(seed), *map(int, stream)])
    return np.random.Generator(np.random.Philox(ss))


def latent_positions(n: int, seed, *stream) -> np.ndarray:
    """``n`` i.i.d. Uniform(0, 1) latent values from the stream ``(seed, *stream)``."""
    return _generator(seed, *stream).random(n)


def sample_graphon(graphon: Graphon, n: int, seed: int = 0, *, graph_index: int = 0,
                   latent: np.ndarray | None = None, return_p: bool = False):
    """
    Sample one graph from ``graphon`` on ``n`` nodes.

    The random stream is keyed by ``(seed, graph_index)``: latent positions
    are drawn first (unless given through ``latent``), then one uniform per
    node pair ``i < j`` in row-major order. Results do not depend on the
    order in which graphs are generated.

    Returns the :class:`Graph`, or ``(graph, P)`` when ``return_p`` is set.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    rng = _generator(seed, 0, graph_index)
    # always consume the latent draws so the edge stream is the same either way
    xi = rng.random(n)
    if latent is not None:
        xi = np.asarray(latent, dtype=float)
        if xi.shape != (n,):
            raise ValueError("latent must have shape (n,)")
    rows, cols = [], []
    for start in range(0, n - 1, _ROW_CHUNK):
        stop = min(start + _ROW_CHUNK, n - 1)
        P = graphon.probabilities(xi[start:stop], xi)
        mask = np.arange(n)[None, :] > np.arange(start, stop)[:, None]
        probs = P[mask]
        hit = rng.random(probs.size) < probs
        r, c = np.nonzero(mask)
        rows.append(r[hit] + start)
        cols.append(c[hit])
    edges = np.column_stack([np.concatenate(rows), np.concatenate(cols)])
    g = Graph(n, edges)
    if return_p:
        return g, graphon.link_probability_matrix(xi)
    return g


def sample_mixture(model: MixtureModel, T: int, n: int, seed: int = 0, *,
                   counts: Sequence[int] | None = None, shared_latent: bool = True,
                   return_p: bool = False):
    """
    Sample ``T`` graphs from a graphon mixture.

    Parameters
    ----------
    counts : sequence of int, optional
        Fixed-counts mode: exactly ``counts[l]`` graphs from component
        ``l``, emitted in component order. Without it, each graph picks its
        component with probability ``weights[l]``.
    shared_latent : bool
        Draw one set of latent positions for the whole collection so every
        graph from component ``l`` shares the same link-probability matrix
        (node correspondence). When false each graph draws its own.

    Returns
    -------
    list of (Graph, int)
        Graphs with 1-based component labels; with ``return_p`` each item
        is ``(Graph, int, P)``.
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    if counts is not None:
        counts = [int(c) for c in counts]
        if len(counts) != model.K or sum(counts) != T or min(counts) < 0:
            raise ValueError("counts must have one entry per component and sum to T")
        labels = np.repeat(np.arange(model.K), counts)
    else:
        labels = _generator(seed, 1).choice(model.K, size=T, p=model.weights)
    latent = latent_positions(n, seed, 2, n) if shared_latent else None
    out = []
    for t, lab in enumerate(labels):
        res = sample_graphon(model.components[lab], n, seed, graph_index=t,
                             latent=latent, return_p=return_p)
        if return_p:
            out.append((res[0], int(lab) + 1, res[1]))
        else:
            out.append((res, int(lab) + 1))
    return out


def expected_edge_count(P: np.ndarray) -> tuple[float, float]:
    """Mean and variance of the edge count of a Bernoulli graph with link matrix ``P``."""
    iu = np.triu_indices(P.shape[0], 1)
    p = P[iu]
    return float(p.sum()), float((p * (1 - p)).sum())


def erdos_renyi(n: int, p: float, seed: int = 0, **kw):
    """G(n, p) as a one-block graphon sample."""
    return sample_graphon(BlockmodelGraphon([[p]]), n, seed, **kw)


__all__ = [
    "Graph", "Graphon", "BlockmodelGraphon", "SmoothGraphon", "MixtureModel",
    "SMOOTH_GRAPHONS", "DEFAULT_SMOOTH", "EdgeListError", "LoadStats",
    "sample_graphon", "sample_mixture", "latent_positions", "erdos_renyi",
    "load_edge_list", "save_edge_list", "read_manifest", "write_manifest",
    "largest_connected_component", "expected_edge_count",
]
