"""
Clustering networks without node correspondence through log graph moments.

A graph on ``n`` nodes is summarized by ``m_k = trace((A / n)^k)`` for
``k = 2..J``; the feature vector is ``(log m_2, ..., log m_J)``. Feature
vectors are compared with the Euclidean distance, turned into a Gaussian-type
kernel ``exp(-t D)`` and clustered spectrally. The bandwidth ``t`` and the
moment order ``J`` are tuned by the relative eigengap of the kernel.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .graphs import Graph, Graphon, sample_graphon
from .linalg import kmeans, sym_eig, sym_eigvals
from .ncge import ClusterAssignment

# Floor applied to moments before taking logs (odd moments vanish on bipartite graphs).
MOMENT_FLOOR = 1e-15
# Relative floor on the (K+1)-th kernel eigenvalue in the eigengap ratio.
GAP_EPS = 1e-12
# Running powers switch from sparse to dense storage above this fill.
DENSE_SWITCH = 0.05
# Gaps closer than this (relative) are treated as ties when tuning.
TIE_TOL = 1e-9


@dataclass(frozen=True)
class MomentVector:
    """Normalized traces ``m_k = trace((A/n)^k)`` for ``k = 2..J``."""

    J: int
    values: np.ndarray
    n: int

    def __getitem__(self, k: int) -> float:
        if not 2 <= k <= self.J:
            raise IndexError(f"moment order {k} outside 2..{self.J}")
        return float(self.values[k - 2])

    def psi(self, k: int) -> float:
        """Rescaled moment ``n m_k / (k sqrt 2)``."""
        return self.n * self[k] / (k * np.sqrt(2.0))

    def truncate(self, J: int) -> "MomentVector":
        if not 2 <= J <= self.J:
            raise ValueError(f"J must lie in 2..{self.J}")
        return MomentVector(J, self.values[: J - 1], self.n)


@dataclass
class FeatureVector:
    """Per-graph summary vector tagged with the method that produced it."""

    method: str
    values: np.ndarray
    J: int | None = None
    flags: tuple = field(default_factory=tuple)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if not np.all(np.isfinite(self.values)):
            raise ValueError("feature values must be finite")


def _density(X) -> float:
    n = X.shape[0]
    nnz = X.nnz if sp.issparse(X) else np.count_nonzero(X)
    return nnz / float(n * n)


def _inner(X, Y) -> float:
    """Frobenius inner product for any mix of sparse and dense operands."""
    if sp.issparse(X) and sp.issparse(Y):
        return float(X.multiply(Y).sum())
    if sp.issparse(X):
        X, Y = Y, X
    if sp.issparse(Y):
        Y = Y.tocoo()
        return float(np.dot(X[Y.row, Y.col], Y.data))
    return float(np.vdot(X, Y))


def _next_power(A, X):
    """``A @ X`` keeping sparse storage while the result stays thin."""
    if sp.issparse(X):
        Y = A @ X
        if _density(Y) > DENSE_SWITCH:
            Y = Y.toarray()
        return Y
    return np.asarray(A @ X)


def trace_powers(A, J: int) -> np.ndarray:
    """
    ``trace(A^k)`` for ``k = 2..J`` of a symmetric matrix.

    Uses ``trace(A^k) = <A^ceil(k/2), A^floor(k/2)>_F`` so only powers up to
    ``ceil(J/2)`` are formed.
    """
    if J < 2:
        raise ValueError("J must be at least 2")
    A = sp.csr_matrix(A, dtype=float)
    powers = {1: A if _density(A) <= DENSE_SWITCH else A.toarray()}
    for h in range(2, (J + 1) // 2 + 1):
        powers[h] = _next_power(A, powers[h - 1])
    return np.array([_inner(powers[(k + 1) // 2], powers[k // 2]) for k in range(2, J + 1)])


def graph_moments(g: Graph, J: int) -> MomentVector:
    """Exact graph moments ``m_2..m_J`` of ``g``."""
    if J < 2:
        raise ValueError("J must be at least 2")
    if g.n == 0 or g.num_edges == 0:
        return MomentVector(J, np.zeros(J - 1), g.n)
    traces = trace_powers(g.adjacency, J)
    scale = float(g.n) ** np.arange(2, J + 1)
    return MomentVector(J, traces / scale, g.n)


def log_features(moments: MomentVector, J: int | None = None,
                 floor: float = MOMENT_FLOOR) -> FeatureVector:
    """``(log max(m_2, floor), ..., log max(m_J, floor))``."""
    if floor <= 0:
        raise ValueError("floor must be positive")
    mv = moments if J is None else moments.truncate(J)
    return FeatureVector("nclm", np.log(np.maximum(mv.values, floor)), mv.J)


def log_moment_features(g: Graph, J: int, floor: float = MOMENT_FLOOR) -> FeatureVector:
    """Log-moment feature vector of a single graph."""
    return log_features(graph_moments(g, J), floor=floor)


def _as_matrix(features) -> np.ndarray:
    if isinstance(features, np.ndarray):
        return np.atleast_2d(features.astype(float))
    features = list(features)
    methods = {f.method for f in features}
    lengths = {len(f.values) for f in features}
    if len(methods) > 1:
        raise ValueError(f"mixed feature methods {sorted(methods)}")
    if len(lengths) > 1:
        raise ValueError(f"mixed feature lengths {sorted(lengths)}")
    return np.vstack([f.values for f in features])


def feature_distance_matrix(features) -> np.ndarray:
    """Pairwise Euclidean distances between feature vectors."""
    X = _as_matrix(features)
    diff = X[:, None, :] - X[None, :, :]
    D = np.sqrt(np.sum(diff ** 2, axis=2))
    D = np.triu(D, 1)
    return D + D.T


def kernel_from_distance(D: np.ndarray, t: float) -> np.ndarray:
    """Similarity ``exp(-t D)`` with an exact unit diagonal."""
    if not t > 0:
        raise ValueError("bandwidth t must be positive")
    Kmat = np.exp(-t * np.asarray(D, dtype=float))
    np.fill_diagonal(Kmat, 1.0)
    return Kmat


def relative_eigengap(Kmat: np.ndarray, K: int, eps: float = GAP_EPS) -> float:
    """
    ``(lambda_K - lambda_{K+1}) / lambda_{K+1}`` over descending eigenvalues.

    The denominator is floored at ``eps * lambda_1``. When ``lambda_{K+1}``
    sits on that floor while ``lambda_K`` is above it, the ratio is
    unbounded and ``inf`` is returned; when both are on the floor there is
    no gap and 0 is returned.
    """
    T = Kmat.shape[0]
    if K + 1 > T:
        raise ValueError("K+1 <= T required")
    lam = sym_eigvals(Kmat, mode="largest-algebraic")
    floor = eps * max(lam[0], 0.0)
    lk, lk1 = lam[K - 1], lam[K]
    if lk1 <= floor:
        return float("inf") if lk > floor else 0.0
    return float((lk - lk1) / lk1)


def default_t_grid(D: np.ndarray, size: int = 20) -> np.ndarray:
    """``size`` log-spaced bandwidths over ``[1e-3, 1e3] / median off-diagonal distance``."""
    D = np.asarray(D, dtype=float)
    off = D[~np.eye(D.shape[0], dtype=bool)]
    med = float(np.median(off)) if off.size else 0.0
    if not med > 0:
        med = 1.0
    return np.logspace(-3, 3, size) / med


def _first_max(values, tol: float = TIE_TOL) -> int:
    """Index of the first entry within ``tol`` (relative, at least absolute) of the maximum."""
    values = np.asarray(values, dtype=float)
    top = values.max()
    if np.isinf(top):
        return int(np.argmax(values == top))
    return int(np.argmax(values >= top - tol * max(abs(top), 1.0)))


@dataclass
class TuneResult:
    t: float
    gap: float
    grid: np.ndarray
    gaps: np.ndarray


def tune_t(D: np.ndarray, K: int, grid=None) -> TuneResult:
    """Bandwidth maximizing the relative eigengap; ties go to the smaller ``t``."""
    D = np.asarray(D, dtype=float)
    if K + 1 > D.shape[0]:
        raise ValueError("K+1 <= T required")
    grid = default_t_grid(D) if grid is None else np.sort(np.asarray(grid, dtype=float))
    if grid.size == 0:
        raise ValueError("t grid is empty")
    gaps = np.array([relative_eigengap(kernel_from_distance(D, t), K) for t in grid])
    best = _first_max(gaps)  # ties (up to round-off) go to the smallest t
    return TuneResult(float(grid[best]), float(gaps[best]), grid, gaps)


def kernel_spectral_cluster(D: np.ndarray, K: int, t_grid=None, seed: int = 0,
                            n_vectors: int | None = None, method: str = "kernel",
                            restarts: int = 20) -> ClusterAssignment:
    """
    Tune ``t``, build ``exp(-t D)`` and run k-means on its top eigenvectors.

    ``n_vectors`` (default ``K``) leading eigenvectors in descending
    algebraic order are used. With ``K = 1`` tuning is skipped.
    """
    D = np.asarray(D, dtype=float)
    T = D.shape[0]
    if K > T:
        raise ValueError(f"K={K} exceeds the number of graphs T={T}")
    diagnostics = {"distance": D}
    t0 = time.perf_counter()
    if K + 1 <= T:
        tuned = tune_t(D, K, t_grid)
        t = tuned.t
        diagnostics.update(t=t, gap=tuned.gap, t_grid=tuned.grid, t_gaps=tuned.gaps)
    else:
        t = float(default_t_grid(D)[0]) if t_grid is None else float(np.min(t_grid))
        diagnostics.update(t=t)
    t1 = time.perf_counter()
    Kmat = kernel_from_distance(D, t)
    diagnostics["kernel"] = Kmat
    r = K if n_vectors is None else int(n_vectors)
    V = sym_eig(Kmat, r, mode="largest-algebraic").vectors
    labels = kmeans(V, K, restarts=restarts, seed=seed)
    diagnostics["time"] = {"tune": t1 - t0, "cluster": time.perf_counter() - t1}
    return ClusterAssignment(labels, K, method, diagnostics=diagnostics)


def nclm_pipeline(graphs: Sequence[Graph], J: int = 5, K: int = 2, t_grid=None,
                  seed: int = 0, *, n_vectors: int | None = None,
                  floor: float = MOMENT_FLOOR,
                  moments: Sequence[MomentVector] | None = None) -> ClusterAssignment:
    """
    Log-moment features, Euclidean distances, tuned kernel, spectral k-means.

    Graphs may have different sizes. Precomputed ``moments`` (of order at
    least ``J``) skip the moment stage.
    """
    t0 = time.perf_counter()
    if moments is None:
        moments = [graph_moments(g, J) for g in graphs]
    t1 = time.perf_counter()
    feats = [log_features(m, J, floor) for m in moments]
    D = feature_distance_matrix(feats)
    t2 = time.perf_counter()
    res = kernel_spectral_cluster(D, K, t_grid, seed, n_vectors, method="nclm")
    res.diagnostics["features"] = np.vstack([f.values for f in feats])
    res.diagnostics["time"] = {"featurize": t1 - t0, "distance": t2 - t1,
                               **res.diagnostics["time"]}
    return res


@dataclass
class JTuneResult:
    J: int
    gaps: dict
    t: dict


def tune_J(graphs: Sequence[Graph] | None, K: int, J_range: Sequence[int] = range(2, 9),
           t_grid=None, *, moments: Sequence[MomentVector] | None = None,
           floor: float = MOMENT_FLOOR) -> JTuneResult:
    """
    Moment order maximizing the tuned relative eigengap.

    Moments are computed once at ``max(J_range)`` and truncated for each
    ``J``. Ties go to the smaller ``J``.
    """
    J_range = sorted(int(j) for j in J_range)
    if not J_range or J_range[0] < 2:
        raise ValueError("J_range must be a nonempty subset of integers >= 2")
    J_max = J_range[-1]
    if moments is None:
        moments = [graph_moments(g, J_max) for g in graphs]
    gaps, ts = {}, {}
    for J in J_range:
        D = feature_distance_matrix([log_features(m, J, floor) for m in moments])
        tuned = tune_t(D, K, t_grid)
        gaps[J], ts[J] = tuned.gap, tuned.t
    best = J_range[_first_max([gaps[J] for J in J_range])]
    return JTuneResult(best, gaps, ts)


@dataclass
class ConcentrationResult:
    mean_psi: float
    std_psi: float
    mean_log: np.ndarray
    std_log: np.ndarray


def concentration_probe(model: Graphon, n: int, k: int, reps: int = 100, seed: int = 0,
                        J: int | None = None, floor: float = MOMENT_FLOOR) -> ConcentrationResult:
    """
    Empirical spread of ``psi_k`` and of the log-moment coordinates.

    ``reps`` graphs are sampled from ``model`` at size ``n``; ``mean_log`` and
    ``std_log`` cover ``log m_2..log m_J`` with ``J = max(k, 2)`` by default.
    """
    if reps < 30:
        raise ValueError("reps must be at least 30")
    J = max(k, 2) if J is None else J
    Jm = max(J, k)
    psi, logs = [], []
    for r in range(reps):
        mv = graph_moments(sample_graphon(model, n, seed, graph_index=r), Jm)
        psi.append(mv.psi(k))
        logs.append(np.log(np.maximum(mv.values[: J - 1], floor)))
    psi, logs = np.array(psi), np.array(logs)
    return ConcentrationResult(float(psi.mean()), float(psi.std(ddof=1)),
                               logs.mean(axis=0), logs.std(axis=0, ddof=1))
