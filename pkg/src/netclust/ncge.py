"""
Clustering networks with node correspondence through graphon estimates.

Each graph is summarized by an estimated link-probability matrix, graphs are
compared by the Frobenius distance between estimates, and the distance
matrix is spectrally clustered using the eigenvectors of its
largest-in-magnitude eigenvalues. The module also carries the perturbation
diagnostics that quantify how estimation error propagates to the embedding.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .estimation import estimate
from .graphs import Graph
from .linalg import NumericalError, kmeans, sym_eig


class NodeCorrespondenceError(ValueError):
    """Graphs passed to a node-aligned method do not share a node set."""

    def __init__(self, sizes=()):
        msg = "node correspondence required"
        if sizes:
            msg += f": graphs have sizes {sorted(set(sizes))}"
        super().__init__(msg)


@dataclass
class ClusterAssignment:
    """Labels in ``1..K`` for a collection of graphs."""

    labels: np.ndarray
    K: int
    method: str
    truth: np.ndarray | None = None
    diagnostics: dict | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.K < 1:
            raise ValueError("K must be at least 1")
        if self.labels.size and (self.labels.min() < 1 or self.labels.max() > self.K):
            raise ValueError("labels must lie in 1..K")

    def error(self) -> float:
        from .evaluation import clustering_error
        if self.truth is None:
            raise ValueError("no ground truth attached")
        return clustering_error(self.labels, self.truth, self.K)


def frobenius_distance_matrix(ps: Sequence[np.ndarray]) -> np.ndarray:
    """``D[i, j] = ||P_i - P_j||_F`` over the upper triangle, mirrored."""
    ps = [np.asarray(p, dtype=float) for p in ps]
    T = len(ps)
    if T < 2:
        raise ValueError("need at least two matrices")
    shape = ps[0].shape
    if any(p.shape != shape for p in ps):
        raise ValueError("all matrices must have the same shape")
    D = np.zeros((T, T))
    for i in range(T):
        for j in range(i + 1, T):
            D[i, j] = np.sqrt(np.sum((ps[i] - ps[j]) ** 2))
    return D + D.T


def spectral_embedding(D: np.ndarray, K: int, normalize_rows: bool = False) -> np.ndarray:
    """Rows of the ``T x K`` eigenvector matrix for the ``K`` largest-magnitude eigenvalues."""
    V = sym_eig(D, K, mode="largest-magnitude").vectors
    if normalize_rows:
        norms = np.linalg.norm(V, axis=1, keepdims=True)
        V = V / np.where(norms > 0, norms, 1.0)
    return V


def spectral_cluster_distance(D: np.ndarray, K: int, seed: int = 0, *,
                              normalize_rows: bool = False,
                              restarts: int = 20) -> ClusterAssignment:
    """k-means on the largest-magnitude spectral embedding of a distance matrix."""
    D = np.asarray(D, dtype=float)
    T = D.shape[0]
    if K > T:
        raise ValueError(f"K={K} exceeds the number of graphs T={T}")
    V = spectral_embedding(D, K, normalize_rows)
    labels = kmeans(V, K, restarts=restarts, seed=seed)
    return ClusterAssignment(labels, K, "ncge")


def estimate_all(graphs: Sequence[Graph], estimator: str = "usvt",
                 cache: dict | None = None, **params) -> list[np.ndarray]:
    """Estimate every graph's link-probability matrix, reusing ``cache`` entries."""
    out = []
    key_params = tuple(sorted(params.items()))
    for g in graphs:
        key = (estimator, key_params, g)
        if cache is not None and key in cache:
            out.append(cache[key])
            continue
        P = estimate(g, estimator, **params)
        if cache is not None:
            cache[key] = P
        out.append(P)
    return out


def check_correspondence(graphs: Sequence[Graph]) -> int:
    sizes = [g.n for g in graphs]
    if len(set(sizes)) != 1:
        raise NodeCorrespondenceError(sizes)
    return sizes[0]


def ncge_pipeline(graphs: Sequence[Graph], estimator: str = "usvt", K: int = 2,
                  seed: int = 0, *, cache: dict | None = None,
                  normalize_rows: bool = False, **params) -> ClusterAssignment:
    """
    Estimate, compare and cluster a node-aligned collection of graphs.

    ``params`` go to the estimator (``eta`` for USVT, ``C0`` for NBS). The
    distance matrix is returned in ``diagnostics['distance']`` and stage
    timings in ``diagnostics['time']``.
    """
    check_correspondence(graphs)
    t0 = time.perf_counter()
    ps = estimate_all(graphs, estimator, cache=cache, **params)
    t1 = time.perf_counter()
    D = frobenius_distance_matrix(ps)
    t2 = time.perf_counter()
    res = spectral_cluster_distance(D, K, seed, normalize_rows=normalize_rows)
    t3 = time.perf_counter()
    res.method = f"ncge-{estimator}"
    res.diagnostics = {"distance": D,
                       "time": {"estimate": t1 - t0, "distance": t2 - t1, "cluster": t3 - t2}}
    return res


# ---------------------------------------------------------------------------
# Perturbation diagnostics
# ---------------------------------------------------------------------------

class DavisKahanResult(NamedTuple):
    lhs: float
    rhs: float
    gamma: float


def procrustes(Vhat: np.ndarray, V: np.ndarray) -> np.ndarray:
    """Orthogonal ``O`` minimizing ``||Vhat O - V||_F`` (polar factor of ``Vhat^T V``)."""
    U, _, Wt = np.linalg.svd(Vhat.T @ V)
    return U @ Wt


def eigengap_gamma(D: np.ndarray, K: int, rel_tol: float = 1e-8) -> float:
    """
    Magnitude of the ``K``-th largest-magnitude eigenvalue of ``D``.

    Raises :class:`NumericalError` when it falls below ``rel_tol * ||D||_F``.
    """
    D = np.asarray(D, dtype=float)
    lam = sym_eig(D, K, mode="largest-magnitude").values
    gamma = float(abs(lam[-1]))
    if gamma <= rel_tol * np.linalg.norm(D):
        raise NumericalError(f"distance matrix has numerical rank below K={K} "
                             f"(|lambda_K| = {gamma:.3e})")
    return gamma


def davis_kahan_check(D: np.ndarray, Dhat: np.ndarray, K: int) -> DavisKahanResult:
    """
    Compare the aligned eigenvector error with its perturbation bound.

    ``lhs = ||Vhat O - V||_F^2`` with ``O`` the optimal orthogonal alignment,
    ``rhs = 16 ||Dhat - D||_F^2 / gamma^2``.
    """
    D = np.asarray(D, dtype=float)
    Dhat = np.asarray(Dhat, dtype=float)
    if D.shape != Dhat.shape:
        raise ValueError("D and Dhat must have the same shape")
    gamma = eigengap_gamma(D, K)
    V = sym_eig(D, K, mode="largest-magnitude").vectors
    Vhat = sym_eig(Dhat, K, mode="largest-magnitude").vectors
    O = procrustes(Vhat, V)
    lhs = float(np.sum((Vhat @ O - V) ** 2))
    rhs = float(16.0 * np.sum((Dhat - D) ** 2) / gamma ** 2)
    return DavisKahanResult(lhs, rhs, gamma)


def estimation_bound(ps_true: Sequence[np.ndarray], ps_hat: Sequence[np.ndarray],
                     gamma: float) -> float:
    """Chained bound ``64 T sum_i ||Phat_i - P_i||_F^2 / gamma^2`` on the aligned error."""
    T = len(ps_true)
    err = sum(float(np.sum((ph - p) ** 2)) for p, ph in zip(ps_true, ps_hat))
    return 64.0 * T * err / gamma ** 2


def distance_perturbation_bound(ps_true, ps_hat) -> tuple[float, float]:
    """``(||Dhat - D||_F^2, 4 T sum_i ||Phat_i - P_i||_F^2)``; the first never exceeds the second."""
    D = frobenius_distance_matrix(ps_true)
    Dhat = frobenius_distance_matrix(ps_hat)
    T = len(ps_true)
    err = sum(float(np.sum((ph - p) ** 2)) for p, ph in zip(ps_true, ps_hat))
    return float(np.sum((Dhat - D) ** 2)), 4.0 * T * err


def blockmodel_separation_d2(p: float, q: float, p2: float, q2: float, m: int) -> float:
    """
    Normalized squared distance between two equal-block planted partitions.

    ``||Pi_1 - Pi_2||_F^2 / n^2 = (p - p2)^2 / m + (1 - 1/m) (q - q2)^2``.
    """
    for v in (p, q, p2, q2):
        if not 0 <= v <= 1:
            raise ValueError("probabilities must lie in [0, 1]")
    if m < 1:
        raise ValueError("m must be at least 1")
    return (p - p2) ** 2 / m + (1 - 1 / m) * (q - q2) ** 2


def misclustering_bound(D: np.ndarray, Dhat: np.ndarray, K: int,
                        counts: Sequence[int]) -> float:
    """Upper bound ``8 m_T ||Vhat O - V||_F^2`` on the number of misclustered graphs."""
    lhs = davis_kahan_check(D, Dhat, K).lhs
    return 8.0 * max(counts) * lhs
