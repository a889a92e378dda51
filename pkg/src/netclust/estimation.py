"""
Link-probability matrix estimators for a single observed graph.

All estimators return a dense symmetric ``n x n`` array with entries in
``[0, 1]`` and a zero diagonal.
"""
from __future__ import annotations

import struct

import numpy as np

from .graphs import Graph
from .linalg import sym_eig

ESTIMATORS = ("usvt", "nbs", "naive")

LPM_MAGIC = b"NCLPM\x00\x01\x00"


def _finish(P: np.ndarray) -> np.ndarray:
    P = np.clip(P, 0.0, 1.0)
    np.fill_diagonal(P, 0.0)
    return P


def estimate_naive(g: Graph) -> np.ndarray:
    """The adjacency matrix itself."""
    return g.to_dense()


def usvt_threshold(g: Graph, eta: float = 0.01) -> float:
    """Universal threshold ``(2 + eta) * sqrt(n * rho_hat)``, ``rho_hat`` the edge density."""
    return (2.0 + eta) * np.sqrt(g.n * g.density())


def estimate_usvt(g: Graph, eta: float = 0.01, *, return_rank: bool = False):
    """
    Universal singular value thresholding.

    For a symmetric matrix the singular values are the absolute eigenvalues,
    so ``A`` is eigendecomposed and every pair with ``|lambda|`` at or above
    :func:`usvt_threshold` is kept. The reconstruction is clipped to
    ``[0, 1]`` and its diagonal zeroed.
    """
    if g.n < 2:
        raise ValueError("USVT needs n >= 2")
    P = np.zeros((g.n, g.n))
    rank = 0
    if g.num_edges:
        values, vectors = sym_eig(g.to_dense(), mode="largest-magnitude")
        keep = np.abs(values) >= usvt_threshold(g, eta)
        rank = int(keep.sum())
        if rank:
            V = vectors[:, keep]
            P = (V * values[keep]) @ V.T
            P = (P + P.T) / 2.0  # exact symmetry
    P = _finish(P)
    return (P, rank) if return_rank else P


def nbs_dissimilarity(A: np.ndarray) -> np.ndarray:
    """
    ``d(i, j) = max_{k != i, j} |(A^2)_ik - (A^2)_jk| / n``.

    Returns an ``n x n`` symmetric matrix with zero diagonal.
    """
    n = A.shape[0]
    D2 = (A @ A) / n
    d = np.zeros((n, n))
    for i in range(n - 1):
        diff = np.abs(D2[i + 1:, :] - D2[i])  # rows j > i, columns k
        diff[:, i] = 0.0
        diff[np.arange(n - i - 1), np.arange(i + 1, n)] = 0.0
        d[i, i + 1:] = diff.max(axis=1)
    return d + d.T


def nbs_bandwidth(n: int, C0: float = 1.0) -> float:
    """Quantile level ``h = C0 * sqrt(log n / n)``, capped at 1."""
    return min(1.0, C0 * np.sqrt(np.log(n) / n))


def estimate_nbs(g: Graph, C0: float = 1.0) -> np.ndarray:
    """
    Neighborhood smoothing.

    Node ``j`` is a neighbor of ``i`` when their dissimilarity (see
    :func:`nbs_dissimilarity`) is at most the ``h``-quantile of ``i``'s
    dissimilarities to all other nodes (linear interpolation, inclusive).
    Row ``i`` of the estimate averages the adjacency rows of its neighbors;
    the result is symmetrized.
    """
    n = g.n
    if n < 3:
        raise ValueError("neighborhood smoothing needs n >= 3")
    A = g.to_dense()
    if g.num_edges == 0:
        return np.zeros((n, n))
    d = nbs_dissimilarity(A)
    h = nbs_bandwidth(n, C0)
    off = ~np.eye(n, dtype=bool)
    others = d[off].reshape(n, n - 1)
    q = np.quantile(others, h, axis=1)
    N = (d <= q[:, None]) & off
    P = (N.astype(float) @ A) / N.sum(axis=1, keepdims=True)
    return _finish((P + P.T) / 2.0)


def estimate(g: Graph, method: str, **params) -> np.ndarray:
    """Dispatch on ``method`` in ``{'usvt', 'nbs', 'naive'}``."""
    if method == "usvt":
        return estimate_usvt(g, **params)
    if method == "nbs":
        return estimate_nbs(g, **params)
    if method == "naive":
        return estimate_naive(g)
    raise ValueError(f"unknown estimator {method!r}; expected one of {ESTIMATORS}")


# ---------------------------------------------------------------------------
# Export formats
# ---------------------------------------------------------------------------

def save_lpm(P: np.ndarray, path) -> None:
    """
    Binary cache format: 8-byte magic, ``n`` as little-endian uint64, then
    the strict upper triangle (``i < j``) row-major as little-endian float64.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    with open(path, "wb") as fh:
        fh.write(LPM_MAGIC)
        fh.write(struct.pack("<Q", n))
        fh.write(P[np.triu_indices(n, 1)].astype("<f8").tobytes())


def load_lpm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(LPM_MAGIC))
        if magic != LPM_MAGIC:
            raise ValueError(f"{path}: not a link-probability-matrix file")
        (n,) = struct.unpack("<Q", fh.read(8))
        upper = np.frombuffer(fh.read(), dtype="<f8")
    if upper.size != n * (n - 1) // 2:
        raise ValueError(f"{path}: truncated file")
    P = np.zeros((n, n))
    P[np.triu_indices(n, 1)] = upper
    return P + P.T


def save_lpm_csv(P: np.ndarray, path) -> None:
    np.savetxt(path, P, delimiter=",", fmt="%.17g")


def load_lpm_csv(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
