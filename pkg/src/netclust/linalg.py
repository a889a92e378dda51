"""
Dense symmetric eigendecomposition and k-means.

Every pipeline goes through :func:`sym_eig` and :func:`kmeans`, so the
ordering, sign and seeding conventions live here and nowhere else.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MODES = ("largest-magnitude", "largest-algebraic", "smallest-algebraic")


class NumericalError(ArithmeticError):
    """Raised for non-finite input or a numerically degenerate problem."""


@dataclass(frozen=True)
class SpectralPair:
    """Eigenvalues with the matching column-orthonormal eigenvectors."""

    values: np.ndarray
    vectors: np.ndarray

    def __iter__(self):
        yield self.values
        yield self.vectors


# Relative tolerance under which two eigenvalue magnitudes count as tied.
MAGNITUDE_TIE_TOL = 1e-12


def _order(values: np.ndarray, mode: str) -> np.ndarray:
    if mode == "largest-magnitude":
        order = np.lexsort((-values, -np.abs(values)))
        # pairs like +a, -a from bipartite spectra come out of LAPACK with
        # round-off in |a|; within tolerance the positive value goes first
        mags = np.abs(values[order])
        tol = MAGNITUDE_TIE_TOL * max(mags[0], 1.0) if mags.size else 0.0
        start = 0
        for i in range(1, len(order) + 1):
            if i == len(order) or mags[start] - mags[i] > tol:
                group = order[start:i]
                order[start:i] = group[np.argsort(-values[group], kind="stable")]
                start = i
        return order
    if mode == "largest-algebraic":
        return np.argsort(-values, kind="stable")
    if mode == "smallest-algebraic":
        return np.argsort(values, kind="stable")
    raise ValueError(f"mode must be one of {MODES}, got {mode!r}")


def fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the largest-magnitude entry is positive (first index on ties)."""
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.size == 0:
        return vectors
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def sym_eig(S, k: int | None = None, mode: str = "largest-magnitude") -> SpectralPair:
    """
    Eigenpairs of a real symmetric matrix.

    Only the upper triangle of ``S`` is read. The full spectrum is computed
    with LAPACK's symmetric driver and ``k`` pairs are selected according to
    ``mode``. Eigenvectors follow the sign convention of :func:`fix_signs`.

    Parameters
    ----------
    S : array_like, (n, n)
    k : int, optional
        Number of pairs to return (default: all).
    mode : {'largest-magnitude', 'largest-algebraic', 'smallest-algebraic'}
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError("S must be square")
    n = S.shape[0]
    k = n if k is None else int(k)
    if not 1 <= k <= n:
        raise ValueError(f"k must satisfy 1 <= k <= {n}, got {k}")
    if not np.all(np.isfinite(S)):
        raise NumericalError("matrix has non-finite entries")
    values, vectors = np.linalg.eigh(S, UPLO="U")
    order = _order(values, mode)[:k]
    return SpectralPair(values[order], fix_signs(vectors[:, order]))


def sym_eigvals(S, mode: str = "largest-algebraic") -> np.ndarray:
    """All eigenvalues of ``S`` ordered per ``mode``."""
    S = np.asarray(S, dtype=float)
    if not np.all(np.isfinite(S)):
        raise NumericalError("matrix has non-finite entries")
    values = np.linalg.eigvalsh(S, UPLO="U")
    return values[_order(values, mode)]


# ---------------------------------------------------------------------------
# k-means
# ---------------------------------------------------------------------------

@dataclass
class KMeansResult:
    labels: np.ndarray
    centers: np.ndarray
    wcss: float
    n_iter: int
    history: list = field(default_factory=list)


def _kmeanspp(X, K, rng):
    T = X.shape[0]
    centers = np.empty((K, X.shape[1]))
    centers[0] = X[rng.integers(T)]
    d2 = ((X - centers[0]) ** 2).sum(axis=1)
    for c in range(1, K):
        total = d2.sum()
        if total <= 0:
            centers[c] = X[rng.integers(T)]
        else:
            centers[c] = X[rng.choice(T, p=d2 / total)]
        d2 = np.minimum(d2, ((X - centers[c]) ** 2).sum(axis=1))
    return centers


def _lloyd(X, centers, max_iter, tol):
    history = []
    prev = np.inf
    for it in range(1, max_iter + 1):
        d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
        labels = np.argmin(d2, axis=1)
        wcss = float(d2[np.arange(len(X)), labels].sum())
        history.append(wcss)
        for c in range(len(centers)):
            members = labels == c
            if members.any():
                centers[c] = X[members].mean(axis=0)
            else:
                # revive an empty cluster at the worst-served point
                far = int(np.argmax(d2[np.arange(len(X)), labels]))
                centers[c] = X[far]
                labels[far] = c
        if prev - wcss <= tol * max(prev, 1e-300) or wcss == 0:
            break
        prev = wcss
    d2 = ((X[:, None, :] - centers[None, :, :]) ** 2).sum(axis=2)
    labels = np.argmin(d2, axis=1)
    wcss = float(d2[np.arange(len(X)), labels].sum())
    history.append(wcss)
    return labels, centers, wcss, it, history


def kmeans_fit(points, K: int, restarts: int = 20, seed: int = 0,
               max_iter: int = 300, tol: float = 1e-8) -> KMeansResult:
    """
    Lloyd's algorithm with k-means++ seeding, best of ``restarts`` runs.

    Points are processed in lexicographic order, so the result does not
    depend on the order of the input rows. Labels are ``1..K``, numbered by
    first appearance in the input order.
    """
    X = np.asarray(points, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    T = X.shape[0]
    if K < 1 or K > T:
        raise ValueError(f"K must satisfy 1 <= K <= T={T}, got {K}")
    if restarts < 1:
        raise ValueError("restarts must be at least 1")
    if not np.all(np.isfinite(X)):
        raise NumericalError("points have non-finite entries")

    canon = np.lexsort(X.T[::-1]) if X.shape[1] else np.arange(T)
    Xc = X[canon]
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        centers = _kmeanspp(Xc, K, rng)
        labels, centers, wcss, n_iter, history = _lloyd(Xc, centers, max_iter, tol)
        if best is None or wcss < best[2] - 1e-12 * max(abs(best[2]), 1.0):
            best = (labels, centers, wcss, n_iter, history)
    labels_c, centers, wcss, n_iter, history = best

    raw = np.empty(T, dtype=np.int64)
    raw[canon] = labels_c
    remap = {}
    for lab in raw:
        remap.setdefault(int(lab), len(remap) + 1)
    for c in range(K):
        remap.setdefault(c, len(remap) + 1)
    labels = np.array([remap[int(lab)] for lab in raw])
    order = sorted(range(K), key=lambda c: remap[c])
    return KMeansResult(labels, centers[order], wcss, n_iter, history)


def kmeans(points, K: int, restarts: int = 20, seed: int = 0, **kw) -> np.ndarray:
    """Cluster labels in ``1..K``; see :func:`kmeans_fit`."""
    return kmeans_fit(points, K, restarts=restarts, seed=seed, **kw).labels
