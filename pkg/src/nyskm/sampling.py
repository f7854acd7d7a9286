"""Landmark selection: uniform, Gaussian sketch, leverage score, k-means.

All strategies are deterministic given their seed.  Randomness comes from
numpy's PCG64 generator (``np.random.default_rng``), so pinned regression
values are stable across platforms.

Every strategy except k-means also records a combination-weight matrix P with
C = X P, which certifies the span-equality condition needed for strong
equivalence between the projection view and the linearized training problem.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset
from .linalg import InvalidInputError, psd_eig

STRATEGIES = ("uniform", "gaussian", "leverage", "kmeans")


@dataclass
class LandmarkSet:
    """Either explicit landmark points, a weight matrix P (C = X P), or both.

    ``points`` is a dense (m, d) array when present; ``weights`` is (n, m).
    ``indices`` records selected training indices for selection-type samplers.
    """

    strategy: str
    m: int
    source_seed: int
    points: np.ndarray | None = None
    weights: np.ndarray | None = None
    indices: np.ndarray | None = None

    def __post_init__(self):
        if self.strategy not in STRATEGIES:
            raise InvalidInputError(f"unknown strategy {self.strategy!r}")
        if self.points is None and self.weights is None:
            raise InvalidInputError("landmark set needs points or weights")
        if self.m < 1:
            raise InvalidInputError(f"m must be >= 1, got {self.m}")
        if self.weights is not None and np.any(np.all(self.weights == 0.0, axis=0)):
            raise InvalidInputError("combination weights contain an all-zero column")

    @property
    def in_training_span(self) -> bool:
        """True when C = X P is certified (everything except k-means centroids)."""
        return self.weights is not None


def _dense_rows(ds: Dataset, idx: np.ndarray) -> np.ndarray:
    return np.asarray(ds.X[idx].todense(), dtype=float)


def _selection_matrix(n: int, idx: np.ndarray) -> np.ndarray:
    P = np.zeros((n, idx.size))
    P[idx, np.arange(idx.size)] = 1.0
    return P


def sample_uniform(ds: Dataset, m: int, seed: int) -> LandmarkSet:
    """m distinct training points drawn without replacement."""
    if not 1 <= m <= ds.n:
        raise InvalidInputError(f"need 1 <= m <= n, got m={m}, n={ds.n}")
    idx = np.random.default_rng(seed).permutation(ds.n)[:m]
    return LandmarkSet(
        "uniform",
        m,
        seed,
        points=_dense_rows(ds, idx),
        weights=_selection_matrix(ds.n, idx),
        indices=idx,
    )


def sample_gaussian_sketch(n: int, m: int, seed: int) -> LandmarkSet:
    """Gaussian sketch landmarks C = X P with iid N(0, 1/m) weights.

    Kernel blocks follow as K_mn = P^T K and K_mm = P^T K P, so the full Gram
    matrix is required downstream (desk scale only).
    """
    if m < 1:
        raise InvalidInputError(f"m must be >= 1, got {m}")
    if m > n:
        raise InvalidInputError(f"need m <= n, got m={m}, n={n}")
    P = np.random.default_rng(seed).standard_normal((n, m)) / np.sqrt(m)
    return LandmarkSet("gaussian", m, seed, weights=P)


def leverage_scores(K: np.ndarray, k: int) -> np.ndarray:
    """Rank-k leverage scores of a PSD Gram matrix.

    Scores are diagonal entries of the projector onto the top-k eigenspace.
    When the k-th eigenvalue is tied with later ones the projector is not
    unique, so the tied block is included and rescaled to keep sum = k.
    """
    eig = psd_eig(K)
    if eig.rank == 0:
        raise InvalidInputError("leverage_scores: numerically zero Gram matrix")
    k = min(k, eig.rank)
    lam = eig.eigenvalues
    k_ext = k
    while k_ext < eig.rank and lam[k_ext] > lam[k - 1] * (1.0 - 1e-8):
        k_ext += 1
    V = eig.eigenvectors[:, :k_ext]
    return (k / k_ext) * np.einsum("ij,ij->i", V, V)


def sample_leverage(ds: Dataset, K: np.ndarray, k: int, m: int, seed: int) -> LandmarkSet:
    """Sample m indices with replacement proportional to rank-k leverage scores.

    Duplicates are dropped (they only add zero eigenvalues to K_mm), so the
    returned landmark count may be below m.
    """
    n = K.shape[0]
    if k > n or m > n:
        raise InvalidInputError(f"need k <= n and m <= n, got k={k}, m={m}, n={n}")
    lam_min = np.linalg.eigvalsh(K).min()
    if lam_min < -1e-8 * max(1.0, abs(K).max()):
        raise InvalidInputError("sample_leverage: Gram matrix is not PSD")
    scores = leverage_scores(K, k)
    probs = scores / scores.sum()
    draws = np.random.default_rng(seed).choice(n, size=m, replace=True, p=probs)
    idx = np.unique(draws)
    return LandmarkSet(
        "leverage",
        idx.size,
        seed,
        points=_dense_rows(ds, idx),
        weights=_selection_matrix(n, idx),
        indices=idx,
    )


def sample_kmeans(ds: Dataset, m: int, seed: int, max_iter: int = 100) -> LandmarkSet:
    """Lloyd's algorithm in input space; centroids become the landmarks.

    Centroids generally leave the span of the mapped training data, so no
    weight matrix is recorded and span-based equivalence checks are skipped.
    Empty clusters are reseeded at the point farthest from its centroid.
    """
    if not 1 <= m <= ds.n:
        raise InvalidInputError(f"need 1 <= m <= n, got m={m}, n={ds.n}")
    X = np.asarray(ds.X.todense(), dtype=float)
    rng = np.random.default_rng(seed)
    centers = X[rng.permutation(ds.n)[:m]].copy()
    assign = np.full(ds.n, -1)
    for _ in range(max_iter):
        d2 = (
            np.einsum("ij,ij->i", X, X)[:, None]
            + np.einsum("ij,ij->i", centers, centers)[None, :]
            - 2.0 * X @ centers.T
        )
        new_assign = np.argmin(d2, axis=1)
        for j in range(m):
            members = new_assign == j
            if members.any():
                centers[j] = X[members].mean(axis=0)
            else:
                worst = int(np.argmax(d2[np.arange(ds.n), new_assign]))
                centers[j] = X[worst]
                new_assign[worst] = j
        if np.array_equal(new_assign, assign):
            break
        assign = new_assign
    return LandmarkSet("kmeans", m, seed, points=centers)


def kmeans_objective(X: np.ndarray, centers: np.ndarray) -> float:
    """Sum of squared distances to the nearest centroid."""
    d2 = (
        np.einsum("ij,ij->i", X, X)[:, None]
        + np.einsum("ij,ij->i", centers, centers)[None, :]
        - 2.0 * X @ centers.T
    )
    return float(np.maximum(d2.min(axis=1), 0.0).sum())
