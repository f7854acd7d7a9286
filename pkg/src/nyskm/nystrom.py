"""Orthogonal basis construction and projected features (standard Nystrom).

From landmark kernel blocks K_mm and K_mn this module builds the basis map A
with A^T K_mm A = I, the projected training features G = A^T K_mn, and the
implied low-rank Gram approximation GtG.  GtG is only materialized for error
reporting and small tests; all production paths work with G.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset, KernelConfig, gram
from .linalg import InvalidInputError, psd_eig
from .sampling import LandmarkSet

SERIAL_VERSION = 1


class EmptyBasisError(RuntimeError):
    """Landmark kernel block is numerically zero; no basis exists."""


class UnsupportedPredictionError(RuntimeError):
    """Prediction requested on a model that did not retain what it needs."""


@dataclass
class NystromModel:
    """Landmark blocks plus the induced basis and projected features.

    Invariants: A^T K_mm A = I_s, G = A^T K_mn, s <= m <= n.
    ``train_X`` keeps the training rows (dense) when the landmark set is
    weight-based, since test projection then needs kernel rows against X.
    """

    landmarks: LandmarkSet
    A: np.ndarray
    G: np.ndarray
    K_mn: np.ndarray
    K_mm: np.ndarray
    s: int
    kernel: KernelConfig
    train_X: np.ndarray | None = None


def standard_basis(K_mm: np.ndarray, rel_tol: float = 1e-10) -> tuple[np.ndarray, int]:
    """Basis map A = V Sigma^{-1} from the spectral decomposition of K_mm."""
    eig = psd_eig(K_mm, rel_tol)
    if eig.rank == 0:
        raise EmptyBasisError("landmark Gram matrix is numerically zero")
    A = eig.eigenvectors / np.sqrt(eig.eigenvalues)
    return A, eig.rank


def kernel_blocks(
    landmarks: LandmarkSet, ds: Dataset, cfg: KernelConfig, K: np.ndarray | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """K_mn and K_mm for a landmark set against the training data.

    Explicit-point landmarks evaluate the kernel directly; weight-only
    landmarks (Gaussian sketch) need the full training Gram matrix K.
    """
    if landmarks.points is not None:
        K_mn = gram(landmarks.points, ds.X, cfg)
        K_mm = gram(landmarks.points, landmarks.points, cfg)
        return K_mn, K_mm
    if K is None:
        raise InvalidInputError("weight-based landmarks need the full Gram matrix")
    P = landmarks.weights
    K_mn = P.T @ K
    K_mm = P.T @ K @ P
    K_mm = 0.5 * (K_mm + K_mm.T)
    return K_mn, K_mm


def build(
    ds: Dataset,
    landmarks: LandmarkSet,
    cfg: KernelConfig,
    rel_tol: float = 1e-10,
    K: np.ndarray | None = None,
) -> NystromModel:
    """Assemble the full model: blocks, basis map A and features G."""
    K_mn, K_mm = kernel_blocks(landmarks, ds, cfg, K)
    A, s = standard_basis(K_mm, rel_tol)
    G = A.T @ K_mn
    train_X = None
    if landmarks.points is None:
        train_X = np.asarray(ds.X.todense(), dtype=float)
    return NystromModel(landmarks, A, G, K_mn, K_mm, s, cfg, train_X)


def project_train(model: NystromModel) -> np.ndarray:
    """G = A^T K_mn; column i holds the basis coordinates of projected x_i."""
    if model.A.shape[0] != model.K_mn.shape[0]:
        raise InvalidInputError("basis map and K_mn disagree on landmark count")
    return model.A.T @ model.K_mn


def project_test(model: NystromModel, Z) -> np.ndarray:
    """Basis coordinates t = A^T <C, Phi(z)> for each test row, shape (s, q)."""
    if model.landmarks.points is not None:
        k_C = gram(model.landmarks.points, Z, model.kernel)
        return model.A.T @ k_C
    if model.train_X is None:
        raise UnsupportedPredictionError(
            "weight-based landmarks without retained training rows"
        )
    k_X = gram(model.train_X, Z, model.kernel)
    return model.A.T @ (model.landmarks.weights.T @ k_X)


def gram_error_norms(K: np.ndarray, G: np.ndarray) -> tuple[float, float, float]:
    """Trace-norm error, spectral-norm error and min residual eigenvalue.

    The residual K - G^T G is PSD up to round-off, so its trace equals its
    trace norm; the minimum eigenvalue is returned as the PSD certificate.
    """
    if K.shape[0] != G.shape[1]:
        raise InvalidInputError(f"shape mismatch: K {K.shape} vs G {G.shape}")
    R = K - G.T @ G
    R = 0.5 * (R + R.T)
    evals = np.linalg.eigvalsh(R)
    return float(np.trace(R)), float(np.abs(evals).max()), float(evals.min())


def residual_trace_and_spectral(K: np.ndarray, G: np.ndarray) -> tuple[float, float]:
    """Cheap trace/spectral error of K - G^T G without forming the residual.

    Spectral norm comes from deterministic power iteration on the residual
    operator (fixed start vector), good to ~1e-10 relative on PSD residuals.
    """
    trace_err = float(np.trace(K)) - float(np.einsum("ij,ij->", G, G))
    n = K.shape[0]
    v = np.full(n, 1.0 / np.sqrt(n))
    lam = 0.0
    for _ in range(300):
        w = K @ v - G.T @ (G @ v)
        nrm = float(np.linalg.norm(w))
        if nrm == 0.0:
            return trace_err, 0.0
        w /= nrm
        lam_new = float(w @ (K @ w - G.T @ (G @ w)))
        if abs(lam_new - lam) <= 1e-12 * max(1.0, abs(lam_new)):
            lam = lam_new
            break
        lam, v = lam_new, w
    return trace_err, max(lam, 0.0)


def reconstruction_error(model: NystromModel, p, q, k_pq_exact: float) -> float:
    """|<p_proj, q_proj> - k(p, q)| for two individual points."""
    t_p = project_test(model, p).ravel()
    t_q = project_test(model, q).ravel()
    return abs(float(t_p @ t_q) - float(k_pq_exact))


def save_model(path, model: NystromModel, extra: dict | None = None) -> None:
    """Persist the model as a versioned npz container (little-endian arrays)."""
    payload = {
        "version": np.array([SERIAL_VERSION]),
        "strategy": np.array([model.landmarks.strategy]),
        "m": np.array([model.landmarks.m]),
        "source_seed": np.array([model.landmarks.source_seed]),
        "A": model.A.astype("<f8"),
        "G": model.G.astype("<f8"),
        "K_mn": model.K_mn.astype("<f8"),
        "K_mm": model.K_mm.astype("<f8"),
        "s": np.array([model.s]),
        "gamma": np.array([model.kernel.gamma]),
    }
    if model.landmarks.points is not None:
        payload["points"] = model.landmarks.points.astype("<f8")
    if model.landmarks.weights is not None:
        payload["weights"] = model.landmarks.weights.astype("<f8")
    if model.train_X is not None:
        payload["train_X"] = model.train_X.astype("<f8")
    for key, val in (extra or {}).items():
        payload[key] = val
    np.savez(path, **payload)


def load_model(path) -> tuple[NystromModel, dict]:
    """Inverse of ``save_model``; returns the model and any extra arrays."""
    with np.load(path, allow_pickle=False) as npz:
        if int(npz["version"][0]) != SERIAL_VERSION:
            raise InvalidInputError(f"unsupported model version {npz['version'][0]}")
        core = {
            "version", "strategy", "m", "source_seed", "A", "G", "K_mn",
            "K_mm", "s", "gamma", "points", "weights", "train_X",
        }
        landmarks = LandmarkSet(
            str(npz["strategy"][0]),
            int(npz["m"][0]),
            int(npz["source_seed"][0]),
            points=npz["points"] if "points" in npz else None,
            weights=npz["weights"] if "weights" in npz else None,
        )
        model = NystromModel(
            landmarks,
            npz["A"],
            npz["G"],
            npz["K_mn"],
            npz["K_mm"],
            int(npz["s"][0]),
            KernelConfig(gamma=float(npz["gamma"][0])),
            npz["train_X"] if "train_X" in npz else None,
        )
        extra = {k: npz[k] for k in npz.files if k not in core}
    return model, extra
