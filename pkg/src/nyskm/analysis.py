"""Exact approximation errors, the spectral error bound, and structural checks.

The exact errors compare an approximate solution against the non-approximate
optimum f* = X alpha_tilde in feature space, using only Gram-matrix algebra:
the low-rank approximation is always applied as G^T (G v), never materialized.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .linalg import InvalidInputError, pseudo_inverse, spectral_norm

log = logging.getLogger(__name__)


@dataclass
class ErrorReport:
    """Per-trial error and accuracy summary for one landmark configuration.

    Multiclass errors aggregate the per-class one-vs-rest decision functions
    by root-sum-of-squares (recorded in sweep metadata).
    """

    err_lla: float
    err_gsa: float
    bound_lla: float
    gram_trace_err: float
    gram_spectral_err: float
    acc_lla: float
    acc_gsa: float
    acc_exact: float
    ratio: float
    seed: int
    strategy: str


def _clamped_sqrt(value: float) -> float:
    if value < -1e-8:
        log.warning("clamping negative squared error %.3e to 0", value)
    return float(np.sqrt(max(value, 0.0)))


def err_lla(
    alpha_hat: np.ndarray, alpha_tilde: np.ndarray, K: np.ndarray, G: np.ndarray
) -> float:
    """Exact ||f_approx - f*|| for the projection-based (linearized) solution.

    Squared value: ah' Ktil ah + at' K at - 2 ah' Ktil at, with Ktil = G'G.
    """
    if alpha_hat.shape != alpha_tilde.shape or K.shape[0] != alpha_hat.shape[0]:
        raise InvalidInputError("err_lla: dimension mismatch")
    g_hat = G @ alpha_hat
    g_tilde = G @ alpha_tilde
    sq = (
        float(g_hat @ g_hat)
        + float(alpha_tilde @ (K @ alpha_tilde))
        - 2.0 * float(g_hat @ g_tilde)
    )
    return _clamped_sqrt(sq)


def err_gsa(alpha_hat: np.ndarray, alpha_tilde: np.ndarray, K: np.ndarray) -> float:
    """Exact ||f_approx - f*|| for the substitution solution: sqrt(d' K d)."""
    if alpha_hat.shape != alpha_tilde.shape or K.shape[0] != alpha_hat.shape[0]:
        raise InvalidInputError("err_gsa: dimension mismatch")
    d = alpha_tilde - alpha_hat
    return _clamped_sqrt(float(d @ (K @ d)))


def bound_lla(
    K: np.ndarray,
    G: np.ndarray,
    alpha_hat: np.ndarray,
    alpha_tilde: np.ndarray,
    gram_spectral_err: float | None = None,
    k_spectral: float | None = None,
) -> float:
    """Spectral error bound dominating err_lla.

    ||K - Ktil||_2^(1/2) ||at|| + ||K||_2^(1/2) ||ah - at||.  The two spectral
    norms can be passed in when precomputed by the sweep driver.
    """
    if alpha_hat.shape != alpha_tilde.shape or K.shape[0] != alpha_hat.shape[0]:
        raise InvalidInputError("bound_lla: dimension mismatch")
    if gram_spectral_err is None:
        R = K - G.T @ G
        gram_spectral_err = spectral_norm(0.5 * (R + R.T))
    if k_spectral is None:
        k_spectral = spectral_norm(K)
    return float(
        np.sqrt(max(gram_spectral_err, 0.0)) * np.linalg.norm(alpha_tilde)
        + np.sqrt(k_spectral) * np.linalg.norm(alpha_hat - alpha_tilde)
    )


def multiclass_rss(values) -> float:
    """Root-sum-of-squares aggregation over per-class values."""
    v = np.asarray(values, dtype=float)
    return float(np.sqrt(np.sum(v * v)))


def column_inclusion_check(
    K: np.ndarray, k: np.ndarray, tol: float = 1e-6, K_pinv: np.ndarray | None = None
) -> bool:
    """Does the kernel column k lie in the range of K (up to tol)?

    Checks ||K (K^+ k) - k|| <= tol * max(1, ||k||).  A precomputed K^+ may
    be passed when testing many columns against one Gram matrix.
    """
    k = np.asarray(k, dtype=float).ravel()
    if K_pinv is None:
        K_pinv = pseudo_inverse(K)
    residual = K @ (K_pinv @ k) - k
    return float(np.linalg.norm(residual)) <= tol * max(1.0, float(np.linalg.norm(k)))


def span_rank_certificate(G: np.ndarray, rel_tol: float = 1e-8) -> bool:
    """True iff G has full numerical row rank.

    For landmark sets of the form C = X P this certifies that the projected
    training data span the whole basis, hence strong equivalence between the
    projection and linearized formulations.
    """
    if G.size == 0:
        return False
    sigma = np.linalg.svd(G, compute_uv=False)
    if sigma[0] <= 0.0:
        return False
    return int(np.sum(sigma > rel_tol * sigma[0])) == G.shape[0]


def ksvm_rate_ratio(err: float, gram_spectral_err: float) -> float:
    """Diagnostic ratio err / ||K - Ktil||_2^(1/4) (constant unknown)."""
    if gram_spectral_err <= 0.0:
        return 0.0
    return err / gram_spectral_err**0.25
