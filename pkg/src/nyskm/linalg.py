"""Dense symmetric/PSD linear algebra shared by all other modules.

Everything here is a pure function of its inputs.  Decompositions go through
LAPACK (numpy/scipy), which is deterministic for identical input bits, so
seeded experiments are exactly repeatable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_REL_TOL = 1e-10


class InvalidInputError(ValueError):
    """Raised when a matrix argument violates an operation's preconditions."""


@dataclass(frozen=True)
class PsdEig:
    """Truncated spectral decomposition of a PSD matrix.

    eigenvalues: descending, strictly positive after truncation, length r.
    eigenvectors: (p, r), columns orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]


def _require_square(M: np.ndarray, op: str) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise InvalidInputError(f"{op}: expected a square matrix, got shape {M.shape}")
    return M


def psd_eig(S: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> PsdEig:
    """Eigendecomposition of a symmetric PSD matrix with rank truncation.

    Keeps eigenpairs with eigenvalue > rel_tol * lambda_max.  Returns an empty
    decomposition when the largest eigenvalue is <= 0.
    """
    S = _require_square(S, "psd_eig")
    if not 0.0 < rel_tol < 1.0:
        raise InvalidInputError(f"psd_eig: rel_tol must be in (0, 1), got {rel_tol}")
    scale = max(1.0, float(np.abs(S).max(initial=0.0)))
    if np.abs(S - S.T).max(initial=0.0) > 1e-10 * scale:
        raise InvalidInputError("psd_eig: input matrix is not symmetric")
    if S.size == 0:
        return PsdEig(np.empty(0), np.empty((0, 0)))
    evals, evecs = np.linalg.eigh(S)
    evals = evals[::-1]
    evecs = evecs[:, ::-1]
    lam_max = evals[0]
    if lam_max <= 0.0:
        return PsdEig(np.empty(0), np.empty((S.shape[0], 0)))
    keep = evals > rel_tol * lam_max
    return PsdEig(np.ascontiguousarray(evals[keep]), np.ascontiguousarray(evecs[:, keep]))


def pseudo_inverse(M: np.ndarray, rel_tol: float = DEFAULT_REL_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse via truncated SVD.

    Singular values <= rel_tol * sigma_max are treated as zero; a zero matrix
    maps to a zero matrix.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise InvalidInputError(f"pseudo_inverse: expected a 2-d array, got ndim {M.ndim}")
    if M.size == 0:
        return np.zeros((M.shape[1], M.shape[0]))
    U, sigma, Vt = np.linalg.svd(M, full_matrices=False)
    if sigma.size == 0 or sigma[0] <= 0.0:
        return np.zeros((M.shape[1], M.shape[0]))
    keep = sigma > rel_tol * sigma[0]
    U, sigma, Vt = U[:, keep], sigma[keep], Vt[keep]
    return (Vt.T / sigma) @ U.T


def solve_regularized(S: np.ndarray, B: np.ndarray, ridge: float) -> np.ndarray:
    """Solve (S + ridge*I) X = B for symmetric PSD S and ridge > 0.

    Cholesky on the shifted matrix plus one step of iterative refinement keeps
    the relative residual at the 1e-10 level even for ill-conditioned S.
    """
    S = _require_square(S, "solve_regularized")
    if not ridge > 0.0:
        raise InvalidInputError(f"solve_regularized: ridge must be > 0, got {ridge}")
    B = np.asarray(B, dtype=float)
    if B.shape[0] != S.shape[0]:
        raise InvalidInputError(
            f"solve_regularized: shape mismatch {S.shape} vs {B.shape}"
        )
    if S.shape[0] == 0:
        return np.zeros_like(B)
    A = S + ridge * np.eye(S.shape[0])
    factor = scipy.linalg.cho_factor(A, lower=True, check_finite=False)
    X = scipy.linalg.cho_solve(factor, B, check_finite=False)
    # one refinement sweep
    R = B - A @ X
    X = X + scipy.linalg.cho_solve(factor, R, check_finite=False)
    return X


def spectral_norm(M: np.ndarray) -> float:
    """Largest singular value of M."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.svd(M, compute_uv=False)[0])


def trace_of(M: np.ndarray) -> float:
    """Sum of the diagonal of a square matrix."""
    M = _require_square(M, "trace_of")
    return float(np.trace(M))
