"""Shared training pipeline for the three Nystrom approaches.

Both test-time variants are trained through the identical steps (landmarks ->
K_mn, K_mm -> A -> G -> per-class w), so their linear weights W agree bitwise.
They differ only in prediction: the linearized approach scores through
A^T k_C(z), while the Gram-substitution approach scores through
(G^+)^T k_X(z) with dual coefficients alpha = G^+ w.  The analytic-constraint
approach for ridge regression coincides with the linearized one when the
standard basis is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import Dataset, KernelConfig, gram
from .linalg import InvalidInputError, pseudo_inverse, solve_regularized
from .nystrom import NystromModel, build, project_test
from .sampling import LandmarkSet

APPROACHES = ("lla", "gsa", "ncr")


@dataclass
class SolverConfig:
    """Loss/regularization settings for the linear solver on G.

    reg_lambda0 is the ridge term lambda_0 = n * lambda for squared loss;
    svm_C, max_iter, tol drive the hinge-loss dual coordinate descent.
    ``seed`` feeds the epoch-wise coordinate permutations, making SVM
    training deterministic.
    """

    loss: str = "squared"
    reg_lambda0: float = 1.0
    svm_C: float = 1.0
    max_iter: int = 1000
    tol: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.loss not in ("squared", "hinge"):
            raise InvalidInputError(f"unknown loss {self.loss!r}")
        if self.loss == "squared" and not self.reg_lambda0 > 0.0:
            raise InvalidInputError("reg_lambda0 must be > 0")
        if self.loss == "hinge" and not self.svm_C > 0.0:
            raise InvalidInputError("svm_C must be > 0")


@dataclass
class TrainedModel:
    """Solver weights plus the data each approach needs at test time."""

    approach: str
    nystrom: NystromModel
    W: np.ndarray                     # (s, c)
    class_names: list[str] = field(default_factory=list)
    Alpha: np.ndarray | None = None   # (n, c), gsa only
    Gpinv: np.ndarray | None = None   # (n, s), gsa only
    train_X: np.ndarray | None = None # retained rows, gsa only

    @property
    def num_classes(self) -> int:
        return self.W.shape[1]


def solve_ridge_linear(G: np.ndarray, y: np.ndarray, lambda0: float) -> np.ndarray:
    """w = (G G^T + lambda0 I)^{-1} G y."""
    return solve_regularized(G @ G.T, G @ y, lambda0)


def solve_svm_linear(
    G: np.ndarray,
    y: np.ndarray,
    C: float,
    max_iter: int = 1000,
    tol: float = 1e-6,
    seed: int = 0,
    return_alpha: bool = False,
) -> np.ndarray:
    """Dual coordinate descent for the hinge-loss linear SVM on columns of G.

    Maximizes sum(alpha) - 0.5 ||sum alpha_i y_i g_i||^2 over 0 <= alpha <= C
    and returns the primal w = sum alpha_i y_i g_i (with the dual variables
    as a second value when return_alpha is set).  Stops when the largest
    projected-gradient violation over an epoch drops below tol.
    """
    y = np.asarray(y, dtype=float)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise InvalidInputError("solve_svm_linear: labels must be in {-1, +1}")
    s, n = G.shape
    Qdiag = np.einsum("ij,ij->j", G, G)
    alpha = np.zeros(n)
    w = np.zeros(s)
    rng = np.random.default_rng(seed)
    for _ in range(max_iter):
        max_violation = 0.0
        for i in rng.permutation(n):
            if Qdiag[i] <= 0.0:
                continue
            g_i = G[:, i]
            grad = y[i] * float(w @ g_i) - 1.0
            if alpha[i] <= 0.0:
                pg = min(grad, 0.0)
            elif alpha[i] >= C:
                pg = max(grad, 0.0)
            else:
                pg = grad
            max_violation = max(max_violation, abs(pg))
            if pg != 0.0:
                new = min(max(alpha[i] - grad / Qdiag[i], 0.0), C)
                if new != alpha[i]:
                    w = w + (new - alpha[i]) * y[i] * g_i
                    alpha[i] = new
        if max_violation < tol:
            break
    if return_alpha:
        return w, alpha
    return w


def svm_dual_objective(G: np.ndarray, y: np.ndarray, alpha: np.ndarray) -> float:
    """Dual objective sum(alpha) - 0.5 ||G (alpha * y)||^2."""
    v = G @ (alpha * y)
    return float(alpha.sum() - 0.5 * v @ v)


def _solve_all_classes(
    G: np.ndarray, labels: np.ndarray, c: int, solver: SolverConfig
) -> np.ndarray:
    W = np.empty((G.shape[0], c))
    for k in range(c):
        y = np.where(labels == k, 1.0, -1.0)
        if solver.loss == "squared":
            W[:, k] = solve_ridge_linear(G, y, solver.reg_lambda0)
        else:
            W[:, k] = solve_svm_linear(
                G, y, solver.svm_C, solver.max_iter, solver.tol, solver.seed
            )
    return W


def lla_to_gsa_alpha(G: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Dual coefficients alpha = G^+ w for the Gram-substitution view."""
    return pseudo_inverse(G) @ w


def train(
    ds: Dataset,
    kernel: KernelConfig,
    landmarks: LandmarkSet,
    solver: SolverConfig,
    approach: str = "lla",
    K: np.ndarray | None = None,
    nystrom_model: NystromModel | None = None,
) -> TrainedModel:
    """One-vs-rest training through the shared low-rank pipeline.

    With approach "gsa" the model additionally carries G^+ and the dual
    coefficient matrix Alpha = G^+ W, and retains the training rows for
    kernel-row evaluation at test time.  "ncr" is identical to "lla" under
    the standard basis.
    """
    if approach not in APPROACHES:
        raise InvalidInputError(f"unknown approach {approach!r}")
    nmodel = nystrom_model or build(ds, landmarks, kernel, K=K)
    c = max(ds.num_classes, 2)
    W = _solve_all_classes(nmodel.G, ds.labels, c, solver)
    model = TrainedModel(approach, nmodel, W, list(ds.class_names))
    if approach == "gsa":
        model.Gpinv = pseudo_inverse(nmodel.G)
        model.Alpha = model.Gpinv @ W
        model.train_X = (
            nmodel.train_X
            if nmodel.train_X is not None
            else np.asarray(ds.X.todense(), dtype=float)
        )
    return model


def train_both(
    ds: Dataset,
    kernel: KernelConfig,
    landmarks: LandmarkSet,
    solver: SolverConfig,
    K: np.ndarray | None = None,
) -> tuple[TrainedModel, TrainedModel]:
    """LLA and GSA models sharing the identical basis, G and W."""
    nmodel = build(ds, landmarks, kernel, K=K)
    c = max(ds.num_classes, 2)
    W = _solve_all_classes(nmodel.G, ds.labels, c, solver)
    lla = TrainedModel("lla", nmodel, W, list(ds.class_names))
    gsa = TrainedModel("gsa", nmodel, W, list(ds.class_names))
    gsa.Gpinv = pseudo_inverse(nmodel.G)
    gsa.Alpha = gsa.Gpinv @ W
    gsa.train_X = (
        nmodel.train_X
        if nmodel.train_X is not None
        else np.asarray(ds.X.todense(), dtype=float)
    )
    return lla, gsa


def decision_scores(model: TrainedModel, Z) -> np.ndarray:
    """Per-class scores for test rows, shape (q, c)."""
    if model.approach in ("lla", "ncr"):
        T = project_test(model.nystrom, Z)
    else:
        k_X = gram(model.train_X, Z, model.nystrom.kernel)
        T = model.Gpinv.T @ k_X
    return (model.W.T @ T).T


def predict(model: TrainedModel, Z) -> tuple[np.ndarray, np.ndarray]:
    """Scores and argmax class ids (ties break toward the lowest id)."""
    scores = decision_scores(model, Z)
    return scores, np.argmax(scores, axis=1)


def ncr_krr_analytic(
    K_mn: np.ndarray, K_mm: np.ndarray, y: np.ndarray, lambda0: float
) -> np.ndarray:
    """Analytic ridge solution constrained to the landmark span.

    Returns beta with f(z) = beta^T k_C(z), from
    beta = (K_mn K_nm + lambda0 K_mm)^+ K_mn y.
    """
    if not lambda0 > 0.0:
        raise InvalidInputError("lambda0 must be > 0")
    H = K_mn @ K_mn.T + lambda0 * K_mm
    H = 0.5 * (H + H.T)
    return pseudo_inverse(H) @ (K_mn @ y)


def gsa_krr_woodbury(G: np.ndarray, y: np.ndarray, lambda0: float) -> np.ndarray:
    """Ridge dual solve (G^T G + lambda0 I) alpha = y at O(n s^2) cost."""
    if not lambda0 > 0.0:
        raise InvalidInputError("lambda0 must be > 0")
    return (y - G.T @ solve_regularized(G @ G.T, G @ y, lambda0)) / lambda0


def krr_dual_objective(
    G: np.ndarray, y: np.ndarray, alpha: np.ndarray, lambda0: float
) -> float:
    """Substituted-Gram ridge objective (1/n)||Ktil a - y||^2 + (l0/n) a' Ktil a."""
    n = y.shape[0]
    Ka = G.T @ (G @ alpha)
    r = Ka - y
    return float(r @ r + lambda0 * alpha @ Ka) / n
