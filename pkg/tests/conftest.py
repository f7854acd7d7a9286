import numpy as np
import pytest

from nyskm.data import KernelConfig, gram
from nyskm.synth import make_gaussian_blobs


@pytest.fixture
def blobs():
    return make_gaussian_blobs(100, d=5, num_classes=3, seed=1)


@pytest.fixture
def kernel():
    return KernelConfig(gamma=2.0)


@pytest.fixture
def blobs_gram(blobs, kernel):
    return gram(blobs.X, blobs.X, kernel)


def embedding_factor(K: np.ndarray) -> np.ndarray:
    """Exact finite-feature factor L with K = L^T L (eigen square root)."""
    evals, evecs = np.linalg.eigh(0.5 * (K + K.T))
    evals = np.clip(evals, 0.0, None)
    return (evecs * np.sqrt(evals)).T
