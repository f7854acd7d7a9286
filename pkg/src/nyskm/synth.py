"""Synthetic classification datasets in the sparse text format.

Generators mirror the shape of the LIBSVM-archive benchmarks used for the
error-vs-landmark-ratio experiments (binary feature vectors, a handful of
classes) so sweeps run offline at desk scale.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .data import Dataset


def make_binary_blobs(
    n: int,
    d: int = 180,
    num_classes: int = 3,
    seed: int = 0,
    flip: float = 0.08,
) -> Dataset:
    """Binary feature vectors around per-class template bit patterns.

    Each class gets a random template in {0,1}^d; every sample copies its
    class template and flips each bit independently with probability ``flip``.
    """
    rng = np.random.default_rng(seed)
    templates = rng.random((num_classes, d)) < 0.5
    labels = rng.integers(0, num_classes, size=n)
    rows = templates[labels]
    flips = rng.random((n, d)) < flip
    rows = np.logical_xor(rows, flips).astype(float)
    X = sp.csr_matrix(rows)
    return Dataset(X, labels.astype(np.int64), [str(k) for k in range(num_classes)])


def make_gaussian_blobs(
    n: int,
    d: int = 10,
    num_classes: int = 2,
    seed: int = 0,
    spread: float = 1.0,
    separation: float = 4.0,
) -> Dataset:
    """Dense Gaussian clusters, one per class, as a sparse-matrix Dataset."""
    rng = np.random.default_rng(seed)
    centers = rng.standard_normal((num_classes, d)) * separation
    labels = rng.integers(0, num_classes, size=n)
    rows = centers[labels] + spread * rng.standard_normal((n, d))
    X = sp.csr_matrix(rows)
    return Dataset(X, labels.astype(np.int64), [str(k) for k in range(num_classes)])
