"""Dataset ingestion, splitting and Gaussian kernel/Gram construction.

Input files use the SVM-light sparse text format: one example per line,
``<label> <index>:<value> ...`` with 1-based, strictly increasing indices.
``#`` starts a comment that runs to the end of the line.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .linalg import InvalidInputError


class ParseError(ValueError):
    """Malformed sparse dataset input; message names the offending line."""


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel exp(-||x - y||^2 / (2 gamma^2))."""

    gamma: float
    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind != "gaussian":
            raise InvalidInputError(f"unsupported kernel kind: {self.kind}")
        if not self.gamma > 0.0:
            raise InvalidInputError(f"gamma must be > 0, got {self.gamma}")


@dataclass
class Dataset:
    """Sparse feature rows with dense 0-based integer class labels.

    ``X`` is (n, d) CSR with column j holding the 1-based feature index j+1.
    ``class_names`` maps the dense label ids back to the original strings.
    """

    X: sp.csr_matrix
    labels: np.ndarray
    class_names: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    def subset(self, idx: np.ndarray) -> "Dataset":
        return Dataset(self.X[idx], self.labels[idx], self.class_names)


def parse_sparse_dataset(source) -> Dataset:
    """Parse SVM-light text into a Dataset.

    ``source`` may be a path, a string of text, or a readable text stream.
    Labels are remapped to dense 0-based ids in first-appearance order.
    """
    if isinstance(source, Path):
        text = source.read_text()
    elif isinstance(source, str):
        if "\n" not in source and Path(source).is_file():
            text = Path(source).read_text()
        else:
            text = source
    elif isinstance(source, bytes):
        text = source.decode("utf-8")
    else:
        text = source.read()
        if isinstance(text, bytes):
            text = text.decode("utf-8")

    label_ids: dict[str, int] = {}
    labels: list[int] = []
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    d = 0
    n = 0
    for lineno, raw in enumerate(io.StringIO(text), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        label_tok = tokens[0]
        if ":" in label_tok:
            raise ParseError(f"line {lineno}: missing label")
        if label_tok not in label_ids:
            label_ids[label_tok] = len(label_ids)
        labels.append(label_ids[label_tok])
        prev_idx = 0
        for tok in tokens[1:]:
            try:
                idx_s, val_s = tok.split(":", 1)
                idx = int(idx_s)
                val = float(val_s)
            except ValueError:
                raise ParseError(f"line {lineno}: malformed token {tok!r}") from None
            if idx <= prev_idx:
                raise ParseError(
                    f"line {lineno}: feature index {idx} not strictly increasing"
                )
            prev_idx = idx
            rows.append(n)
            cols.append(idx - 1)
            vals.append(val)
            d = max(d, idx)
        n += 1
    if n == 0:
        raise ParseError("line 0: empty dataset")
    X = sp.csr_matrix((vals, (rows, cols)), shape=(n, d))
    return Dataset(X, np.asarray(labels, dtype=np.int64), list(label_ids))


def serialize_dataset(ds: Dataset) -> str:
    """Render a Dataset back to SVM-light text (round-trips through parse)."""
    out = []
    coo = ds.X.tocoo()
    per_row: list[list[tuple[int, float]]] = [[] for _ in range(ds.n)]
    for i, j, v in zip(coo.row, coo.col, coo.data):
        per_row[i].append((int(j) + 1, float(v)))
    for i in range(ds.n):
        feats = " ".join(f"{j}:{v:.17g}" for j, v in sorted(per_row[i]))
        label = ds.class_names[ds.labels[i]]
        out.append(f"{label} {feats}".rstrip())
    return "\n".join(out) + "\n"


def split(
    ds: Dataset, fractions: tuple[float, float, float], seed: int
) -> tuple[Dataset, Dataset, Dataset]:
    """Disjoint train/validation/test partition via a seeded shuffle.

    Sizes are floor(n * fraction); leftover points go to the training split.
    """
    fr = np.asarray(fractions, dtype=float)
    if fr.shape != (3,) or np.any(fr <= 0.0) or abs(fr.sum() - 1.0) > 1e-9:
        raise InvalidInputError(f"bad split fractions {fractions}")
    n = ds.n
    n_val = int(np.floor(n * fr[1]))
    n_test = int(np.floor(n * fr[2]))
    n_train = n - n_val - n_test
    if min(n_train, n_val, n_test) < 1:
        raise InvalidInputError(f"split of n={n} with fractions {fractions} leaves an empty part")
    perm = np.random.default_rng(seed).permutation(n)
    tr = np.sort(perm[:n_train])
    va = np.sort(perm[n_train : n_train + n_val])
    te = np.sort(perm[n_train + n_val :])
    return ds.subset(tr), ds.subset(va), ds.subset(te)


def split_indices(n: int, fractions: tuple[float, float, float], seed: int):
    """The index partition used by ``split``, for manifest files."""
    fr = np.asarray(fractions, dtype=float)
    n_val = int(np.floor(n * fr[1]))
    n_test = int(np.floor(n * fr[2]))
    n_train = n - n_val - n_test
    perm = np.random.default_rng(seed).permutation(n)
    return (
        np.sort(perm[:n_train]),
        np.sort(perm[n_train : n_train + n_val]),
        np.sort(perm[n_train + n_val :]),
    )


def write_split_manifest(path, parts) -> None:
    """Persist the index partition as text: one ``name: i i i ...`` line each."""
    names = ("train", "val", "test")
    with open(path, "w") as fh:
        for name, idx in zip(names, parts):
            fh.write(name + ": " + " ".join(str(int(i)) for i in idx) + "\n")


def _dense(rows) -> np.ndarray:
    if sp.issparse(rows):
        return np.asarray(rows.todense(), dtype=float)
    return np.atleast_2d(np.asarray(rows, dtype=float))


def _pad(A: np.ndarray, d: int) -> np.ndarray:
    if A.shape[1] == d:
        return A
    if A.shape[1] > d:
        raise InvalidInputError(f"row dimension {A.shape[1]} exceeds {d}")
    out = np.zeros((A.shape[0], d))
    out[:, : A.shape[1]] = A
    return out


def kernel_eval(x, y, cfg: KernelConfig) -> float:
    """Gaussian kernel value for a single pair; exactly 1 when x equals y."""
    xd = _dense(x).ravel()
    yd = _dense(y).ravel()
    d = max(xd.size, yd.size)
    xd = np.pad(xd, (0, d - xd.size))
    yd = np.pad(yd, (0, d - yd.size))
    sq = float(np.sum((xd - yd) ** 2))
    return float(np.exp(-sq / (2.0 * cfg.gamma**2)))


def gram(A, B, cfg: KernelConfig) -> np.ndarray:
    """Pairwise Gaussian kernel matrix, |A| x |B|.

    When A and B are the same object the result is made exactly symmetric
    with a unit diagonal, so gram(A, B).T == gram(B, A) can be obtained by
    transposing a single evaluation.
    """
    same = A is B
    Ad = _dense(A)
    Bd = Ad if same else _dense(B)
    d = max(Ad.shape[1], Bd.shape[1])
    Ad = _pad(Ad, d)
    Bd = Ad if same else _pad(Bd, d)
    a2 = np.einsum("ij,ij->i", Ad, Ad)
    b2 = a2 if same else np.einsum("ij,ij->i", Bd, Bd)
    sq = a2[:, None] + b2[None, :] - 2.0 * (Ad @ Bd.T)
    np.maximum(sq, 0.0, out=sq)
    K = np.exp(-sq / (2.0 * cfg.gamma**2))
    if same:
        K = 0.5 * (K + K.T)
        np.fill_diagonal(K, 1.0)
    return K
