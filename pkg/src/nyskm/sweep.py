"""Experiment driver: (strategy x ratio x seed) sweeps with error reports.

Every trial trains the linearized (lla) and Gram-substitution (gsa) variants
through the shared pipeline and measures their exact approximation errors
against the m = n reference model, which is computed once per run.  Output is
a versioned CSV (one row per trial and approach) plus per-cell aggregates.
"""

from __future__ import annotations

import csv
import hashlib
import math
import time
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from . import analysis, machines
from .data import (
    Dataset,
    KernelConfig,
    gram,
    parse_sparse_dataset,
    split,
    split_indices,
    write_split_manifest,
)
from .linalg import InvalidInputError
from .nystrom import residual_trace_and_spectral
from .sampling import (
    STRATEGIES,
    sample_gaussian_sketch,
    sample_kmeans,
    sample_leverage,
    sample_uniform,
)

CSV_SCHEMA_VERSION = 1
CSV_COLUMNS = [
    "dataset", "strategy", "approach", "ratio", "m", "s", "seed", "acc",
    "err_lla", "err_gsa", "bound_lla", "gram_trace_err", "gram_spectral_err",
    "wall_ms", "config_hash",
]


@dataclass
class ExperimentConfig:
    """Flat sweep configuration; mirrors the key=value config file."""

    dataset_path: str = ""
    dataset_name: str = ""
    gamma: float = 1.0
    loss: str = "squared"
    lambda0: float = 1.0
    svm_c: float = 1.0
    svm_max_iter: int = 1000
    svm_tol: float = 1e-6
    strategies: tuple[str, ...] = ("uniform",)
    ratios: tuple[float, ...] = (0.01, 0.02, 0.05, 0.10)
    seeds: int = 30
    output_dir: str = "out"
    exact_cap: int = 10000
    split_train: float = 0.64
    split_val: float = 0.16
    split_test: float = 0.20
    split_seed: int = 0
    leverage_k: int = 0          # 0 -> use m
    kmeans_max_iter: int = 100
    record_timing: bool = False
    standardize: bool = False

    def validate(self) -> None:
        problems = []
        if not self.dataset_path:
            problems.append("dataset_path is required")
        if not self.gamma > 0:
            problems.append(f"gamma must be > 0, got {self.gamma}")
        if self.loss not in ("squared", "hinge"):
            problems.append(f"loss must be squared or hinge, got {self.loss!r}")
        for st in self.strategies:
            if st not in STRATEGIES:
                problems.append(f"unknown strategy {st!r}")
        for r in self.ratios:
            if not 0.0 < r <= 1.0:
                problems.append(f"ratio {r} outside (0, 1]")
        if self.seeds < 1:
            problems.append("seeds must be >= 1")
        frac_sum = self.split_train + self.split_val + self.split_test
        if abs(frac_sum - 1.0) > 1e-9:
            problems.append(f"split fractions sum to {frac_sum}, expected 1")
        if problems:
            raise InvalidInputError("invalid config:\n  " + "\n  ".join(problems))

    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(str(v) for v in value)
            lines.append(f"{f.name}={value}")
        return "\n".join(lines) + "\n"

    def hash(self) -> str:
        return hashlib.sha256(self.to_text().encode()).hexdigest()[:12]


_BOOL_KEYS = {"record_timing", "standardize"}
_INT_KEYS = {
    "seeds", "exact_cap", "split_seed", "leverage_k", "kmeans_max_iter",
    "svm_max_iter",
}
_FLOAT_KEYS = {
    "gamma", "lambda0", "svm_c", "svm_tol", "split_train", "split_val",
    "split_test",
}


def _coerce(key: str, raw: str):
    raw = raw.strip()
    if key in _BOOL_KEYS:
        return raw.lower() in ("1", "true", "yes", "on")
    if key in _INT_KEYS:
        return int(raw)
    if key in _FLOAT_KEYS:
        return float(raw)
    if key == "strategies":
        return tuple(s.strip() for s in raw.split(",") if s.strip())
    if key == "ratios":
        return tuple(float(s) for s in raw.split(",") if s.strip())
    return raw


def load_config(path, overrides: list[str] | None = None) -> ExperimentConfig:
    """Read a key=value config file, then apply ``key=value`` overrides."""
    known = {f.name for f in fields(ExperimentConfig)}
    values: dict = {}
    problems = []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected key=value, got {line!r}")
            continue
        key, val = line.split("=", 1)
        key = key.strip()
        if key not in known:
            problems.append(f"line {lineno}: unknown key {key!r}")
            continue
        values[key] = _coerce(key, val)
    for item in overrides or []:
        if "=" not in item:
            problems.append(f"override {item!r}: expected key=value")
            continue
        key, val = item.split("=", 1)
        if key not in known:
            problems.append(f"override: unknown key {key!r}")
            continue
        values[key] = _coerce(key, val)
    if problems:
        raise InvalidInputError("invalid config:\n  " + "\n  ".join(problems))
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


def _standardize(ds: Dataset) -> Dataset:
    X = np.asarray(ds.X.todense(), dtype=float)
    mu = X.mean(axis=0)
    sd = X.std(axis=0)
    sd[sd == 0.0] = 1.0
    import scipy.sparse as sp

    return Dataset(sp.csr_matrix((X - mu) / sd), ds.labels, ds.class_names)


def _accuracy(model: machines.TrainedModel, ds: Dataset) -> float:
    _, pred = machines.predict(model, ds.X)
    return float(np.mean(pred == ds.labels))


def _sample(strategy: str, cfg: ExperimentConfig, train: Dataset, m: int, seed: int,
            K: np.ndarray | None):
    if strategy == "uniform":
        return sample_uniform(train, m, seed)
    if strategy == "gaussian":
        return sample_gaussian_sketch(train.n, m, seed)
    if strategy == "leverage":
        if K is None:
            raise InvalidInputError("leverage sampling needs the full Gram matrix")
        k = cfg.leverage_k or m
        return sample_leverage(train, K, k, m, seed)
    return sample_kmeans(train, m, seed, cfg.kmeans_max_iter)


@dataclass
class SweepResult:
    csv_path: Path
    aggregate_path: Path
    rows: list[dict] = field(default_factory=list)


def exact_reference(
    train: Dataset, kernel: KernelConfig, solver: machines.SolverConfig,
    K: np.ndarray,
) -> tuple[machines.TrainedModel, np.ndarray]:
    """The m = n uniform-landmark model and its dual coefficients alpha_tilde."""
    landmarks = sample_uniform(train, train.n, seed=0)
    model = machines.train(train, kernel, landmarks, solver, "gsa", K=K)
    return model, model.Alpha


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Execute the full sweep and write sweep.csv plus aggregates.csv."""
    cfg.validate()
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)

    ds = parse_sparse_dataset(cfg.dataset_path)
    if cfg.standardize:
        ds = _standardize(ds)
    name = cfg.dataset_name or Path(cfg.dataset_path).stem
    fractions = (cfg.split_train, cfg.split_val, cfg.split_test)
    train, _val, test = split(ds, fractions, cfg.split_seed)
    write_split_manifest(
        out / "split_manifest.txt", split_indices(ds.n, fractions, cfg.split_seed)
    )
    (out / "resolved_config.txt").write_text(cfg.to_text())
    cfg_hash = cfg.hash()

    kernel = KernelConfig(gamma=cfg.gamma)
    solver = machines.SolverConfig(
        loss=cfg.loss,
        reg_lambda0=cfg.lambda0,
        svm_C=cfg.svm_c,
        max_iter=cfg.svm_max_iter,
        tol=cfg.svm_tol,
        seed=cfg.split_seed,
    )

    n = train.n
    exact_ok = n <= cfg.exact_cap
    if not exact_ok:
        needy = [s for s in cfg.strategies if s in ("gaussian", "leverage")]
        if needy:
            raise InvalidInputError(
                f"strategies {needy} need the full Gram matrix; n={n} exceeds "
                f"exact_cap={cfg.exact_cap}"
            )
    K = gram(train.X, train.X, kernel) if exact_ok else None

    alpha_tilde = None
    acc_exact = math.nan
    k_spectral = math.nan
    if exact_ok:
        exact_model, alpha_tilde = exact_reference(train, kernel, solver, K)
        acc_exact = _accuracy(exact_model, test)
        k_spectral = float(np.linalg.eigvalsh(K)[-1])

    rows: list[dict] = []
    num_classes = max(train.num_classes, 2)
    for strategy in cfg.strategies:
        for ratio in cfg.ratios:
            m = int(math.ceil(ratio * n))
            for seed in range(cfg.seeds):
                t0 = time.perf_counter()
                landmarks = _sample(strategy, cfg, train, m, seed, K)
                lla, gsa = machines.train_both(train, kernel, landmarks, solver, K=K)
                acc_lla = _accuracy(lla, test)
                acc_gsa = _accuracy(gsa, test)
                e_lla = e_gsa = b_lla = tr_err = sp_err = math.nan
                if exact_ok:
                    G = lla.nystrom.G
                    tr_err, sp_err = residual_trace_and_spectral(K, G)
                    per_lla, per_gsa, per_bound = [], [], []
                    for k in range(num_classes):
                        ah = gsa.Alpha[:, k]
                        at = alpha_tilde[:, k]
                        per_lla.append(analysis.err_lla(ah, at, K, G))
                        per_gsa.append(analysis.err_gsa(ah, at, K))
                        per_bound.append(
                            analysis.bound_lla(
                                K, G, ah, at,
                                gram_spectral_err=sp_err, k_spectral=k_spectral,
                            )
                        )
                    e_lla = analysis.multiclass_rss(per_lla)
                    e_gsa = analysis.multiclass_rss(per_gsa)
                    b_lla = analysis.multiclass_rss(per_bound)
                wall_ms = (
                    int(round((time.perf_counter() - t0) * 1000.0))
                    if cfg.record_timing
                    else 0
                )
                for approach, acc in (("lla", acc_lla), ("gsa", acc_gsa)):
                    rows.append({
                        "dataset": name,
                        "strategy": strategy,
                        "approach": approach,
                        "ratio": ratio,
                        "m": landmarks.m,
                        "s": lla.nystrom.s,
                        "seed": seed,
                        "acc": acc,
                        "err_lla": e_lla,
                        "err_gsa": e_gsa,
                        "bound_lla": b_lla,
                        "gram_trace_err": tr_err,
                        "gram_spectral_err": sp_err,
                        "wall_ms": wall_ms,
                        "config_hash": cfg_hash,
                    })

    rows.sort(key=lambda r: (r["strategy"], r["ratio"], r["seed"], r["approach"]))
    csv_path = out / "sweep.csv"
    _write_rows(csv_path, rows)
    agg_path = out / "aggregates.csv"
    _write_aggregates(agg_path, rows)
    return SweepResult(csv_path, agg_path, rows)


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_rows(path: Path, rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# nyskm-sweep-csv v{CSV_SCHEMA_VERSION}\n")
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in rows:
            writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])


def read_rows(path) -> list[dict]:
    """Read a sweep CSV back into typed row dicts."""
    with open(path) as fh:
        first = fh.readline()
        if not first.startswith("# nyskm-sweep-csv"):
            fh.seek(0)
        reader = csv.DictReader(fh)
        missing = set(CSV_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise InvalidInputError(f"sweep CSV missing columns: {sorted(missing)}")
        rows = []
        for rec in reader:
            row = dict(rec)
            for key in ("ratio", "acc", "err_lla", "err_gsa", "bound_lla",
                        "gram_trace_err", "gram_spectral_err"):
                row[key] = float(rec[key])
            for key in ("m", "s", "seed", "wall_ms"):
                row[key] = int(rec[key])
            rows.append(row)
    return rows


def _aggregate_cells(rows: list[dict]) -> list[dict]:
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault(
            (row["dataset"], row["strategy"], row["ratio"], row["approach"]), []
        ).append(row)
    out = []
    for (dataset, strategy, ratio, approach), members in sorted(cells.items()):
        rec = {
            "dataset": dataset, "strategy": strategy, "ratio": ratio,
            "approach": approach, "trials": len(members),
        }
        for metric in ("acc", "err_lla", "err_gsa", "bound_lla"):
            vals = np.array([m[metric] for m in members])
            rec[f"{metric}_mean"] = float(np.mean(vals))
            rec[f"{metric}_std"] = float(np.std(vals))
            rec[f"{metric}_median"] = float(np.median(vals))
        out.append(rec)
    return out


def _write_aggregates(path: Path, rows: list[dict]) -> None:
    aggs = _aggregate_cells(rows)
    if not aggs:
        path.write_text("")
        return
    columns = list(aggs[0])
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for rec in aggs:
            writer.writerow([_fmt(rec[c]) for c in columns])


def emit_plot_data(csv_path, out_dir) -> list[Path]:
    """Whitespace-delimited per-(dataset, strategy) tables for plotting.

    Columns: ratio, mean and std of err_gsa, err_lla, acc_gsa, acc_lla.
    Cells without trials are omitted with a warning.
    """
    import warnings

    rows = read_rows(csv_path)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["dataset"], row["strategy"]), []).append(row)
    written = []
    header = (
        "ratio err_gsa_mean err_gsa_std err_lla_mean err_lla_std "
        "acc_gsa_mean acc_gsa_std acc_lla_mean acc_lla_std"
    )
    for (dataset, strategy), members in sorted(groups.items()):
        ratios = sorted({m["ratio"] for m in members})
        lines = [header]
        for ratio in ratios:
            cell = [m for m in members if m["ratio"] == ratio]
            gsa = [m for m in cell if m["approach"] == "gsa"]
            lla = [m for m in cell if m["approach"] == "lla"]
            if not gsa or not lla:
                warnings.warn(
                    f"{dataset}/{strategy} ratio {ratio}: no trials, row omitted"
                )
                continue
            stats = []
            for vals in (
                [m["err_gsa"] for m in gsa],
                [m["err_lla"] for m in lla],
            ):
                arr = np.array(vals)
                stats += [float(np.mean(arr)), float(np.std(arr))]
            for vals in (
                [m["acc"] for m in gsa],
                [m["acc"] for m in lla],
            ):
                arr = np.array(vals)
                stats += [float(np.mean(arr)), float(np.std(arr))]
            lines.append(" ".join([_fmt(ratio)] + [_fmt(v) for v in stats]))
        target = out / f"{dataset}_{strategy}.dat"
        target.write_text("\n".join(lines) + "\n")
        written.append(target)
    return written
