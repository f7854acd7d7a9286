"""Command-line entry point.

Subcommands:
  run    -- execute a sweep from a key=value config file
  plot   -- turn a sweep CSV into delimited plot tables and PNG figures
  verify -- run the structural property checks on synthetic data
  synth  -- write a synthetic sparse-format dataset
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import analysis, machines, sweep, synth
from .data import KernelConfig, gram, serialize_dataset
from .linalg import pseudo_inverse
from .nystrom import build, gram_error_norms
from .sampling import sample_uniform


def _cmd_run(args) -> int:
    cfg = sweep.load_config(args.config, args.override)
    result = sweep.run_sweep(cfg)
    print(f"wrote {result.csv_path} ({len(result.rows)} rows)")
    print(f"wrote {result.aggregate_path}")
    return 0


def _cmd_plot(args) -> int:
    tables = sweep.emit_plot_data(args.input, args.out)
    for t in tables:
        print(f"wrote {t}")
    if not args.no_figures:
        from .plots import render_all

        for p in render_all(tables, args.out):
            print(f"wrote {p}")
    return 0


def _cmd_verify(args) -> int:
    """Quick numeric audit of the core invariants on synthetic data."""
    rng = np.random.default_rng(args.seed)
    ds = synth.make_gaussian_blobs(120, d=6, num_classes=2, seed=args.seed)
    kernel = KernelConfig(gamma=2.0)
    K = gram(ds.X, ds.X, kernel)
    checks: list[tuple[str, bool]] = []

    landmarks = sample_uniform(ds, 15, seed=args.seed)
    model = build(ds, landmarks, kernel, K=K)
    ortho = np.linalg.norm(model.A.T @ model.K_mm @ model.A - np.eye(model.s))
    checks.append(("basis orthonormality (1e-8)", ortho <= 1e-8))

    tr, spec, min_eig = gram_error_norms(K, model.G)
    checks.append(("residual PSD certificate", min_eig >= -1e-8 * max(spec, 1.0)))
    checks.append(("trace error nonnegative", tr >= -1e-8))

    kpinv = pseudo_inverse(K)
    cols_ok = True
    for _ in range(20):
        z = rng.standard_normal((1, 6))
        k = gram(ds.X, z, kernel).ravel()
        cols_ok &= analysis.column_inclusion_check(K, k, 1e-6, K_pinv=kpinv)
    checks.append(("column inclusion (20 fresh points)", cols_ok))

    checks.append(("span rank certificate", analysis.span_rank_certificate(model.G)))

    solver = machines.SolverConfig(loss="squared", reg_lambda0=1.0)
    lla, gsa = machines.train_both(ds, kernel, landmarks, solver, K=K)
    w = lla.W[:, 0]
    beta = machines.ncr_krr_analytic(
        model.K_mn, model.K_mm, np.where(ds.labels == 0, 1.0, -1.0), 1.0
    )
    z = rng.standard_normal((30, 6))
    pred_lla = (w @ (model.A.T @ gram(landmarks.points, z, kernel))).ravel()
    pred_ncr = (beta @ gram(landmarks.points, z, kernel)).ravel()
    checks.append(("analytic-constraint == linearized KRR (1e-6)",
                   np.max(np.abs(pred_lla - pred_ncr)) <= 1e-6))

    ok = True
    for label, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {label}")
        ok &= passed
    return 0 if ok else 1


def _cmd_synth(args) -> int:
    ds = synth.make_binary_blobs(
        args.n, d=args.features, num_classes=args.classes,
        seed=args.seed, flip=args.flip,
    )
    Path(args.out).write_text(serialize_dataset(ds))
    print(f"wrote {args.out} (n={ds.n}, d={ds.d}, classes={ds.num_classes})")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nyskm")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a sweep from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--override", action="append", default=[],
                       metavar="KEY=VALUE")
    p_run.set_defaults(func=_cmd_run)

    p_plot = sub.add_parser("plot", help="emit plot tables and figures")
    p_plot.add_argument("--input", required=True, help="sweep CSV path")
    p_plot.add_argument("--out", required=True, help="output directory")
    p_plot.add_argument("--no-figures", action="store_true",
                        help="write delimited tables only")
    p_plot.set_defaults(func=_cmd_plot)

    p_verify = sub.add_parser("verify", help="run property checks")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.set_defaults(func=_cmd_verify)

    p_synth = sub.add_parser("synth", help="write a synthetic dataset")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--n", type=int, default=3125)
    p_synth.add_argument("--features", type=int, default=180)
    p_synth.add_argument("--classes", type=int, default=3)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--flip", type=float, default=0.08)
    p_synth.set_defaults(func=_cmd_synth)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
