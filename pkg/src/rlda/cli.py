"""Command-line interface: synthesize data, fit and evaluate, self-check.

    rlda synth    --dim 64 --classes 5 --per-class 100 --seed 7 --out data.csv
    rlda fit-eval --data data.csv --solver tr --manifold stiefel --dim 4 --out results/
    rlda check    --suite kyfan --seeds 10

Exit codes: 0 success (and all checks passing), 1 solver or runtime failure
(or a failing check), 2 usage/configuration error.

fit-eval writes report.json (schema 1: config echo, dataset summary with a
git-style content hash of the input files, aggregate metrics, per-repeat
rows), report.csv (one row per repeat), trace_###.csv per repeat holding the
first fitted solve of that repeat, and optionally cost_curve.svg.  All
randomness flows from --seed; reruns with the same inputs are bit-identical.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys

from . import checks
from .cost import HessianMode
from .datasets import load_csv, load_idx, preprocess, synth_gaussian_classes, write_csv
from .errors import ConfigError, ContractViolation, ParseError, RetractionError, SolverError
from .evaluation import EvaluationReport, PipelineConfig, run_experiment
from .manifolds import ManifoldVariant
from .optimizers import CgConfig, TrConfig

_MANIFOLDS = {
    "stiefel": ManifoldVariant.STIEFEL,
    "grassmann": ManifoldVariant.GRASSMANN,
    "generalized-stiefel": ManifoldVariant.GENERALIZED_STIEFEL,
    "generalized-grassmann": ManifoldVariant.GENERALIZED_GRASSMANN,
}

DEFAULT_SWEEP = "0,1e-3,1e-2"


def _git_blob_sha1(path: str) -> str:
    """Hash file bytes the way git hashes a blob."""
    with open(path, "rb") as fh:
        body = fh.read()
    h = hashlib.sha1()
    h.update(f"blob {len(body)}\0".encode())
    h.update(body)
    return h.hexdigest()


def cmd_synth(args: argparse.Namespace) -> int:
    ds = synth_gaussian_classes(
        args.dim, args.classes, args.per_class, args.spread, args.within_std, args.seed
    )
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    write_csv(ds, args.out)
    summary = {"D": ds.n_features, "N": ds.n_samples, "C": ds.n_classes, "path": args.out}
    print(json.dumps(summary, sort_keys=True))
    return 0


def _load_dataset(args: argparse.Namespace):
    sources = []
    if args.data is not None:
        if args.idx_images or args.idx_labels:
            raise ConfigError("pass either --data or the --idx-* pair, not both")
        if not os.path.exists(args.data):
            raise ConfigError(f"dataset file not found: {args.data}")
        sources.append(args.data)
        ds = load_csv(args.data, label_column=args.label_column, has_header=args.header)
    elif args.idx_images and args.idx_labels:
        for p in (args.idx_images, args.idx_labels):
            if not os.path.exists(p):
                raise ConfigError(f"dataset file not found: {p}")
        sources.extend([args.idx_images, args.idx_labels])
        raw = load_idx(args.idx_images, args.idx_labels)
        target = tuple(args.resize) if args.resize else None
        ds = preprocess(raw, shuffle_seed=args.seed, target_hw=target)
    else:
        raise ConfigError("provide --data CSV or both --idx-images and --idx-labels")
    return ds, sources


def _pipeline_config(args: argparse.Namespace, l1_weight: float) -> PipelineConfig:
    cg = CgConfig(
        grad_tol=args.cg_grad_tol,
        max_iter=args.max_iter if args.max_iter is not None else CgConfig.max_iter,
    )
    tr = TrConfig(
        grad_tol=args.tr_grad_tol,
        max_outer=args.max_iter if args.max_iter is not None else TrConfig.max_outer,
    )
    return PipelineConfig(
        solver=args.solver,
        manifold=_MANIFOLDS[args.manifold],
        subspace_dim=args.dim,
        l1_weight=l1_weight,
        hessian_mode=HessianMode(args.hessian_mode),
        repeats=args.repeats,
        folds=args.folds,
        knn_k=args.knn_k,
        kmeans_restarts=args.kmeans_restarts,
        cluster_scope=args.cluster_scope,
        seed=args.seed,
        jobs=args.jobs,
        cg=cg,
        tr=tr,
    )


def _report_payload(report: EvaluationReport, sources: list[str], ds) -> dict:
    return {
        "schema": 1,
        "config": report.config_echo,
        "dataset": {
            "D": ds.n_features,
            "N": ds.n_samples,
            "C": ds.n_classes,
            "sources": sources,
            "content_hash": {os.path.basename(p): _git_blob_sha1(p) for p in sources},
        },
        "metrics": {
            "acc_mean": report.acc_mean,
            "acc_std": report.acc_std,
            "nmi_mean": report.nmi_mean,
            "nmi_std": report.nmi_std,
            "knn_acc_mean": report.knn_acc_mean,
            "knn_acc_std": report.knn_acc_std,
            "repeats": report.repeats,
        },
        "per_repeat": [
            {"repeat": i, "acc": a, "nmi": m, "knn": k}
            for i, (a, m, k) in enumerate(
                zip(report.acc_per_repeat, report.nmi_per_repeat, report.knn_per_repeat)
            )
        ],
    }


def _write_outputs(out_dir: str, report: EvaluationReport, payload: dict, plot: bool) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "report.json"), "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(os.path.join(out_dir, "report.csv"), "w") as fh:
        fh.write("repeat,acc,nmi,knn\n")
        for row in payload["per_repeat"]:
            fh.write(f"{row['repeat']},{row['acc']!r},{row['nmi']!r},{row['knn']!r}\n")
    for i, (costs, gnorms) in enumerate(report.traces):
        with open(os.path.join(out_dir, f"trace_{i:03d}.csv"), "w") as fh:
            fh.write("iteration,cost,grad_norm\n")
            for j, (c, g) in enumerate(zip(costs, gnorms)):
                fh.write(f"{j},{c!r},{g!r}\n")
    if plot:
        svg = _cost_curve_svg([t[0] for t in report.traces])
        with open(os.path.join(out_dir, "cost_curve.svg"), "w") as fh:
            fh.write(svg)


def _cost_curve_svg(curves: list[tuple[float, ...]], width: int = 640, height: int = 400) -> str:
    """Hand-rolled SVG polyline plot of per-repeat cost traces."""
    pad = 45
    xs, ys = [], []
    for curve in curves:
        xs.append(len(curve) - 1)
        ys.extend(curve)
    x_max = max(max(xs), 1)
    y_min, y_max = min(ys), max(ys)
    if y_max == y_min:
        y_max = y_min + 1.0
    span_x = width - 2 * pad
    span_y = height - 2 * pad

    def px(i: float) -> float:
        return pad + span_x * (i / x_max)

    def py(v: float) -> float:
        return height - pad - span_y * ((v - y_min) / (y_max - y_min))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{width / 2:.1f}" y="{height - 8}" text-anchor="middle" font-size="12">iteration</text>',
        f'<text x="14" y="{height / 2:.1f}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 14 {height / 2:.1f})">cost</text>',
        f'<text x="{pad}" y="{height - pad + 16}" text-anchor="middle" font-size="10">0</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="middle" font-size="10">{x_max}</text>',
        f'<text x="{pad - 4}" y="{py(y_min) + 4:.1f}" text-anchor="end" font-size="10">{y_min:.4g}</text>',
        f'<text x="{pad - 4}" y="{py(y_max) + 4:.1f}" text-anchor="end" font-size="10">{y_max:.4g}</text>',
    ]
    for idx, curve in enumerate(curves):
        shade = 40 + int(160 * idx / max(len(curves) - 1, 1))
        pts = " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in enumerate(curve))
        parts.append(
            f'<polyline points="{pts}" fill="none" stroke="rgb({shade},{shade // 2},{255 - shade})" '
            f'stroke-width="1.5"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def cmd_fit_eval(args: argparse.Namespace) -> int:
    ds, sources = _load_dataset(args)
    if args.l1_sweep is not None:
        try:
            lambdas = [float(tok) for tok in args.l1_sweep.split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"--l1-sweep expects comma-separated numbers, got {args.l1_sweep!r}")
        if not lambdas:
            raise ConfigError("--l1-sweep got an empty list")
    else:
        lambdas = None

    if lambdas is None:
        report = run_experiment(ds, _pipeline_config(args, args.l1_weight))
        payload = _report_payload(report, sources, ds)
        _write_outputs(args.out, report, payload, args.plot)
        print(json.dumps(payload["metrics"], sort_keys=True))
        return 0

    summary = []
    for lam in lambdas:
        report = run_experiment(ds, _pipeline_config(args, lam))
        payload = _report_payload(report, sources, ds)
        sub = os.path.join(args.out, f"l1_{lam:g}")
        _write_outputs(sub, report, payload, args.plot)
        summary.append({"l1_weight": lam, "metrics": payload["metrics"]})
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "sweep.json"), "w") as fh:
        json.dump({"schema": 1, "sweep": summary}, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(json.dumps({"sweep": [s["l1_weight"] for s in summary]}, sort_keys=True))
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    names = args.suite if args.suite else None
    results = checks.run_suites(names, args.seeds)
    width = max(len(name) for name, _, _ in results)
    all_ok = True
    for name, ok, detail in results:
        flag = "PASS" if ok else "FAIL"
        print(f"{flag}  {name.ljust(width)}  {detail}")
        all_ok &= ok
    return 0 if all_ok else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rlda",
        description="Discriminant subspace learning by Riemannian optimization.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_synth = sub.add_parser("synth", help="write a synthetic Gaussian-classes CSV dataset")
    p_synth.add_argument("--dim", type=int, default=64, help="ambient feature dimension")
    p_synth.add_argument("--classes", type=int, default=5)
    p_synth.add_argument("--per-class", type=int, default=100)
    p_synth.add_argument("--spread", type=float, default=4.0, help="class-mean distance scale")
    p_synth.add_argument("--within-std", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.add_argument("--out", required=True, help="output CSV path (label in last column)")
    p_synth.set_defaults(func=cmd_synth)

    p_fit = sub.add_parser("fit-eval", help="fit a discriminant subspace and evaluate it")
    p_fit.add_argument("--data", help="numeric CSV, one sample per row")
    p_fit.add_argument("--label-column", type=int, default=-1)
    p_fit.add_argument("--header", action="store_true", help="CSV has a header row to skip")
    p_fit.add_argument("--idx-images", help="IDX image file (pair with --idx-labels)")
    p_fit.add_argument("--idx-labels", help="IDX label file")
    p_fit.add_argument("--resize", type=int, nargs=2, metavar=("H", "W"),
                       help="bilinearly downsample IDX images")
    p_fit.add_argument("--solver", choices=("tr", "cg"), default="tr")
    p_fit.add_argument("--manifold", choices=sorted(_MANIFOLDS), default="stiefel")
    p_fit.add_argument("--dim", "--subspace-dim", type=int, default=None, dest="dim",
                       help="subspace dimension (default: classes - 1)")
    p_fit.add_argument("--l1-weight", type=float, default=0.0, help="sparsity weight")
    p_fit.add_argument("--l1-sweep", nargs="?", const=DEFAULT_SWEEP, default=None,
                       help=f"comma-separated sparsity weights (bare flag: {DEFAULT_SWEEP})")
    p_fit.add_argument("--hessian-mode", choices=("projected", "corrected"), default="corrected")
    p_fit.add_argument("--repeats", type=int, default=10)
    p_fit.add_argument("--folds", type=int, default=5)
    p_fit.add_argument("--knn-k", type=int, default=1)
    p_fit.add_argument("--kmeans-restarts", type=int, default=10)
    p_fit.add_argument("--cluster-scope", choices=("test", "all"), default="test")
    p_fit.add_argument("--seed", type=int, default=0)
    p_fit.add_argument("--jobs", type=int, default=1, help="repeats run on a thread pool")
    p_fit.add_argument("--max-iter", type=int, default=None, help="override solver iteration cap")
    p_fit.add_argument("--cg-grad-tol", type=float, default=CgConfig.grad_tol)
    p_fit.add_argument("--tr-grad-tol", type=float, default=TrConfig.grad_tol)
    p_fit.add_argument("--plot", action="store_true", help="also write cost_curve.svg")
    p_fit.add_argument("--out", required=True, help="output directory")
    p_fit.set_defaults(func=cmd_fit_eval)

    p_check = sub.add_parser("check", help="run the built-in verification suites")
    p_check.add_argument("--suite", action="append",
                         help="suite name (repeatable; default: all suites)")
    p_check.add_argument("--seeds", type=int, default=None,
                         help="override the per-suite instance count")
    p_check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ConfigError, ParseError, ContractViolation) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SolverError, RetractionError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    sys.exit(main())
