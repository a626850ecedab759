"""Command-line interface.

One subcommand per pipeline step. Every command prints a one-line JSON
summary to stdout; report files are written atomically (temp file +
rename) so a failing run never leaves partial outputs. All randomness is
seeded, making outputs byte-identical across runs for identical inputs.
The WHITEX_THREADS environment variable caps internal (BLAS) parallelism.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import os
import sys
import tempfile
from pathlib import Path

import numpy as np

from whitex import geometry, image_metrics, likelihood, stats
from whitex.exceptions import ValidationError, WhitexError
from whitex.io import load_model, read_embeddings, save_model, write_embeddings
from whitex.whitening import WhiteningTransformer


def _writer_format(path) -> str:
    suffix = Path(path).suffix.lower()
    if suffix == ".npy":
        return "npy"
    if suffix == ".csv":
        return "csv"
    raise ValidationError(f"output {path!r} must end in .npy or .csv")


def _atomic_outputs(outputs) -> None:
    """Write (path, writer) pairs via temp files, then rename all."""
    staged: list[list] = []
    try:
        for path, writer in outputs:
            path = Path(path)
            fd, tmp = tempfile.mkstemp(
                dir=path.parent, prefix=path.name + ".", suffix=".tmp"
            )
            os.close(fd)
            staged.append([tmp, path])
            writer(tmp)
        for entry in staged:
            os.replace(entry[0], entry[1])
            entry[0] = None
    finally:
        for tmp, _ in staged:
            if tmp is not None:
                with contextlib.suppress(OSError):
                    os.unlink(tmp)


def _write_table(path, fieldnames, rows, fmt: str) -> None:
    if fmt == "csv":
        with open(path, "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=fieldnames)
            writer.writeheader()
            writer.writerows(rows)
    else:
        with open(path, "w") as fp:
            json.dump(rows, fp, indent=2)
            fp.write("\n")


def _table_output(path, fieldnames, rows, fmt: str):
    return (path, lambda tmp: _write_table(tmp, fieldnames, rows, fmt))


def _matrix_output(path, matrix):
    fmt = _writer_format(path)
    return (path, lambda tmp: write_embeddings(matrix, tmp, fmt=fmt))


def _scores_1d(path) -> np.ndarray:
    return read_embeddings(path).ravel()


def _maybe_whiten(args, x: np.ndarray) -> np.ndarray:
    if getattr(args, "model", None):
        return load_model(args.model).transform(x)
    return x


def _summary(obj) -> int:
    print(json.dumps(obj, sort_keys=True))
    return 0


def cmd_fit(args) -> int:
    x = read_embeddings(args.input)
    model = WhiteningTransformer(
        tau=args.tau,
        seed=args.seed,
        noise_variance=args.noise_var,
        eig_floor=args.eig_floor,
    ).fit(x)
    _atomic_outputs([(args.output, lambda tmp: save_model(model, tmp))])
    return _summary(
        {
            "command": "fit",
            "dim": model.n_features_in_,
            "n_samples": model.n_fit_samples_,
            "dropped_features": len(model.dropped_features_),
            "clamped_eigenvalues": len(model.clamped_eigenvalues_),
            "model": str(args.output),
        }
    )


def cmd_whiten(args) -> int:
    model = load_model(args.model)
    y = model.transform(read_embeddings(args.input))
    _atomic_outputs([_matrix_output(args.output, y)])
    return _summary(
        {"command": "whiten", "n_samples": y.shape[0], "dim": y.shape[1],
         "output": str(args.output)}
    )


def cmd_unwhiten(args) -> int:
    model = load_model(args.model)
    x = model.inverse_transform(read_embeddings(args.input))
    _atomic_outputs([_matrix_output(args.output, x)])
    return _summary(
        {"command": "unwhiten", "n_samples": x.shape[0], "dim": x.shape[1],
         "output": str(args.output)}
    )


def cmd_loglik(args) -> int:
    model = load_model(args.model)
    scores = likelihood.batch_scores(model, read_embeddings(args.input))
    rows = [
        {"index": i, "norm": s.norm, "loglik": s.log_likelihood}
        for i, s in enumerate(scores)
    ]
    outputs = []
    if args.output:
        outputs.append(
            _table_output(args.output, ["index", "norm", "loglik"], rows, args.format)
        )
    _atomic_outputs(outputs)
    norms = np.array([s.norm for s in scores])
    return _summary(
        {
            "command": "loglik",
            "n_samples": len(rows),
            "dim": model.n_features_in_,
            "mean_norm": float(norms.mean()),
            "mean_loglik": float(np.mean([s.log_likelihood for s in scores])),
            "output": str(args.output) if args.output else None,
        }
    )


def cmd_chisummary(args) -> int:
    x = read_embeddings(args.input)
    y = _maybe_whiten(args, x)
    norms = np.linalg.norm(y, axis=1)
    summary = likelihood.chi_summary(norms, y.shape[1])
    row = {
        "dim": summary.dim,
        "theoretical_mean": summary.theoretical_mean,
        "theoretical_std": summary.theoretical_std,
        "empirical_mean": summary.empirical_mean,
        "empirical_std": summary.empirical_std,
        "relative_deviation_mean": summary.relative_deviation_mean,
        "relative_deviation_std": summary.relative_deviation_std,
    }
    outputs = []
    if args.output:
        outputs.append(_table_output(args.output, list(row), [row], args.format))
    _atomic_outputs(outputs)
    return _summary({"command": "chisummary", **row})


def cmd_normtest(args) -> int:
    x = read_embeddings(args.input)
    y = _maybe_whiten(args, x)
    report = stats.normality_battery(y, group_size=args.group_size)
    rows = [
        {
            "feature_index": i,
            "ad_stat": float(report.ad_stat[i]),
            "dp_stat": float(report.dp_stat[i]),
            "dp_pvalue": float(report.dp_pvalue[i]),
        }
        for i in range(report.ad_stat.size)
    ]
    outputs = []
    if args.output:
        outputs.append(
            _table_output(
                args.output,
                ["feature_index", "ad_stat", "dp_stat", "dp_pvalue"],
                rows,
                args.format,
            )
        )
    _atomic_outputs(outputs)
    return _summary(
        {
            "command": "normtest",
            "avg_ad": report.avg_ad,
            "avg_dp_pvalue": report.avg_dp_pvalue,
            "pct_normal_ad": report.pct_normal_ad,
            "pct_normal_dp": report.pct_normal_dp,
            "group_size": report.group_size,
            "n_groups": report.n_groups,
            "output": str(args.output) if args.output else None,
        }
    )


def cmd_diagscore(args) -> int:
    x = read_embeddings(args.input)
    if args.matrix:
        score = stats.diagonal_score(x)
    else:
        y = _maybe_whiten(args, x)
        from whitex.whitening import compute_covariance, compute_mean_and_center

        _, centered = compute_mean_and_center(y)
        score = stats.diagonal_score(compute_covariance(centered))
    return _summary({"command": "diagscore", "diagonal_score": score})


def cmd_cosinestats(args) -> int:
    x = read_embeddings(args.input)
    mean, std, hist = stats.pairwise_cosine_stats(
        x, max_pairs=args.max_pairs, n_bins=args.bins, seed=args.seed
    )
    outputs = []
    if args.output:
        rows = [
            {"bin_lo": lo, "bin_hi": hi, "count": c} for lo, hi, c in hist.rows()
        ]
        outputs.append(
            _table_output(args.output, ["bin_lo", "bin_hi", "count"], rows, args.format)
        )
    _atomic_outputs(outputs)
    return _summary(
        {
            "command": "cosinestats",
            "mean": mean,
            "std": std,
            "n_samples": x.shape[0],
            "output": str(args.output) if args.output else None,
        }
    )


def cmd_auc(args) -> int:
    result = stats.auc(_scores_1d(args.positives), _scores_1d(args.negatives))
    return _summary(
        {
            "command": "auc",
            "auc": result.auc,
            "n_positive": result.n_positive,
            "n_negative": result.n_negative,
        }
    )


def cmd_corr(args) -> int:
    r = stats.pearson_correlation(_scores_1d(args.input), _scores_1d(args.input_b))
    return _summary({"command": "corr", "correlation": r})


def cmd_hist(args) -> int:
    values = _scores_1d(args.input)
    value_range = tuple(args.range) if args.range else None
    hist = stats.histogram(values, n_bins=args.bins, value_range=value_range)
    rows = [{"bin_lo": lo, "bin_hi": hi, "count": c} for lo, hi, c in hist.rows()]
    outputs = []
    if args.output:
        outputs.append(
            _table_output(args.output, ["bin_lo", "bin_hi", "count"], rows, args.format)
        )
    _atomic_outputs(outputs)
    return _summary(
        {
            "command": "hist",
            "n_values": int(values.size),
            "n_bins": args.bins,
            "output": str(args.output) if args.output else None,
        }
    )


def _two_rows(path) -> tuple[np.ndarray, np.ndarray]:
    m = read_embeddings(path)
    if m.shape[0] < 2:
        raise ValidationError(
            f"{path}: need at least 2 rows (source and destination), "
            f"got {m.shape[0]}"
        )
    return m[0], m[1]


def cmd_slerp(args) -> int:
    e1, e2 = _two_rows(args.input)
    point = geometry.slerp(e1, e2, args.t)
    _atomic_outputs([_matrix_output(args.output, point.reshape(1, -1))])
    return _summary(
        {
            "command": "slerp",
            "t": args.t,
            "theta_rad": geometry.angle_between(e1, e2),
            "output": str(args.output),
        }
    )


def cmd_slerp_circle(args) -> int:
    e1, e2 = _two_rows(args.input)
    path = geometry.full_circle_slerp(e1, e2, step_deg=args.step_deg)
    out = Path(args.output)
    degrees_out = out.with_name(out.stem + "_degrees.csv")
    degree_rows = [{"degree": float(d)} for d in path.degrees]
    _atomic_outputs(
        [
            _matrix_output(args.output, path.points),
            _table_output(degrees_out, ["degree"], degree_rows, "csv"),
        ]
    )
    return _summary(
        {
            "command": "slerp-circle",
            "n_points": int(path.degrees.size),
            "step_deg": args.step_deg,
            "theta_rad": path.theta_rad,
            "output": str(args.output),
            "degrees_output": str(degrees_out),
        }
    )


def cmd_opposite(args) -> int:
    m = read_embeddings(args.input)
    opp = np.vstack([geometry.opposite_embedding(row) for row in m])
    _atomic_outputs([_matrix_output(args.output, opp)])
    return _summary(
        {"command": "opposite", "n_samples": opp.shape[0], "output": str(args.output)}
    )


def cmd_normalize(args) -> int:
    m = read_embeddings(args.input)
    normed = np.vstack([likelihood.normalize_to_sqrt_d(row) for row in m])
    _atomic_outputs([_matrix_output(args.output, normed)])
    return _summary(
        {
            "command": "normalize",
            "n_samples": normed.shape[0],
            "target_norm": float(np.sqrt(normed.shape[1])),
            "output": str(args.output),
        }
    )


def cmd_imgmetrics(args) -> int:
    target = Path(args.input)
    if target.is_dir():
        paths = sorted(
            p for p in target.iterdir() if p.suffix.lower() in (".png", ".npy")
        )
        if not paths:
            raise ValidationError(f"{target}: no .png or .npy images found")
    else:
        paths = [target]
    rows = []
    for p in paths:
        img = image_metrics.load_image(p)
        rows.append(
            {
                "path": str(p),
                "total_variation": image_metrics.total_variation(img),
                "entropy": image_metrics.entropy(img),
                "saturation_pct": image_metrics.saturation_pct(img),
            }
        )
    outputs = []
    if args.output:
        outputs.append(
            _table_output(
                args.output,
                ["path", "total_variation", "entropy", "saturation_pct"],
                rows,
                args.format,
            )
        )
    _atomic_outputs(outputs)
    return _summary(
        {
            "command": "imgmetrics",
            "n_images": len(rows),
            "mean_total_variation": float(np.mean([r["total_variation"] for r in rows])),
            "mean_entropy": float(np.mean([r["entropy"] for r in rows])),
            "mean_saturation_pct": float(np.mean([r["saturation_pct"] for r in rows])),
            "output": str(args.output) if args.output else None,
        }
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="whitex",
        description="Whitening, likelihood scoring and diagnostics for embeddings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, help_text, *, model=False, output=False, fmt=False):
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        if model:
            p.add_argument("--model", help="fitted model bundle (.zip)")
        if output:
            p.add_argument("--output", help="output file path")
        if fmt:
            p.add_argument(
                "--format", choices=("csv", "json"), default="csv",
                help="report format (default csv)",
            )
        return p

    p = add("fit", cmd_fit, "fit a whitening model on an embedding matrix")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True, help="model bundle path (.zip)")
    p.add_argument("--tau", type=float, default=0.999)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise-var", type=float, default=0.1)
    p.add_argument("--eig-floor", type=float, default=1e-10)

    p = add("whiten", cmd_whiten, "apply the whitening transform")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = add("unwhiten", cmd_unwhiten, "apply the inverse whitening transform")
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = add("loglik", cmd_loglik, "score log-likelihood per row", output=True, fmt=True)
    p.add_argument("--model", required=True)
    p.add_argument("--input", required=True)

    p = add(
        "chisummary", cmd_chisummary,
        "compare norm statistics against the chi model",
        model=True, output=True, fmt=True,
    )
    p.add_argument("--input", required=True)

    p = add(
        "normtest", cmd_normtest,
        "grouped per-feature normality battery",
        model=True, output=True, fmt=True,
    )
    p.add_argument("--input", required=True)
    p.add_argument("--group-size", type=int, default=250)

    p = add(
        "diagscore", cmd_diagscore,
        "diagonality of a covariance (or given) matrix",
        model=True,
    )
    p.add_argument("--input", required=True)
    p.add_argument(
        "--matrix", action="store_true",
        help="treat the input as the square matrix itself instead of "
        "computing the covariance of its rows",
    )

    p = add(
        "cosinestats", cmd_cosinestats,
        "pairwise cosine-similarity statistics",
        output=True, fmt=True,
    )
    p.add_argument("--input", required=True)
    p.add_argument("--max-pairs", type=int, default=20_000_000)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    p = add("auc", cmd_auc, "ROC AUC between two score files")
    p.add_argument("--positives", required=True)
    p.add_argument("--negatives", required=True)

    p = add("corr", cmd_corr, "Pearson correlation between two score files")
    p.add_argument("--input", required=True)
    p.add_argument("--input-b", required=True)

    p = add("hist", cmd_hist, "histogram of a value file", output=True, fmt=True)
    p.add_argument("--input", required=True)
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))

    p = add("slerp", cmd_slerp, "spherical interpolation at one t")
    p.add_argument("--input", required=True, help="matrix whose first two rows are source and destination")
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--output", required=True)

    p = add("slerp-circle", cmd_slerp_circle, "full-circle spherical sweep")
    p.add_argument("--input", required=True, help="matrix whose first two rows are source and destination")
    p.add_argument("--step-deg", type=float, default=10.0)
    p.add_argument("--output", required=True, help="points file; degrees go to <stem>_degrees.csv")

    p = add("opposite", cmd_opposite, "negate embeddings (180-degree point)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = add("normalize", cmd_normalize, "rescale rows to norm sqrt(d)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)

    p = add(
        "imgmetrics", cmd_imgmetrics,
        "total variation / entropy / saturation of images",
        output=True, fmt=True,
    )
    p.add_argument("--input", required=True, help="PNG/NPY image or a directory of them")

    return parser


def _thread_limit():
    value = os.environ.get("WHITEX_THREADS")
    if not value:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(value))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with _thread_limit():
            return args.func(args)
    except (WhitexError, OSError) as exc:
        print(
            json.dumps(
                {"error": {"kind": type(exc).__name__, "message": str(exc)}}
            ),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
