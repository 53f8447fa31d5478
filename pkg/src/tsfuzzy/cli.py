"""Command-line front end: ``tsfuzzy {train,select,crossval,predict,benchmark}``."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

import numpy as np

from . import dataio
from .clustering import ClusteringConfig
from .dataio import load_csv, load_model, save_model
from .errors import ConfigurationError, DataFormatError, TSFuzzyError
from .evaluation import evaluate, loo_crossval
from .pipeline import PipelineConfig, fit


def _g(v) -> str:
    return f"{v:.6g}"


def _pipeline_config(args, keep=True) -> PipelineConfig:
    clustering = ClusteringConfig(
        cluster_count=args.clusters,
        fuzziness=args.fuzziness,
        tolerance=args.epsilon,
        max_iterations=args.max_iter,
        seed=args.seed,
        n_init=args.restarts,
    )
    return PipelineConfig(
        clustering=clustering,
        antecedent_keep=args.keep_antecedent if keep else None,
        consequent_keep=args.keep_consequent if keep else None,
        unit_weights=args.unit_weights,
    )


def _provenance(cfg: PipelineConfig, model) -> dict:
    c = cfg.clustering
    names = model.column_names
    return {
        "clusters": c.cluster_count,
        "fuzziness": c.fuzziness,
        "epsilon": c.tolerance,
        "max_iterations": c.max_iterations,
        "restarts": c.n_init,
        "seed": c.seed,
        "unit_weights": cfg.unit_weights,
        "antecedent_columns": [names[j] for j in model.antecedent_columns] if names else [],
        "consequent_columns": [names[j] for j in model.consequent_columns] if names else [],
    }


def _require(args, *names):
    for name in names:
        if not getattr(args, name):
            raise ConfigurationError(f"--{name.replace('_', '-')} is required for this command")


def _write(path, text):
    Path(path).write_text(text, encoding="utf-8")


def cmd_train(args, out) -> int:
    _require(args, "data", "model")
    data = load_csv(args.data, args.activity)
    cfg = _pipeline_config(args, keep=False)
    result = fit(data, cfg)
    save_model(result.model, args.model, _provenance(cfg, result.model))
    rmse, r2, _ = evaluate(result.model, data)
    print(f"rules          {result.model.n_rules}", file=out)
    print(f"iterations     {result.clustering.iterations}", file=out)
    print(f"converged      {'yes' if result.clustering.converged else 'no'}", file=out)
    print(f"Train-RMSE     {_g(rmse)}", file=out)
    print(f"Train-r2       {_g(r2)}", file=out)
    return 0


def _selection_report(data, result):
    names = data.column_names
    lines, rows = [], []
    ranking = result.consequent_ranking
    if ranking is not None:
        lines.append("Consequent ranking (OLS error-reduction ratio, prior-weighted)")
        lines.append(f"{'rank':>4}  {'descriptor':<24}{'score':>12}")
        for rank, j in enumerate(ranking.aggregate_order, start=1):
            lines.append(f"{rank:>4}  {names[j]:<24}{_g(ranking.aggregate_scores[j]):>12}")
            rows.append((rank, names[j], float(ranking.aggregate_scores[j]), "consequent"))
        for i, q in enumerate(ranking.per_cluster_ratios):
            cells = ", ".join(f"{names[j]}={_g(v)}" for j, v in enumerate(q))
            lines.append(f"  cluster {i + 1}: {cells}")
        lines.append("")
    trace = result.fisher_trace
    if trace is not None:
        lines.append("Antecedent elimination (interclass separability)")
        lines.append(f"{'step':>4}  {'removed':<24}{'J after':>12}")
        for step, (j, s) in enumerate(zip(trace.elimination_order, trace.scores_after_removal), 1):
            lines.append(f"{step:>4}  {names[j]:<24}{_g(s):>12}")
            rows.append((step, names[j], float(s), "antecedent-removed"))
        for j in trace.kept:
            rows.append((0, names[j], 0.0, "antecedent-kept"))
        lines.append("")
    model = result.model
    kept_a = [names[j] for j in model.antecedent_columns]
    kept_c = [names[j] for j in model.consequent_columns]
    lines.append("antecedents kept:  " + ", ".join(kept_a))
    lines.append("antecedents dropped: " + ", ".join(n for n in names if n not in kept_a))
    lines.append("consequents kept:  " + ", ".join(kept_c))
    lines.append("consequents dropped: " + ", ".join(n for n in names if n not in kept_c))
    return "\n".join(lines) + "\n", rows


def cmd_select(args, out) -> int:
    _require(args, "data")
    data = load_csv(args.data, args.activity)
    cfg = _pipeline_config(args)
    cfg = PipelineConfig(
        clustering=cfg.clustering,
        antecedent_keep=data.k if cfg.antecedent_keep is None else cfg.antecedent_keep,
        consequent_keep=data.k if cfg.consequent_keep is None else cfg.consequent_keep,
        unit_weights=cfg.unit_weights,
    )
    result = fit(data, cfg)
    text, rows = _selection_report(data, result)
    out.write(text)
    rmse, r2, _ = evaluate(result.model, data)
    print(f"Train-RMSE     {_g(rmse)}", file=out)
    print(f"Train-r2       {_g(r2)}", file=out)
    if args.out:
        _write(args.out, dataio.selection_rows_csv(rows))
    if args.model:
        save_model(result.model, args.model, _provenance(cfg, result.model))
    return 0


def cmd_crossval(args, out) -> int:
    _require(args, "data")
    data = load_csv(args.data, args.activity)
    cfg = _pipeline_config(args)
    report = loo_crossval(data, cfg)
    m = report.metrics
    label = "Hybrid" if cfg.antecedent_keep or cfg.consequent_keep else "Clustering"
    print(f"{'Method':<12}{'Train RMSE':>12}{'Test RMSE':>12}{'Train r^2':>12}{'Test r^2':>12}", file=out)
    print(
        f"{label:<12}{_g(m.train_rmse):>12}{_g(m.test_rmse):>12}{_g(m.train_r2):>12}{_g(m.test_r2):>12}",
        file=out,
    )
    unconverged = [f.index for f in report.folds if not f.converged]
    print(f"folds {len(report.folds)}, not converged {len(unconverged)}", file=out)
    if args.scatter_out:
        _write(
            args.scatter_out,
            dataio.SCATTER_HEADER
            + dataio.scatter_csv(report.observed, report.train_predicted, "train")
            + dataio.scatter_csv(report.observed, report.predicted, "test"),
        )
    return 0


def _read_columns(path, names):
    """Select ``names`` from a headed CSV, in that order."""
    with Path(path).open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need a header and at least one row")
    header = [h.strip() for h in rows[0]]
    missing = [n for n in names if n not in header]
    if missing:
        raise DataFormatError(f"{path}: missing model column(s): {', '.join(missing)}")
    idx = [header.index(n) for n in names]
    values = np.empty((len(rows) - 1, len(names)))
    for r, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise DataFormatError(f"row {r} has {len(row)} cells, header has {len(header)}")
        for c, j in enumerate(idx):
            values[r - 2, c] = dataio.parse_cell(row[j], r, header[j])
    return values


def cmd_predict(args, out) -> int:
    _require(args, "data", "model")
    model = load_model(args.model)
    if args.unit_weights:
        model = model.with_unit_weights()
    if model.column_names:
        used = model.used_columns
        values = _read_columns(args.data, [model.column_names[j] for j in used])
        # columns the model never reads are filled with their training means
        U = np.tile(model.column_means, (values.shape[0], 1))
        U[:, list(used)] = values
    else:
        U = load_csv(args.data, args.activity).descriptors
    pred = model.predict_batch(U)
    text = "predicted\n" + "".join(f"{float(v)!r}\n" for v in pred)
    if args.out:
        _write(args.out, text)
    else:
        out.write(text)
    return 0


def cmd_benchmark(args, out) -> int:
    _require(args, "out")
    data, _ = dataio.generate_benchmark(args.benchmark_kind, args.samples, args.noise, args.seed)
    dataio.write_csv(data, args.out)
    print(f"wrote {data.N} rows of {args.benchmark_kind} to {args.out}", file=out)
    return 0


COMMANDS = {
    "train": cmd_train,
    "select": cmd_select,
    "crossval": cmd_crossval,
    "predict": cmd_predict,
    "benchmark": cmd_benchmark,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data", help="input CSV (header row, activity in the last column)")
    common.add_argument("--activity", default=None, help="name of the activity column")
    common.add_argument("--model", help="model file to write (train/select) or read (predict)")
    common.add_argument("--clusters", type=int, default=2)
    common.add_argument("--fuzziness", type=float, default=2.0)
    common.add_argument("--epsilon", type=float, default=1e-4)
    common.add_argument("--max-iter", type=int, default=200)
    common.add_argument("--restarts", type=int, default=3, help="random starts per clustering")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--keep-antecedent", type=int, default=None)
    common.add_argument("--keep-consequent", type=int, default=None)
    common.add_argument("--unit-weights", action="store_true", help="set every rule weight to 1")
    common.add_argument("--out")
    common.add_argument("--scatter-out")
    common.add_argument("--benchmark-kind", default="two-regime", choices=dataio.BENCHMARK_KINDS)
    common.add_argument("--noise", type=float, default=0.0)
    common.add_argument("--samples", type=int, default=200)

    parser = argparse.ArgumentParser(prog="tsfuzzy", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (TSFuzzyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
