"""Command-line front end.

    bicneuron bicluster --data d.csv            # steps 1-4: contrastive pair dump
    bicneuron evaluate  --data d.csv --out res  # outer CV for every model in --models
    bicneuron compare   --results res/folds.csv # pairwise exact Wilcoxon tests
    bicneuron fit       --data d.csv --model m.json
    bicneuron predict   --data new.csv --model m.json

Every subcommand accepts the same flags, so one ``--config`` file (flat
``key = value`` lines named after the flags) can serve all of them; flags
given on the command line win over the file.

Exit codes: 0 success, 2 usage error, 3 bad input data, 4 no model could be built.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import statistics
import sys
from pathlib import Path

from . import __version__
from .biclustering import parse_bicluster
from .contrastive import format_pair
from .dataset import load_csv, read_features, split_by_class
from .errors import BicNeuronError, DataError, MissingFile
from .evaluation import SIGNIFICANCE, GridSpec, grid_calibrate
from .experiment import METRICS, ExperimentConfig, aggregate, compare, evaluate, read_results_csv, to_csv, to_jsonl
from .pipeline import LEARNERS, BicNeuronConfig, BicNeuronLearner, BicNeuronModel, contrastive_steps, fit

log = logging.getLogger("bicneuron")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_RUNTIME = 0, 2, 3, 4
COMMANDS = ("bicluster", "evaluate", "compare", "fit", "predict")


class UsageError(Exception):
    pass


def _floats(text: str) -> tuple:
    try:
        vals = tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _names(text: str) -> tuple:
    vals = tuple(t.strip() for t in text.split(",") if t.strip())
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    g = common.add_argument_group("input")
    g.add_argument("--config", help="flat key = value file; keys are flag names without dashes")
    g.add_argument("--data", help="CSV file with a header row")
    g.add_argument("--label-col", help="label column name (default: last column)")
    g.add_argument("--id-col", help="row identifier column name")
    g.add_argument("--biclusters", help="precomputed class-1 biclusters, one 'rows=... cols=...' line each")
    g.add_argument("--results", help="per-fold CSV written by 'evaluate' (compare only)")
    g.add_argument("--model", help="model JSON to write (fit) or read (predict)")

    g = common.add_argument_group("method")
    g.add_argument("--td", type=_floats, default=(0.5, 0.8, 1.0, 1.5), help="dendrogram cut heights")
    g.add_argument("--tau", type=_floats, default=(0.1, 0.3, 0.5, 0.7, 0.9), help="MSR-ratio thresholds")
    g.add_argument("--tm", type=float, default=0.02, help="MSR coherence threshold")
    g.add_argument("--min-rows", type=int, default=2)
    g.add_argument("--min-cols", type=int, default=2)
    g.add_argument("--epochs", type=int, default=20)
    g.add_argument("--lr", type=float, default=0.1, help="standard perceptron learning rate")
    g.add_argument("--sigma", type=float, default=0.1, help="RBF kernel width")
    g.add_argument("--learner", choices=LEARNERS, default="standard", help="perceptron used by 'fit'")

    g = common.add_argument_group("experiment")
    g.add_argument("--k", type=int, default=10, help="outer cross-validation folds")
    g.add_argument("--inner-k", type=int, default=3, help="inner folds for (t_d, tau) calibration")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--models", type=_names, default=("sp", "kp-linear", "bn"),
                   help="from sp, kp-linear, kp-rbf, bn, bn-linear, bn-rbf, majority")
    g.add_argument("--jobs", type=int, default=1, help="worker processes")

    g = common.add_argument_group("output")
    g.add_argument("--out", help="directory for machine-readable outputs")
    g.add_argument("--format", choices=("table", "csv", "jsonl"), default="table", help="standard output format")
    g.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="bicneuron", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "bicluster": "mine, pair and filter biclusters; dump the contrastive pairs",
        "evaluate": "stratified k-fold comparison of the model roster",
        "compare": "pairwise exact Wilcoxon signed-rank tests over per-fold results",
        "fit": "fit one model on the whole dataset",
        "predict": "label new rows with a saved model",
    }
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=helps[name])
    return parser


def read_config(path) -> list:
    """Turn a ``key = value`` file into command-line tokens."""
    if not os.path.isfile(path):
        raise MissingFile(path)
    tokens = []
    with open(path, encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{n}: expected 'key = value'")
            key, value = (t.strip() for t in line.split("=", 1))
            flag = "--" + key.replace("_", "-")
            if flag == "--config":
                raise UsageError(f"{path}:{n}: config files cannot include other config files")
            if value.lower() in ("true", "yes", "on"):
                tokens.append(flag)
            elif value.lower() not in ("false", "no", "off"):
                tokens += [flag, value]
    return tokens


def _config_path(argv):
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def parse_args(argv) -> argparse.Namespace:
    """Parse ``argv``; config-file tokens go right after the subcommand so later flags override them."""
    argv = list(argv)
    path = _config_path(argv)
    if path is not None and argv and argv[0] in COMMANDS:
        argv = argv[:1] + read_config(path) + argv[1:]
    return build_parser().parse_args(argv)


# ---------------------------------------------------------------- helpers


def _require(args, *names):
    missing = [n for n in names if getattr(args, n.replace("-", "_")) is None]
    if missing:
        raise UsageError(f"{args.command} needs " + ", ".join("--" + n for n in missing))


def _load(args):
    _require(args, "data")
    return load_csv(args.data, args.label_col, args.id_col)


def _checked(factory, *a, **kw):
    try:
        return factory(*a, **kw)
    except ValueError as e:
        if isinstance(e, DataError):
            raise
        raise UsageError(str(e)) from None


def _base_config(args, **over) -> BicNeuronConfig:
    kw = dict(t_d=args.td[0], t_m=args.tm, tau=args.tau[0], min_rows=args.min_rows, min_cols=args.min_cols,
              learner=args.learner, epochs=args.epochs, lr=args.lr, sigma=args.sigma, seed=args.seed)
    kw.update(over)
    cfg = _checked(BicNeuronConfig, **kw)
    _checked(lambda: cfg.params)
    return cfg


def _experiment_config(args) -> ExperimentConfig:
    grid = _checked(GridSpec, args.td, args.tau, args.tm)
    return _checked(ExperimentConfig, k=args.k, seed=args.seed, grid=grid, inner_k=args.inner_k,
                    epochs=args.epochs, lr=args.lr, sigma=args.sigma, models=args.models, jobs=args.jobs)


def _injected(args, data):
    if args.biclusters is None:
        return None
    if not os.path.isfile(args.biclusters):
        raise MissingFile(args.biclusters)
    class1 = split_by_class(data).class1
    with open(args.biclusters, encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    return [parse_bicluster(ln, class1.values, class1.row_ids, class1.col_ids) for ln in lines]


def _write(out_dir, name, text):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, name), "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def render_table(header, rows) -> str:
    cells = [list(map(str, header))] + [list(map(str, r)) for r in rows]
    widths = [max(len(r[j]) for r in cells) for j in range(len(header))]
    return "\n".join("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells) + "\n"


# ---------------------------------------------------------------- commands


def cmd_bicluster(args) -> int:
    data = _load(args)
    cfg = _base_config(args, tau=max(args.tau))
    steps = contrastive_steps(data, cfg, _injected(args, data))
    ids = data.matrix.row_ids
    ids1 = [ids[i] for i in steps.rows1]
    ids2 = [ids[i] for i in steps.rows2]
    col_ids = data.matrix.col_ids
    ratios = [p.ratio for p in steps.pairs if not p.discarded]
    summary = {
        "t_d": cfg.t_d,
        "t_m": cfg.t_m,
        "biclusters": len(steps.biclusters),
        "pairs": len(steps.pairs),
        "discarded": len(steps.pairs) - len(ratios),
        "ratio_min": min(ratios) if ratios else None,
        "ratio_median": statistics.median(ratios) if ratios else None,
        "ratio_max": max(ratios) if ratios else None,
        "surviving": {repr(t): sum(r <= t for r in ratios) for t in args.tau},
    }
    dump = "".join(format_pair(p, ids1, ids2, col_ids) + "\n" for p in steps.pairs)
    records = [{"rows1": [ids1[i] for i in p.b1.rows], "rows2": [ids2[i] for i in p.b2.rows],
                "cols": [col_ids[j] for j in p.cols], "msr1": p.b1.msr, "msr2": p.b2.msr, "ratio": p.ratio}
               for p in steps.pairs]
    if args.out:
        _write(args.out, "pairs.txt", dump)
        _write(args.out, "pairs.jsonl", to_jsonl(records))
        _write(args.out, "summary.json", json.dumps(summary, indent=1) + "\n")
    if args.format == "jsonl":
        sys.stdout.write(to_jsonl(records))
    elif args.format == "csv":
        sys.stdout.write(to_csv([{**r, "rows1": " ".join(r["rows1"]), "rows2": " ".join(r["rows2"]),
                                  "cols": " ".join(r["cols"])} for r in records]))
    else:
        sys.stdout.write(dump)
        sys.stdout.write(f"# {summary['biclusters']} biclusters, {summary['pairs']} pairs "
                         f"({summary['discarded']} discarded)\n")
        if ratios:
            sys.stdout.write(f"# ratio min {summary['ratio_min']:.4f} median {summary['ratio_median']:.4f} "
                             f"max {summary['ratio_max']:.4f}\n")
        for t, n in summary["surviving"].items():
            sys.stdout.write(f"# tau {t}: {n} surviving\n")
    return EXIT_OK


def render_results(results, summary) -> str:
    """One block per metric: folds down, models across, then mean +- std and best."""
    models = list(dict.fromkeys(r.model for r in results))
    datasets = list(dict.fromkeys(r.dataset for r in results))
    agg = {(s["dataset"], s["model"], s["metric"]): s for s in summary}
    out = []
    for dataset in datasets:
        folds = sorted({r.fold for r in results if r.dataset == dataset})
        cell = {(r.model, r.fold): r for r in results if r.dataset == dataset}
        for metric in METRICS:
            rows = []
            for f in folds:
                row = [f + 1]
                for m in models:
                    r = cell.get((m, f))
                    row.append("" if r is None else f"{getattr(r, metric):.2f}" + ("*" if r.fallback else ""))
                rows.append(row)
            rows.append(["mean"] + [f"{agg[dataset, m, metric]['mean']:.2f} ± {agg[dataset, m, metric]['std']:.2f}"
                                    for m in models])
            rows.append(["best"] + [f"{agg[dataset, m, metric]['best']:.2f}" for m in models])
            out.append(f"{dataset}  {metric.upper()}\n" + render_table(["fold"] + models, rows))
    if any(r.fallback for r in results):
        out.append("* majority-vote fallback: no discriminative subspace on that fold\n")
    return "\n".join(out)


def _run_evaluate(args):
    cfg = _experiment_config(args)
    data = _load(args)
    return evaluate(data, cfg, Path(args.data).stem)


def cmd_evaluate(args) -> int:
    results = _run_evaluate(args)
    summary = aggregate(results)
    if args.out:
        _write(args.out, "folds.csv", to_csv(results))
        _write(args.out, "folds.jsonl", to_jsonl(results))
        _write(args.out, "summary.csv", to_csv(summary))
        _write(args.out, "summary.jsonl", to_jsonl(summary))
    if args.format == "csv":
        sys.stdout.write(to_csv(results))
    elif args.format == "jsonl":
        sys.stdout.write(to_jsonl(results))
    else:
        sys.stdout.write(render_results(results, summary))
    return EXIT_OK


def render_comparison(rows) -> str:
    body = []
    for r in rows:
        mark = f"* {r['better']} better" if r["significant"] else ""
        body.append([r["dataset"], r["model_a"], r["model_b"], r["metric"],
                     f"{r['mean_a']:.2f}", f"{r['mean_b']:.2f}", f"({r['p']:.2f})", mark])
    return (render_table(["dataset", "a", "b", "metric", "mean_a", "mean_b", "p", ""], body)
            + f"* two-sided exact Wilcoxon signed-rank p <= {SIGNIFICANCE}\n")


def cmd_compare(args) -> int:
    if args.results:
        if not os.path.isfile(args.results):
            raise MissingFile(args.results)
        results = read_results_csv(args.results)
        if len({r.model for r in results}) < 2:
            raise UsageError("compare needs results for at least two models")
    else:
        if len(args.models) < 2:
            raise UsageError("compare needs at least two models in --models")
        results = _run_evaluate(args)
    rows = compare(results)
    if args.out:
        _write(args.out, "compare.csv", to_csv(rows))
        _write(args.out, "compare.jsonl", to_jsonl(rows))
    if args.format == "csv":
        sys.stdout.write(to_csv(rows))
    elif args.format == "jsonl":
        sys.stdout.write(to_jsonl(rows))
    else:
        sys.stdout.write(render_comparison(rows))
    return EXIT_OK


def cmd_fit(args) -> int:
    data = _load(args)
    injected = _injected(args, data)
    if injected is not None or len(args.td) * len(args.tau) == 1:
        if len(args.tau) > 1:
            raise UsageError("with --biclusters give a single --tau")
        cfg = _base_config(args)
        model = fit(data, cfg, biclusters=injected)
    else:
        base = _base_config(args)
        learner = BicNeuronLearner(base)
        cal = grid_calibrate(data, _checked(GridSpec, args.td, args.tau, args.tm), args.inner_k, args.seed, learner)
        log.info("calibrated t_d=%s tau=%s (validation AUC %.4f)", cal.t_d, cal.tau, cal.score)
        cfg = _base_config(args, t_d=cal.t_d, tau=cal.tau)
        model = fit(data, cfg)
    if args.model:
        model.save(args.model)
    info = {"columns": list(model.col_ids), "train_auc": model.train_auc, "candidates": model.n_pairs,
            "t_d": cfg.t_d, "tau": cfg.tau, "learner": cfg.learner}
    if args.format == "table":
        sys.stdout.write("".join(f"{k}: {','.join(v) if isinstance(v, list) else v}\n" for k, v in info.items()))
    elif args.format == "csv":
        sys.stdout.write(to_csv([{**info, "columns": " ".join(info["columns"])}]))
    else:
        sys.stdout.write(json.dumps(info) + "\n")
    return EXIT_OK


def cmd_predict(args) -> int:
    _require(args, "data", "model")
    if not os.path.isfile(args.model):
        raise MissingFile(args.model)
    try:
        model = BicNeuronModel.load(args.model)
    except (ValueError, KeyError, TypeError) as e:
        raise DataError(f"cannot read model {args.model}: {e}") from None
    if not model.feature_names:
        raise DataError(f"model {args.model} does not record its feature names")
    values, ids = read_features(args.data, model.feature_names, args.id_col)
    rows = [{"id": i, "label": lab} for i, lab in zip(ids, model.predict_labels(values))]
    if args.out:
        _write(args.out, "predictions.csv", to_csv(rows))
    if args.format == "jsonl":
        sys.stdout.write(to_jsonl(rows))
    elif args.format == "csv":
        sys.stdout.write(to_csv(rows))
    else:
        sys.stdout.write(render_table(["id", "label"], [[r["id"], r["label"]] for r in rows]))
    return EXIT_OK


HANDLERS = {"bicluster": cmd_bicluster, "evaluate": cmd_evaluate, "compare": cmd_compare,
            "fit": cmd_fit, "predict": cmd_predict}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
    except SystemExit as e:  # argparse already printed the message
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    except UsageError as e:
        print(f"bicneuron: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"bicneuron: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return HANDLERS[args.command](args)
    except UsageError as e:
        print(f"bicneuron: usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"bicneuron: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except BicNeuronError as e:  # FitError and anything else the library raises
        print(f"bicneuron: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
