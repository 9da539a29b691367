"""Command-line entry points.

``fusionet run --config <file>`` drives the whole pipeline; the other
subcommands expose each stage over the same file formats so stages can
be rerun, swapped or audited in isolation.  ``run`` exits 0 on success,
with the failing stage's number (1-9) on a stage error, and with 64 on
a configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .backbone import BowConfig, load_bow, predict_bow, read_predictions, save_bow, train_bow, write_predictions
from .corpus import ClassLabel, read_items, split_dataset, write_items
from .datasets import generate, spec_from_json
from .ensemble import hard_vote, soft_vote, write_ensemble
from .evalkit import brier, classification_metrics, emit_report, mcnemar, nll
from .heuristic import (
    HeuristicConfig,
    apply_heuristic_batch,
    ablation_table,
    run_ablation,
    select_threshold_elbow,
)
from .oversample import OversampleConfig, oversample
from .pipeline import (
    ConfigError,
    StageError,
    _evidence_for_split,  # reused for postprocess/ablate evidence building
    load_config,
    read_label_predictions,
    run_pipeline,
    validate_config,
)
from .sffn import TrainConfig, load_model, predict_mc_batch, save_model, train_sffn
from .stat_features import AttributeStatsTable, fit_stats, lookup, read_features
from .util import fmt_float

from dataclasses import replace


def _parse_ratios(text: str) -> tuple[float, float, float]:
    parts = tuple(float(x) for x in text.split(","))
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("ratios must be three comma-separated numbers")
    return parts  # type: ignore[return-value]


def _cmd_ingest(args: argparse.Namespace) -> int:
    from .corpus import Dataset, ingest_item

    records = []
    with open(args.input, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    items = tuple(ingest_item(record, args.kind) for record in records)
    write_items(Dataset(items=items), args.out)
    print(f"ingested {len(items)} items -> {args.out}")
    return 0


def _cmd_split(args: argparse.Namespace) -> int:
    dataset = read_items(args.input)
    train, val, test = split_dataset(dataset, args.ratios, seed=args.seed)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for part in (train, val, test):
        write_items(part, out_dir / f"{part.split_tag}.jsonl")
        print(f"{part.split_tag}: {len(part)} items")
    return 0


def _cmd_backbone(args: argparse.Namespace) -> int:
    if args.model != "bow":
        raise SystemExit(f"unknown backbone model {args.model!r}; only 'bow' is built in")
    if args.action == "train" and not args.train:
        raise SystemExit("backbone train requires --train")
    if args.action == "predict" and not (args.model_file and args.items):
        raise SystemExit("backbone predict requires --model-file and --items")
    if args.action == "train":
        cfg = BowConfig(
            min_token_freq=args.min_token_freq,
            l2=args.l2,
            epochs=args.epochs,
            lr=args.lr,
            seed=args.seed,
            name=args.name,
        )
        model = train_bow(read_items(args.train), cfg)
        save_bow(model, args.out)
        print(f"trained bow model ({len(model.vocabulary)} tokens) -> {args.out}")
    else:
        model = load_bow(args.model_file)
        matrix = predict_bow(model, read_items(args.items))
        write_predictions(matrix, args.out)
        print(f"wrote {len(matrix.item_ids)} prediction rows -> {args.out}")
    return 0


def _cmd_ensemble(args: argparse.Namespace) -> int:
    matrix = read_predictions(args.pred)
    vote = soft_vote if args.mode == "soft" else hard_vote
    result = vote(matrix, tie=args.tie)
    write_ensemble(result, args.out, mode=args.mode)
    print(f"{args.mode} vote over {matrix.n_models} models, {len(matrix.item_ids)} items -> {args.out}")
    return 0


def _cmd_stats(args: argparse.Namespace) -> int:
    table = fit_stats(read_items(args.train), args.kinds.split(","))
    table.save(args.out)
    print(f"fitted {len(table)} attribute-value entries -> {args.out}")
    return 0


def _cmd_oversample(args: argparse.Namespace) -> int:
    ids, X, labels, columns = read_features(args.infile)
    y = np.array([ClassLabel.to_index(lab) for lab in labels])
    cfg = OversampleConfig(method=args.method, k_neighbors=args.k_neighbors,
                           clusters=args.clusters, seed=args.seed)
    X_aug, y_aug = oversample(X, y, args.target_ratio, cfg)
    n_new = len(X_aug) - len(X)
    all_ids = ids + [f"synth-{i:06d}" for i in range(n_new)]
    header = ["item_id"] + columns + ["label"]
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for item_id, row, y_row in zip(all_ids, X_aug, y_aug):
            fh.write(item_id + "," + ",".join(fmt_float(v) for v in row))
            fh.write(f",{ClassLabel.from_index(int(y_row))}\n")
    print(f"added {n_new} synthetic rows -> {args.out}")
    return 0


def _cmd_features(args: argparse.Namespace) -> int:
    from .ensemble import read_ensemble
    from .stat_features import build_features, write_features

    kinds = tuple(args.kinds.split(","))
    table = AttributeStatsTable.load(args.stats)
    items = read_items(args.items)
    if args.base == "ensemble":
        base = read_ensemble(args.ensemble)
    else:
        base = read_predictions(args.pred)
    features = build_features(items, base, table, kinds)
    write_features(features, kinds, args.out, labels=items.labels())
    print(f"built {len(features)} feature vectors -> {args.out}")
    return 0


def _cmd_sffn(args: argparse.Namespace) -> int:
    from .util import sha256_text

    if args.action == "predict" and not args.model_file:
        raise SystemExit("sffn predict requires --model-file")
    if args.action == "train":
        _, X, labels, columns = read_features(args.features)
        val = None
        if args.val_features:
            _, Xv, labels_v, _ = read_features(args.val_features)
            val = (Xv, labels_v)
        cfg = TrainConfig(
            lr=args.lr,
            dropout=args.dropout,
            epochs=args.epochs,
            batch_size=args.batch_size,
            seed=args.seed,
            hidden=tuple(int(h) for h in args.hidden.split(",")),
        )
        model = train_sffn(
            X, labels, cfg,
            val[0] if val else None, val[1] if val else None,
            schema_hash=sha256_text(",".join(columns)),
        )
        save_model(model, args.out)
        print(f"trained sffn {model.layer_sizes} -> {args.out}")
    else:
        ids, X, _, columns = read_features(args.features)
        model = load_model(args.model_file, expected_schema_hash=sha256_text(",".join(columns)))
        predictions = predict_mc_batch(model, X, ids, args.mc_passes, base_seed=args.seed)
        from .pipeline import _write_sffn_csv

        _write_sffn_csv(Path(args.out), predictions)
        print(f"{args.mc_passes}-pass MC prediction for {len(ids)} items -> {args.out}")
    return 0


def _load_evidence(stats_path: str, items_path: str, pred_path: str, priority: tuple[str, ...]):
    from .heuristic import ItemEvidence

    table = AttributeStatsTable.load(stats_path)
    items = read_items(items_path)
    ids, pairs, _ = read_label_predictions(pred_path)
    by_id = dict(zip(ids, pairs))
    evidence = []
    for item in items:
        attr_probs = {}
        for kind in priority:
            pair, present = lookup(table, kind, item.attributes.get(kind, ()))
            if present:
                attr_probs[kind] = pair
        evidence.append(ItemEvidence(item.id, attr_probs, by_id[item.id], item.label))
    return evidence


def _cmd_postprocess(args: argparse.Namespace) -> int:
    priority = tuple(args.priority.split(","))
    evidence = _load_evidence(args.stats, args.items, args.pred, priority)
    if args.threshold == "auto":
        grid = tuple(float(t) for t in args.grid.split(","))
        threshold, curve = select_threshold_elbow(evidence, grid, priority)
        print(f"elbow threshold: {threshold} (curve: {curve})")
    else:
        threshold = float(args.threshold)
    cfg = HeuristicConfig(priority=priority, threshold=threshold, enabled=True)
    labels, traces = apply_heuristic_batch(evidence, cfg)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("item_id,p_real,p_fake,label\n")
        for ev, label in zip(evidence, labels):
            fh.write(f"{ev.item_id},{fmt_float(ev.model_pred.p_real)},"
                     f"{fmt_float(ev.model_pred.p_fake)},{label}\n")
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            for trace in traces:
                fh.write(json.dumps({"item_id": trace.item_id,
                                     "fired_branch": trace.fired_branch,
                                     "label": trace.label}, sort_keys=True) + "\n")
    overridden = sum(t.fired_branch.startswith("attr") for t in traces)
    print(f"postprocessed {len(labels)} items ({overridden} attribute overrides) -> {args.out}")
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    orderings = [tuple(o.split(",")) for o in args.orderings.split(";")]
    priority_union = tuple(dict.fromkeys(k for o in orderings for k in o))
    split_evidence = {}
    for spec in args.split:
        name, items_path, pred_path = spec.split(":")
        split_evidence[name] = _load_evidence(args.stats, items_path, pred_path, priority_union)
    rows = run_ablation(split_evidence, orderings, args.threshold,
                        modes=tuple(args.modes.split(",")))
    text = ablation_table(rows)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    print(text, end="")
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    ids, pairs, labels = read_label_predictions(args.pred)
    gold_items = {item.id: item.label for item in read_items(args.gold)}
    gold = [gold_items[i] for i in ids]
    if any(g is None for g in gold):
        raise SystemExit("gold corpus must label every predicted item")
    report = classification_metrics(labels, gold, args.avg)
    if args.metrics == "all":
        report = replace(report, nll=nll(pairs, gold), brier=brier(pairs, gold))
    if args.out:
        emit_report({"all": report}, args.format, args.out)
        print(f"report -> {args.out}")
    else:
        payload = report.to_dict()
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_mcnemar(args: argparse.Namespace) -> int:
    ids_a, _, labels_a = read_label_predictions(args.a)
    ids_b, _, labels_b = read_label_predictions(args.b)
    gold_items = {item.id: item.label for item in read_items(args.gold)}
    if set(ids_a) != set(ids_b):
        raise SystemExit("the two prediction files cover different items")
    order = ids_a
    b_by_id = dict(zip(ids_b, labels_b))
    labels_b = [b_by_id[i] for i in order]
    gold = [gold_items[i] for i in order]
    result = mcnemar(labels_a, labels_b, gold, alpha=args.alpha, mode=args.mode)
    print(json.dumps({
        "b": result.b, "c": result.c, "statistic": result.statistic,
        "p_value": result.p_value, "reject_at_alpha": result.reject_at_alpha,
        "alpha": result.alpha, "mode": result.mode, "degenerate": result.degenerate,
    }, indent=2, sort_keys=True))
    return 0


def _cmd_synth(args: argparse.Namespace) -> int:
    spec = spec_from_json(Path(args.spec).read_text(encoding="utf-8"))
    dataset = generate(spec)
    write_items(dataset, args.out)
    print(f"generated {len(dataset)} items -> {args.out}")
    return 0


def _cmd_run(args: argparse.Namespace) -> int:
    try:
        cfg = load_config(args.config)
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 64
    problems = validate_config(cfg)
    if problems:
        for problem in problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 64
    try:
        run_dir = run_pipeline(cfg, out_root=args.out_root)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return exc.stage_number
    print(f"run complete -> {run_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fusionet", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="clean raw items and extract attributes")
    p.add_argument("--input", required=True)
    p.add_argument("--kind", choices=("tweet", "article"), default="tweet")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("split", help="deterministic train/validation/test split")
    p.add_argument("--input", required=True)
    p.add_argument("--ratios", type=_parse_ratios, default=(0.8, 0.1, 0.1))
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("backbone", help="train or apply the built-in bag-of-words model")
    p.add_argument("action", choices=("train", "predict"))
    p.add_argument("--model", default="bow")
    p.add_argument("--train")
    p.add_argument("--items")
    p.add_argument("--model-file")
    p.add_argument("--out", required=True)
    p.add_argument("--name", default="bow")
    p.add_argument("--min-token-freq", type=int, default=1)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_backbone)

    p = sub.add_parser("ensemble", help="soft or hard voting over a predictions file")
    p.add_argument("--mode", choices=("soft", "hard"), default="soft")
    p.add_argument("--tie", choices=("real", "fake"), default="real")
    p.add_argument("--pred", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ensemble)

    p = sub.add_parser("stats", help="fit the attribute conditional-probability table")
    p.add_argument("--train", required=True)
    p.add_argument("--kinds", default="domain,username")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_stats)

    p = sub.add_parser("features", help="assemble fusion feature vectors")
    p.add_argument("--items", required=True)
    p.add_argument("--stats", required=True)
    p.add_argument("--base", choices=("ensemble", "raw"), default="ensemble")
    p.add_argument("--ensemble", help="ensemble CSV (base=ensemble)")
    p.add_argument("--pred", help="predictions CSV (base=raw)")
    p.add_argument("--kinds", default="domain,username")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_features)

    p = sub.add_parser("oversample", help="SMOTE / KMeans-SMOTE over a features file")
    p.add_argument("--method", choices=("smote", "kmeans-smote"), default="kmeans-smote")
    p.add_argument("--target-ratio", type=float, default=1.0)
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--clusters", type=int, default=8)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_oversample)

    p = sub.add_parser("sffn", help="train or apply the fusion network")
    p.add_argument("action", choices=("train", "predict"))
    p.add_argument("--features", required=True)
    p.add_argument("--val-features")
    p.add_argument("--model-file")
    p.add_argument("--out", required=True)
    p.add_argument("--hidden", default="32,16")
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--lr", type=float, default=1e-3)
    p.add_argument("--epochs", type=int, default=200)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--mc-passes", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_sffn)

    p = sub.add_parser("postprocess", help="attribute-override cascade on predictions")
    p.add_argument("--stats", required=True)
    p.add_argument("--items", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--priority", default="username,domain")
    p.add_argument("--threshold", default="0.88", help="number or 'auto'")
    p.add_argument("--grid", default="0.55,0.6,0.65,0.7,0.75,0.8,0.85,0.9,0.95")
    p.add_argument("--out", required=True)
    p.add_argument("--trace")
    p.set_defaults(func=_cmd_postprocess)

    p = sub.add_parser("ablate", help="F1 table over orderings x threshold modes x splits")
    p.add_argument("--stats", required=True)
    p.add_argument("--split", action="append", required=True,
                   metavar="NAME:ITEMS.jsonl:PRED.csv")
    p.add_argument("--orderings", required=True,
                   help="semicolon-separated orderings, e.g. 'domain,username;username,domain'")
    p.add_argument("--modes", default="with,without")
    p.add_argument("--threshold", type=float, default=0.88)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("evaluate", help="score a predictions file against gold labels")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--metrics", choices=("labels", "all"), default="all")
    p.add_argument("--avg", choices=("weighted", "macro", "micro"), default="weighted")
    p.add_argument("--format", choices=("text", "json", "csv"), default="json")
    p.add_argument("--out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("mcnemar", help="paired significance test between two prediction files")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--mode", choices=("exact", "chi2-corrected"), default="exact")
    p.add_argument("--alpha", type=float, default=0.05)
    p.set_defaults(func=_cmd_mcnemar)

    p = sub.add_parser("synth", help="generate a synthetic corpus from a JSON spec")
    p.add_argument("--spec", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("run", help="execute the full nine-stage pipeline")
    p.add_argument("--config", required=True)
    p.add_argument("--out-root", default="runs")
    p.set_defaults(func=_cmd_run)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
