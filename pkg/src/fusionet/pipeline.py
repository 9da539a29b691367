"""End-to-end pipeline: one declarative config, nine persisted stages.

Stage order is fixed: ingest (with splitting), backbone, ensemble,
stats, features, oversample, sffn (train + MC predict), heuristic,
evaluate.  Every stage writes its artifacts before the next starts and
each stage reloads its inputs from the previous stage's files, so any
artifact can be regenerated or audited independently.  All randomness
derives from the single root seed through stage-name hashing, and every
writer formats deterministically: rerunning an identical config
reproduces the run directory byte for byte.
"""

from __future__ import annotations

import configparser
import json
import os
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

from . import corpus as corpus_mod
from .backbone import (
    BowConfig,
    PredictionMatrix,
    predict_bow,
    read_predictions,
    save_bow,
    train_bow,
    write_predictions,
)
from .corpus import ClassLabel, Dataset, read_items, split_dataset, write_items
from .ensemble import EnsembleResult, hard_vote, read_ensemble, soft_vote, write_ensemble
from .evalkit import MetricsReport, brier, classification_metrics, emit_report, nll
from .heuristic import (
    HeuristicConfig,
    ItemEvidence,
    apply_heuristic_batch,
    select_threshold_elbow,
)
from .oversample import OversampleConfig, oversample
from .sffn import TrainConfig, predict_mc_batch, save_model, train_sffn
from .stat_features import (
    AttributeStatsTable,
    build_features,
    feature_columns,
    fit_stats,
    lookup,
    read_features,
)
from .types import ProbPair
from .util import derive_seed, fmt_float, sha256_file, sha256_text

STAGES = (
    "ingest",
    "backbone",
    "ensemble",
    "stats",
    "features",
    "oversample",
    "sffn",
    "heuristic",
    "evaluate",
)
EVAL_SPLITS = ("validation", "test")
SFFN_HEADER = "item_id,p_real,p_fake,c_u_real,c_u_fake,label,passes"
FINAL_HEADER = "item_id,p_real,p_fake,label"


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: Exception):
        self.stage = stage
        self.stage_number = STAGES.index(stage) + 1
        super().__init__(f"stage {self.stage_number} ({stage}) failed: {cause}")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything a run needs; every seed is explicit."""

    name: str
    seed: int
    input_items: str
    item_kind: str = "tweet"
    ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)

    backbone_source: str = "train"  # train | import | none
    predictions_path: str | None = None
    bow_min_token_freq: int = 1
    bow_l2: float = 1e-4
    bow_epochs: int = 300
    bow_lr: float = 0.1

    ensemble_mode: str = "soft"
    ensemble_tie: str = "real"

    kinds: tuple[str, ...] = ("domain", "username")
    feature_base: str = "ensemble"  # ensemble | raw

    oversample_method: str = "none"  # none | smote | kmeans-smote
    target_ratio: float = 1.0
    k_neighbors: int = 5
    clusters: int = 8
    imbalance_ratio_threshold: float = 1.0

    sffn_hidden: tuple[int, ...] = (32, 16)
    sffn_dropout: float = 0.2
    sffn_lr: float = 1e-3
    sffn_weight_decay: float = 1e-4
    sffn_batch_size: int = 32
    sffn_epochs: int = 200
    sffn_patience: int = 20
    mc_passes: int = 50

    heuristic_enabled: bool = True
    priority: tuple[str, ...] = ("domain", "username")
    threshold: float | str = "auto"
    threshold_grid: tuple[float, ...] = tuple(round(0.55 + 0.05 * i, 2) for i in range(9))

    averaging: str = "weighted"

    def canonical_text(self) -> str:
        """Stable key=value rendering used for the manifest's config hash."""
        pairs = []
        for key in sorted(self.__dataclass_fields__):
            pairs.append(f"{key}={getattr(self, key)!r}")
        return "\n".join(pairs) + "\n"


# --- config file parsing --------------------------------------------------


def _parse_floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(" ", "").split(",") if x)


def _parse_grid(text: str) -> tuple[float, ...]:
    """Either a comma list or start:stop:step (stop inclusive within 1e-9)."""
    if ":" in text:
        start, stop, step_ = (float(x) for x in text.split(":"))
        out = []
        t = start
        while t <= stop + 1e-9:
            out.append(round(t, 10))
            t += step_
        return tuple(out)
    return _parse_floats(text)


def load_config(path: str | Path, env: Mapping[str, str] | None = None) -> PipelineConfig:
    """Parse the INI-style run file; FUSIONET_<SECTION>_<KEY> env vars override."""
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")

    env = dict(os.environ if env is None else env)
    for var, value in sorted(env.items()):
        if not var.startswith("FUSIONET_"):
            continue
        try:
            _, section, key = var.split("_", 2)
        except ValueError:
            continue
        section = section.lower()
        if not parser.has_section(section):
            parser.add_section(section)
        parser.set(section, key.lower(), value)

    def get(section: str, key: str, fallback: str | None = None) -> str | None:
        return parser.get(section, key, fallback=fallback)

    if get("run", "seed") is None:
        raise ConfigError("[run] seed is required; wall-clock seeding is not supported")
    if get("run", "name") is None:
        raise ConfigError("[run] name is required")
    if get("input", "items") is None:
        raise ConfigError("[input] items is required")

    threshold_raw = get("heuristic", "threshold", "auto")
    threshold: float | str = "auto" if threshold_raw == "auto" else float(threshold_raw)

    defaults = PipelineConfig(name="", seed=0, input_items="")
    return PipelineConfig(
        name=get("run", "name"),
        seed=int(get("run", "seed")),
        input_items=get("input", "items"),
        item_kind=get("input", "kind", defaults.item_kind),
        ratios=tuple(_parse_floats(get("split", "ratios", "0.8,0.1,0.1"))),  # type: ignore[arg-type]
        backbone_source=get("backbone", "source", defaults.backbone_source),
        predictions_path=get("backbone", "predictions", None),
        bow_min_token_freq=int(get("backbone", "min_token_freq", str(defaults.bow_min_token_freq))),
        bow_l2=float(get("backbone", "l2", str(defaults.bow_l2))),
        bow_epochs=int(get("backbone", "epochs", str(defaults.bow_epochs))),
        bow_lr=float(get("backbone", "lr", str(defaults.bow_lr))),
        ensemble_mode=get("ensemble", "mode", defaults.ensemble_mode),
        ensemble_tie=get("ensemble", "tie", defaults.ensemble_tie),
        kinds=tuple(get("features", "kinds", "domain,username").replace(" ", "").split(",")),
        feature_base=get("features", "base", defaults.feature_base),
        oversample_method=get("oversample", "method", defaults.oversample_method),
        target_ratio=float(get("oversample", "target_ratio", str(defaults.target_ratio))),
        k_neighbors=int(get("oversample", "k_neighbors", str(defaults.k_neighbors))),
        clusters=int(get("oversample", "clusters", str(defaults.clusters))),
        imbalance_ratio_threshold=float(
            get("oversample", "imbalance_ratio_threshold", str(defaults.imbalance_ratio_threshold))
        ),
        sffn_hidden=tuple(int(x) for x in get("sffn", "hidden", "32,16").replace(" ", "").split(",")),
        sffn_dropout=float(get("sffn", "dropout", str(defaults.sffn_dropout))),
        sffn_lr=float(get("sffn", "lr", str(defaults.sffn_lr))),
        sffn_weight_decay=float(get("sffn", "weight_decay", str(defaults.sffn_weight_decay))),
        sffn_batch_size=int(get("sffn", "batch_size", str(defaults.sffn_batch_size))),
        sffn_epochs=int(get("sffn", "epochs", str(defaults.sffn_epochs))),
        sffn_patience=int(get("sffn", "patience", str(defaults.sffn_patience))),
        mc_passes=int(get("sffn", "mc_passes", str(defaults.mc_passes))),
        heuristic_enabled=get("heuristic", "enabled", "true").lower() in ("1", "true", "yes"),
        priority=tuple(get("heuristic", "priority", "domain,username").replace(" ", "").split(",")),
        threshold=threshold,
        threshold_grid=_parse_grid(get("heuristic", "grid", "0.55:0.95:0.05")),
        averaging=get("evaluate", "averaging", defaults.averaging),
    )


def validate_config(cfg: PipelineConfig) -> list[str]:
    """Empty list iff run_pipeline's preconditions hold."""
    problems = []
    if not cfg.name or any(ch in cfg.name for ch in "/\\"):
        problems.append(f"run name must be a plain directory name, got {cfg.name!r}")
    if not Path(cfg.input_items).is_file():
        problems.append(f"input items file not found: {cfg.input_items}")
    if cfg.item_kind not in ("tweet", "article"):
        problems.append(f"item kind must be tweet|article, got {cfg.item_kind!r}")
    if len(cfg.ratios) != 3 or any(r <= 0 for r in cfg.ratios) or abs(sum(cfg.ratios) - 1) > 1e-9:
        problems.append(f"split ratios must be three positives summing to 1: {cfg.ratios!r}")
    if cfg.backbone_source not in ("train", "import", "none"):
        problems.append(f"backbone source must be train|import|none, got {cfg.backbone_source!r}")
    if cfg.backbone_source == "import":
        if not cfg.predictions_path:
            problems.append("backbone source 'import' requires a predictions path")
        elif not Path(cfg.predictions_path).is_file():
            problems.append(f"predictions file not found: {cfg.predictions_path}")
        elif Path(cfg.predictions_path).resolve() == Path(cfg.input_items).resolve():
            problems.append("input items and imported predictions must be distinct paths")
    if cfg.ensemble_mode not in ("soft", "hard"):
        problems.append(f"ensemble mode must be soft|hard, got {cfg.ensemble_mode!r}")
    if cfg.ensemble_tie not in ("real", "fake"):
        problems.append(f"ensemble tie must be real|fake, got {cfg.ensemble_tie!r}")
    unknown = [k for k in (*cfg.kinds, *cfg.priority) if k not in corpus_mod.ATTRIBUTE_KINDS]
    if unknown:
        problems.append(f"unknown attribute kinds: {unknown}")
    if len(set(cfg.priority)) != len(cfg.priority):
        problems.append(f"duplicate heuristic priority entries: {cfg.priority!r}")
    if not set(cfg.priority) <= set(cfg.kinds):
        problems.append("heuristic priority kinds must be a subset of feature kinds")
    if cfg.feature_base not in ("ensemble", "raw"):
        problems.append(f"feature base must be ensemble|raw, got {cfg.feature_base!r}")
    if cfg.oversample_method not in ("none", "smote", "kmeans-smote"):
        problems.append(f"oversample method must be none|smote|kmeans-smote, got {cfg.oversample_method!r}")
    if cfg.target_ratio <= 0:
        problems.append(f"oversample target ratio must be positive, got {cfg.target_ratio!r}")
    if cfg.mc_passes < 1:
        problems.append(f"mc_passes must be >= 1, got {cfg.mc_passes!r}")
    if not 0.0 <= cfg.sffn_dropout < 1.0:
        problems.append(f"sffn dropout must be in [0, 1), got {cfg.sffn_dropout!r}")
    if cfg.sffn_epochs < 1:
        problems.append(f"sffn epochs must be >= 1, got {cfg.sffn_epochs!r}")
    if isinstance(cfg.threshold, str):
        if cfg.threshold != "auto":
            problems.append(f"threshold must be 'auto' or a number, got {cfg.threshold!r}")
        else:
            grid = cfg.threshold_grid
            if len(grid) < 3 or sorted(grid) != list(grid) or grid[0] <= 0.5 or grid[-1] > 1.0:
                problems.append(f"threshold grid must be >= 3 ascending points in (0.5, 1]: {grid!r}")
    elif not 0.5 < float(cfg.threshold) <= 1.0:
        problems.append(f"threshold must lie in (0.5, 1], got {cfg.threshold!r}")
    if cfg.averaging not in ("weighted", "macro", "micro"):
        problems.append(f"averaging must be weighted|macro|micro, got {cfg.averaging!r}")
    return problems


# --- stage helpers ----------------------------------------------------------


def _read_split(run_dir: Path, split: str) -> Dataset:
    return read_items(run_dir / f"{split}.jsonl")


def _base_for(cfg: PipelineConfig, run_dir: Path, split: str) -> EnsembleResult | PredictionMatrix:
    if cfg.feature_base == "raw":
        return read_predictions(run_dir / f"predictions_{split}.csv")
    return read_ensemble(run_dir / f"ensemble_{split}.csv", tie=cfg.ensemble_tie)


def _write_sffn_csv(path: Path, predictions) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(SFFN_HEADER + "\n")
        for up in predictions:
            fh.write(
                ",".join(
                    [
                        up.item_id,
                        fmt_float(up.v_p.p_real),
                        fmt_float(up.v_p.p_fake),
                        fmt_float(up.c_u[0]),
                        fmt_float(up.c_u[1]),
                        up.label,
                        str(up.passes),
                    ]
                )
                + "\n"
            )


def read_label_predictions(path: str | Path) -> tuple[list[str], list[ProbPair], list[str]]:
    """Read any CSV whose header names item_id, p_real, p_fake and label columns."""
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        try:
            idx = {name: header.index(name) for name in ("item_id", "p_real", "p_fake", "label")}
        except ValueError:
            raise ValueError(f"{path}: header must name item_id, p_real, p_fake, label") from None
        ids, pairs, labels = [], [], []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            ids.append(parts[idx["item_id"]])
            pairs.append(ProbPair(float(parts[idx["p_real"]]), float(parts[idx["p_fake"]])))
            labels.append(parts[idx["label"]])
    return ids, pairs, labels


def _evidence_for_split(
    cfg: PipelineConfig, run_dir: Path, split: str, table: AttributeStatsTable
) -> list[ItemEvidence]:
    items = _read_split(run_dir, split)
    ids, pairs, _ = read_label_predictions(run_dir / f"sffn_{split}.csv")
    by_id = dict(zip(ids, pairs))
    evidence = []
    for item in items:
        attr_probs = {}
        for kind in cfg.priority:
            pair, present = lookup(table, kind, item.attributes.get(kind, ()))
            if present:
                attr_probs[kind] = pair
        evidence.append(
            ItemEvidence(
                item_id=item.id,
                attr_probs=attr_probs,
                model_pred=by_id[item.id],
                gold=item.label,
            )
        )
    return evidence


# --- stages -----------------------------------------------------------------


def _stage_ingest(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    records = []
    with open(cfg.input_items, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    items = [corpus_mod.ingest_item(record, cfg.item_kind) for record in records]
    dataset = Dataset(items=tuple(items))
    write_items(dataset, run_dir / "corpus.jsonl")
    train, val, test = split_dataset(dataset, cfg.ratios, seed=derive_seed(cfg.seed, "split"))
    for split, part in zip(("train", "validation", "test"), (train, val, test)):
        write_items(part, run_dir / f"{split}.jsonl")
    return ["corpus.jsonl", "train.jsonl", "validation.jsonl", "test.jsonl"]


def _stage_backbone(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    if cfg.backbone_source == "none":
        return []
    artifacts = []
    splits = {split: _read_split(run_dir, split) for split in ("train", "validation", "test")}
    if cfg.backbone_source == "train":
        bow_cfg = BowConfig(
            min_token_freq=cfg.bow_min_token_freq,
            l2=cfg.bow_l2,
            epochs=cfg.bow_epochs,
            lr=cfg.bow_lr,
            seed=derive_seed(cfg.seed, "backbone"),
        )
        model = train_bow(splits["train"], bow_cfg)
        save_bow(model, run_dir / "bow_model.json")
        artifacts.append("bow_model.json")
        matrices = {split: predict_bow(model, part) for split, part in splits.items()}
    else:
        full = read_predictions(cfg.predictions_path)
        matrices = {split: full.subset(part.ids()) for split, part in splits.items()}
    for split, matrix in matrices.items():
        write_predictions(matrix, run_dir / f"predictions_{split}.csv")
        artifacts.append(f"predictions_{split}.csv")
    return artifacts


def _stage_ensemble(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    artifacts = []
    vote = soft_vote if cfg.ensemble_mode == "soft" else hard_vote
    for split in ("train", "validation", "test"):
        matrix = read_predictions(run_dir / f"predictions_{split}.csv")
        result = vote(matrix, tie=cfg.ensemble_tie)
        write_ensemble(result, run_dir / f"ensemble_{split}.csv", mode=cfg.ensemble_mode)
        artifacts.append(f"ensemble_{split}.csv")
    return artifacts


def _stage_stats(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    table = fit_stats(_read_split(run_dir, "train"), cfg.kinds)
    table.save(run_dir / "stats.csv")
    return ["stats.csv"]


def _stage_features(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    from .stat_features import write_features

    table = AttributeStatsTable.load(run_dir / "stats.csv")
    artifacts = []
    for split in ("train", "validation", "test"):
        items = _read_split(run_dir, split)
        base = _base_for(cfg, run_dir, split)
        features = build_features(items, base, table, cfg.kinds)
        write_features(features, cfg.kinds, run_dir / f"features_{split}.csv", labels=items.labels())
        artifacts.append(f"features_{split}.csv")
    return artifacts


def _stage_oversample(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    src = run_dir / "features_train.csv"
    dst = run_dir / "features_train_aug.csv"
    if cfg.oversample_method == "none":
        dst.write_bytes(src.read_bytes())
        return ["features_train_aug.csv"]
    ids, X, labels, columns = read_features(src)
    y = np.array([ClassLabel.to_index(lab) for lab in labels])
    os_cfg = OversampleConfig(
        method=cfg.oversample_method,
        k_neighbors=cfg.k_neighbors,
        clusters=cfg.clusters,
        imbalance_ratio_threshold=cfg.imbalance_ratio_threshold,
        seed=derive_seed(cfg.seed, "oversample"),
    )
    X_aug, y_aug = oversample(X, y, cfg.target_ratio, os_cfg)
    n_new = len(X_aug) - len(X)
    all_ids = ids + [f"synth-{i:06d}" for i in range(n_new)]
    all_labels = [ClassLabel.from_index(v) for v in y_aug]
    header = ["item_id"] + columns + ["label"]
    with open(dst, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for item_id, row, label in zip(all_ids, X_aug, all_labels):
            fh.write(item_id + "," + ",".join(fmt_float(v) for v in row) + f",{label}\n")
    return ["features_train_aug.csv"]


def _stage_sffn(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    ids, X, labels, columns = read_features(run_dir / "features_train_aug.csv")
    _, Xv, labels_v, _ = read_features(run_dir / "features_validation.csv")
    schema_hash = sha256_text(",".join(columns))
    train_cfg = TrainConfig(
        lr=cfg.sffn_lr,
        weight_decay=cfg.sffn_weight_decay,
        batch_size=cfg.sffn_batch_size,
        epochs=cfg.sffn_epochs,
        dropout=cfg.sffn_dropout,
        seed=derive_seed(cfg.seed, "sffn"),
        hidden=cfg.sffn_hidden,
        patience=cfg.sffn_patience,
    )
    model = train_sffn(X, labels, train_cfg, Xv, labels_v, schema_hash=schema_hash)
    save_model(model, run_dir / "sffn_model.json")
    artifacts = ["sffn_model.json"]
    for split in EVAL_SPLITS:
        split_ids, X_split, _, split_columns = read_features(run_dir / f"features_{split}.csv")
        if sha256_text(",".join(split_columns)) != schema_hash:
            raise ValueError(f"feature schema of split {split!r} differs from training schema")
        predictions = predict_mc_batch(
            model, X_split, split_ids, cfg.mc_passes, base_seed=derive_seed(cfg.seed, "mc", split)
        )
        _write_sffn_csv(run_dir / f"sffn_{split}.csv", predictions)
        artifacts.append(f"sffn_{split}.csv")
    return artifacts


def _stage_heuristic(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    table = AttributeStatsTable.load(run_dir / "stats.csv")
    evidence = {split: _evidence_for_split(cfg, run_dir, split, table) for split in EVAL_SPLITS}
    if cfg.threshold == "auto":
        threshold, curve = select_threshold_elbow(
            evidence["validation"], cfg.threshold_grid, cfg.priority, cfg.averaging
        )
    else:
        threshold, curve = float(cfg.threshold), []
    with open(run_dir / "threshold.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(
            {
                "threshold": threshold,
                "selection": "elbow" if cfg.threshold == "auto" else "fixed",
                "curve": [[t, f] for t, f in curve],
            },
            fh,
            sort_keys=True,
        )
        fh.write("\n")
    artifacts = ["threshold.json"]
    h_cfg = HeuristicConfig(
        priority=cfg.priority, threshold=threshold, enabled=cfg.heuristic_enabled
    )
    for split in EVAL_SPLITS:
        labels, traces = apply_heuristic_batch(evidence[split], h_cfg)
        with open(run_dir / f"final_{split}.csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(FINAL_HEADER + "\n")
            for ev, label in zip(evidence[split], labels):
                fh.write(
                    f"{ev.item_id},{fmt_float(ev.model_pred.p_real)},"
                    f"{fmt_float(ev.model_pred.p_fake)},{label}\n"
                )
        with open(run_dir / f"traces_{split}.jsonl", "w", encoding="utf-8", newline="\n") as fh:
            for trace in traces:
                fh.write(
                    json.dumps(
                        {
                            "item_id": trace.item_id,
                            "fired_branch": trace.fired_branch,
                            "label": trace.label,
                        },
                        sort_keys=True,
                    )
                    + "\n"
                )
        artifacts += [f"final_{split}.csv", f"traces_{split}.jsonl"]
    return artifacts


def _stage_evaluate(cfg: PipelineConfig, run_dir: Path) -> list[str]:
    reports: dict[str, MetricsReport] = {}
    for split in EVAL_SPLITS:
        items = _read_split(run_dir, split)
        gold = {item.id: item.label for item in items}
        systems: dict[str, tuple[list[str], list[ProbPair], list[str]]] = {}
        ens = read_ensemble(run_dir / f"ensemble_{split}.csv", tie=cfg.ensemble_tie)
        ens_pairs = [ens.soft_pair(i) for i in range(len(ens.item_ids))]
        systems["ensemble"] = (list(ens.item_ids), ens_pairs, list(ens.labels(cfg.ensemble_mode)))
        systems["sffn"] = read_label_predictions(run_dir / f"sffn_{split}.csv")
        systems["final"] = read_label_predictions(run_dir / f"final_{split}.csv")
        for system, (ids, pairs, labels) in systems.items():
            gold_labels = [gold[i] for i in ids]
            report = classification_metrics(labels, gold_labels, cfg.averaging)
            reports[f"{split}/{system}"] = replace(
                report, nll=nll(pairs, gold_labels), brier=brier(pairs, gold_labels)
            )
    emit_report(reports, "json", run_dir / "report.json")
    emit_report(reports, "csv", run_dir / "report.csv")
    return ["report.json", "report.csv"]


_STAGE_FUNCS: dict[str, Callable[[PipelineConfig, Path], list[str]]] = {
    "ingest": _stage_ingest,
    "backbone": _stage_backbone,
    "ensemble": _stage_ensemble,
    "stats": _stage_stats,
    "features": _stage_features,
    "oversample": _stage_oversample,
    "sffn": _stage_sffn,
    "heuristic": _stage_heuristic,
    "evaluate": _stage_evaluate,
}


def run_pipeline(cfg: PipelineConfig, out_root: str | Path = "runs") -> Path:
    """Execute all nine stages; returns the run directory.

    The manifest is rewritten after every completed stage, so a failed
    run preserves both its finished artifacts and the record of what
    completed.
    """
    problems = validate_config(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    run_dir = Path(out_root) / cfg.name
    run_dir.mkdir(parents=True, exist_ok=True)

    manifest = {
        "config_hash": sha256_text(cfg.canonical_text()),
        "seed": cfg.seed,
        "stages": [],
    }
    for stage in STAGES:
        try:
            artifacts = _STAGE_FUNCS[stage](cfg, run_dir)
        except Exception as exc:
            raise StageError(stage, exc) from exc
        manifest["stages"].append(
            {
                "stage": stage,
                "artifacts": {name: sha256_file(run_dir / name) for name in artifacts},
            }
        )
        with open(run_dir / "manifest.json", "w", encoding="utf-8", newline="\n") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    return run_dir
