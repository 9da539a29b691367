"""Attribute conditional-probability tables and fusion feature assembly.

For every attribute value seen in training, the table stores how many
real and fake items contain it; the value's class-conditional
probability is the plain ratio n_real / (n_real + n_fake) with no
smoothing.  An item mentioning the same value twice still counts once.

Fusion feature vectors concatenate a base probability block (either the
2 ensemble scores or the 2n raw model scores) with one averaged
probability pair per configured attribute kind; kinds with no known
value get the neutral pair (0.5, 0.5) and a cleared presence mask so a
downstream model can learn to discount the fill.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .backbone import PredictionMatrix
from .corpus import ClassLabel, Dataset, LabeledItem
from .ensemble import EnsembleResult
from .types import NEUTRAL_PAIR, ProbPair

STATS_HEADER = "kind,value,n_real,n_fake"


class FeatureError(ValueError):
    pass


@dataclass(frozen=True)
class AttributeStatsTable:
    """(kind, value) -> (n_real, n_fake) occurrence counts from training items."""

    counts: Mapping[tuple[str, str], tuple[int, int]]

    def __len__(self) -> int:
        return len(self.counts)

    def __contains__(self, key: tuple[str, str]) -> bool:
        return key in self.counts

    def prob(self, kind: str, value: str) -> ProbPair:
        n_real, n_fake = self.counts[(kind, value)]
        total = n_real + n_fake
        return ProbPair(n_real / total, n_fake / total)

    def save(self, path: str | Path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(STATS_HEADER + "\n")
            for (kind, value), (n_real, n_fake) in sorted(self.counts.items()):
                if "," in value:
                    value = '"' + value.replace('"', '""') + '"'
                fh.write(f"{kind},{value},{n_real},{n_fake}\n")

    @staticmethod
    def load(path: str | Path) -> "AttributeStatsTable":
        import csv

        counts: dict[tuple[str, str], tuple[int, int]] = {}
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if ",".join(header) != STATS_HEADER:
                raise ValueError(f"bad stats header {header!r}")
            for kind, value, n_real, n_fake in reader:
                counts[(kind, value)] = (int(n_real), int(n_fake))
        return AttributeStatsTable(counts=counts)


def fit_stats(train: Dataset, kinds: Sequence[str]) -> AttributeStatsTable:
    """Count, per attribute value, the training items of each class containing it."""
    for item in train:
        if item.label is None:
            raise ValueError(f"training item {item.id!r} has no label")
    counts: dict[tuple[str, str], list[int]] = {}
    for item in train:
        column = ClassLabel.to_index(item.label)
        for kind in kinds:
            for value in set(item.attributes.get(kind, ())):
                entry = counts.setdefault((kind, value), [0, 0])
                entry[column] += 1
    return AttributeStatsTable(
        counts={key: (c[0], c[1]) for key, c in counts.items()}
    )


def lookup(
    table: AttributeStatsTable, kind: str, values: Iterable[str]
) -> tuple[ProbPair, bool]:
    """Average the probability pairs of the distinct known values.

    Returns the neutral pair and present=False when none of the values
    was seen in training.
    """
    known = [v for v in dict.fromkeys(values) if (kind, v) in table]
    if not known:
        return NEUTRAL_PAIR, False
    pairs = np.array([table.prob(kind, v) for v in known])
    mean = pairs.mean(axis=0)
    return ProbPair(float(mean[0]), float(mean[1])), True


@dataclass(frozen=True)
class FusionFeatureVector:
    """Base probabilities + per-kind attribute pairs, with a presence mask per kind."""

    item_id: str
    values: tuple[float, ...]
    masks: tuple[bool, ...]

    def to_input(self) -> np.ndarray:
        """Numeric input for a downstream model: values then masks as 0/1."""
        return np.array(self.values + tuple(1.0 if m else 0.0 for m in self.masks))


def _base_rows(base: EnsembleResult | PredictionMatrix) -> dict[str, tuple[float, ...]]:
    if isinstance(base, EnsembleResult):
        return {
            item_id: (float(base.soft[i, 0]), float(base.soft[i, 1]))
            for i, item_id in enumerate(base.item_ids)
        }
    if isinstance(base, PredictionMatrix):
        return {
            item_id: tuple(float(x) for x in base.probs[i].reshape(-1))
            for i, item_id in enumerate(base.item_ids)
        }
    raise TypeError(f"unsupported base type: {type(base).__name__}")


def build_features(
    items: Iterable[LabeledItem],
    base: EnsembleResult | PredictionMatrix,
    table: AttributeStatsTable,
    kinds: Sequence[str],
) -> list[FusionFeatureVector]:
    """Assemble one fusion vector per item, in item order.

    Layout is fixed for a given configuration: base probabilities first,
    then one (p_real, p_fake) pair per kind in the configured order.
    """
    rows = _base_rows(base)
    features = []
    for item in items:
        if item.id not in rows:
            raise FeatureError(f"item {item.id!r} missing from base predictions")
        values = list(rows[item.id])
        masks = []
        for kind in kinds:
            pair, present = lookup(table, kind, item.attributes.get(kind, ()))
            values.extend(pair)
            masks.append(present)
        features.append(
            FusionFeatureVector(
                item_id=item.id, values=tuple(values), masks=tuple(masks)
            )
        )
    return features


# --- features CSV -------------------------------------------------------------


def feature_columns(n_base: int, kinds: Sequence[str]) -> list[str]:
    """Fixed column order for a configuration; doubles as the feature schema."""
    if n_base == 2:
        cols = ["base_p_real", "base_p_fake"]
    else:
        cols = []
        for j in range(n_base // 2):
            cols += [f"m{j}_p_real", f"m{j}_p_fake"]
    for kind in kinds:
        cols += [f"{kind}_p_real", f"{kind}_p_fake"]
    cols += [f"{kind}_present" for kind in kinds]
    return cols


def write_features(
    features: Sequence[FusionFeatureVector],
    kinds: Sequence[str],
    path: str | Path,
    labels: Sequence[str | None] | None = None,
) -> None:
    if not features:
        raise FeatureError("no feature vectors to write")
    n_base = len(features[0].values) - 2 * len(kinds)
    header = ["item_id"] + feature_columns(n_base, kinds) + ["label"]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i, fv in enumerate(features):
            label = "" if labels is None or labels[i] is None else labels[i]
            numeric = list(fv.values) + [1.0 if m else 0.0 for m in fv.masks]
            fh.write(fv.item_id + "," + ",".join(repr(float(x)) for x in numeric))
            fh.write(f",{label}\n")


def read_features(path: str | Path) -> tuple[list[str], np.ndarray, list[str | None], list[str]]:
    """Returns (item_ids, matrix, labels, feature_column_names).

    The matrix holds every numeric column (values then masks), i.e. the
    exact input space the fusion network trains in.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[0] != "item_id" or header[-1] != "label":
            raise FeatureError(f"bad features header in {path}")
        columns = header[1:-1]
        item_ids: list[str] = []
        rows: list[list[float]] = []
        labels: list[str | None] = []
        for line in fh:
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != len(header):
                raise FeatureError(f"row width {len(parts)} != header width {len(header)}")
            item_ids.append(parts[0])
            rows.append([float(x) for x in parts[1:-1]])
            labels.append(parts[-1] or None)
    return item_ids, np.array(rows), labels, columns
