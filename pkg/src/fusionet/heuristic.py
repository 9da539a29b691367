"""Attribute-driven override cascade and threshold selection.

For each item the cascade walks the configured attribute kinds in
priority order; the first kind whose class-conditional probability both
clears the threshold and dominates its counterpart decides the label.
Items whose attributes never fire fall back to the model's own scores.
The threshold can be picked on a validation split by the knee of the
F1-versus-threshold curve (maximum distance to the chord).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .corpus import ClassLabel
from .evalkit import classification_metrics
from .types import ProbPair


@dataclass(frozen=True)
class HeuristicConfig:
    priority: tuple[str, ...] = ("username", "domain")
    threshold: float = 0.88
    enabled: bool = True

    def __post_init__(self) -> None:
        if len(set(self.priority)) != len(self.priority):
            raise ValueError(f"priority entries must be distinct: {self.priority!r}")
        if not 0.5 < self.threshold <= 1.0:
            raise ValueError(f"threshold must be in (0.5, 1], got {self.threshold!r}")


@dataclass(frozen=True)
class HeuristicTrace:
    """Which branch of the cascade decided one item."""

    item_id: str
    fired_branch: str  # e.g. "attr1-real", "attr2-fake", "model-real"
    label: str


def _cascade(
    attr_probs: Mapping[str, ProbPair],
    model_pred: ProbPair,
    priority: Sequence[str],
    threshold: float,
    enabled: bool,
    item_id: str,
) -> tuple[str, HeuristicTrace]:
    if enabled:
        for rank, kind in enumerate(priority, start=1):
            pair = attr_probs.get(kind)
            if pair is None:
                continue
            if pair.p_real > threshold and pair.p_real > pair.p_fake:
                trace = HeuristicTrace(item_id, f"attr{rank}-real", ClassLabel.REAL)
                return ClassLabel.REAL, trace
            if pair.p_fake > threshold and pair.p_real < pair.p_fake:
                trace = HeuristicTrace(item_id, f"attr{rank}-fake", ClassLabel.FAKE)
                return ClassLabel.FAKE, trace
    if model_pred.p_real > model_pred.p_fake:
        return ClassLabel.REAL, HeuristicTrace(item_id, "model-real", ClassLabel.REAL)
    return ClassLabel.FAKE, HeuristicTrace(item_id, "model-fake", ClassLabel.FAKE)


def apply_heuristic(
    attr_probs: Mapping[str, ProbPair],
    model_pred: ProbPair,
    cfg: HeuristicConfig,
    item_id: str = "",
) -> tuple[str, HeuristicTrace]:
    """Run the override cascade for one item.

    ``attr_probs`` maps each attribute kind present on the item to its
    class-conditional probability pair; absent kinds simply skip their
    branches.  Exactly one branch fires.
    """
    return _cascade(
        attr_probs, model_pred, cfg.priority, cfg.threshold, cfg.enabled, item_id
    )


@dataclass(frozen=True)
class ItemEvidence:
    """Everything the cascade needs for one item."""

    item_id: str
    attr_probs: Mapping[str, ProbPair]
    model_pred: ProbPair
    gold: str | None = None


def apply_heuristic_batch(
    evidence: Sequence[ItemEvidence], cfg: HeuristicConfig
) -> tuple[list[str], list[HeuristicTrace]]:
    labels, traces = [], []
    for ev in evidence:
        label, trace = apply_heuristic(ev.attr_probs, ev.model_pred, cfg, ev.item_id)
        labels.append(label)
        traces.append(trace)
    return labels, traces


# --- threshold selection --------------------------------------------------


def _f1_at(
    evidence: Sequence[ItemEvidence],
    priority: Sequence[str],
    threshold: float,
    averaging: str,
) -> float:
    labels = [
        _cascade(ev.attr_probs, ev.model_pred, priority, threshold, True, ev.item_id)[0]
        for ev in evidence
    ]
    gold = [ev.gold for ev in evidence]
    if any(g is None for g in gold):
        raise ValueError("scoring the cascade needs gold labels on every item")
    return classification_metrics(labels, gold, averaging).f1


def select_threshold_elbow(
    evidence: Sequence[ItemEvidence],
    grid: Sequence[float],
    priority: tuple[str, ...] = ("username", "domain"),
    averaging: str = "weighted",
) -> tuple[float, list[tuple[float, float]]]:
    """Pick the knee of the validation F1 curve over candidate thresholds.

    The knee is the candidate with maximum perpendicular distance to the
    chord joining the first and last (threshold, F1) points; ties break
    toward the larger threshold.  Returns (threshold, curve) where curve
    lists the (threshold, F1) pairs actually measured.
    """
    grid = list(grid)
    if len(grid) < 3:
        raise ValueError(f"candidate grid needs at least 3 points, got {len(grid)}")
    if sorted(grid) != grid or len(set(grid)) != len(grid):
        raise ValueError("candidate grid must be strictly ascending")
    if grid[0] <= 0.5 or grid[-1] > 1.0:
        raise ValueError("candidates must lie in (0.5, 1]")

    curve = [(t, _f1_at(evidence, priority, t, averaging)) for t in grid]
    t0, f0 = curve[0]
    t1, f1 = curve[-1]
    chord = (t1 - t0, f1 - f0)
    norm = float(np.hypot(*chord)) or 1.0
    best_t, best_d = grid[0], -1.0
    for t, f in curve:
        # scalar cross product of the chord with the point, i.e. distance x norm
        distance = abs(chord[0] * (f - f0) - chord[1] * (t - t0)) / norm
        if distance >= best_d:  # ties move toward the larger threshold
            best_t, best_d = t, distance
    return best_t, curve


# --- ablation over priority orderings ---------------------------------------


@dataclass(frozen=True)
class AblationRow:
    ordering: tuple[str, ...]
    mode: str  # "with" or "without"
    split: str
    f1: float


def run_ablation(
    split_evidence: Mapping[str, Sequence[ItemEvidence]],
    orderings: Sequence[tuple[str, ...]],
    threshold: float,
    modes: Sequence[str] = ("with", "without"),
    averaging: str = "weighted",
) -> list[AblationRow]:
    """F1 for every (ordering, threshold-mode, split) combination.

    "without" runs the cascade at threshold 0.5, where the threshold
    test is implied by the majority test and any majority attribute
    evidence fires.
    """
    rows = []
    for ordering in orderings:
        if len(set(ordering)) != len(ordering):
            raise ValueError(f"ordering entries must be distinct: {ordering!r}")
        for mode in modes:
            if mode == "with":
                t = threshold
            elif mode == "without":
                t = 0.5
            else:
                raise ValueError(f"unknown mode {mode!r}")
            for split, evidence in split_evidence.items():
                rows.append(
                    AblationRow(
                        ordering=tuple(ordering),
                        mode=mode,
                        split=split,
                        f1=_f1_at(evidence, ordering, t, averaging),
                    )
                )
    return rows


def ablation_table(rows: Sequence[AblationRow]) -> str:
    """Render ablation rows as a fixed-order CSV text block."""
    lines = ["ordering,mode,split,f1"]
    for row in rows:
        lines.append(f"{'>'.join(row.ordering)},{row.mode},{row.split},{float(row.f1)!r}")
    return "\n".join(lines) + "\n"
