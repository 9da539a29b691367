"""Soft and hard voting over a prediction matrix.

Soft voting averages the member probability vectors; hard voting counts
member argmax decisions, where a member whose two probabilities tie
votes "real".  The ensemble-level tie for hard voting (possible with an
even member count) is configurable and defaults to "real".
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backbone import PredictionMatrix
from .corpus import ClassLabel
from .types import ProbPair
from .util import fmt_float

ENSEMBLE_HEADER = "item_id,p_real,p_fake,v_real,v_fake,label"


@dataclass(frozen=True)
class EnsembleResult:
    """Soft scores, vote counts and both labels for every item."""

    item_ids: tuple[str, ...]
    soft: np.ndarray  # (n_items, 2)
    votes: np.ndarray  # (n_items, 2) integer counts
    labels_soft: tuple[str, ...]
    labels_hard: tuple[str, ...]

    def soft_pair(self, item_index: int) -> ProbPair:
        row = self.soft[item_index]
        return ProbPair(float(row[0]), float(row[1]))

    def labels(self, mode: str) -> tuple[str, ...]:
        if mode == "soft":
            return self.labels_soft
        if mode == "hard":
            return self.labels_hard
        raise ValueError(f"mode must be 'soft' or 'hard', got {mode!r}")


def _vote(matrix: PredictionMatrix, tie: str) -> EnsembleResult:
    if matrix.n_models < 1:
        raise ValueError("ensemble needs at least one model")
    if tie not in ("real", "fake"):
        raise ValueError(f"tie rule must be 'real' or 'fake', got {tie!r}")

    soft = matrix.probs.mean(axis=1)
    real_votes = (matrix.probs[:, :, 0] >= matrix.probs[:, :, 1]).sum(axis=1)
    votes = np.stack([real_votes, matrix.n_models - real_votes], axis=1)

    labels_soft = tuple(
        ClassLabel.REAL if p[0] >= p[1] else ClassLabel.FAKE for p in soft
    )
    if tie == "real":
        hard_real = votes[:, 0] >= votes[:, 1]
    else:
        hard_real = votes[:, 0] > votes[:, 1]
    labels_hard = tuple(
        ClassLabel.REAL if flag else ClassLabel.FAKE for flag in hard_real
    )
    return EnsembleResult(
        item_ids=matrix.item_ids,
        soft=soft,
        votes=votes,
        labels_soft=labels_soft,
        labels_hard=labels_hard,
    )


def soft_vote(matrix: PredictionMatrix, tie: str = "real") -> EnsembleResult:
    """Average member probabilities per class; label is the argmax of the mean."""
    return _vote(matrix, tie)


def hard_vote(matrix: PredictionMatrix, tie: str = "real") -> EnsembleResult:
    """Majority vote over member argmax decisions (a member's internal tie votes real)."""
    return _vote(matrix, tie)


def write_ensemble(result: EnsembleResult, path: str | Path, mode: str = "soft") -> None:
    labels = result.labels(mode)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(ENSEMBLE_HEADER + "\n")
        for i, item_id in enumerate(result.item_ids):
            p_real, p_fake = result.soft[i]
            v_real, v_fake = result.votes[i]
            fh.write(
                f"{item_id},{fmt_float(p_real)},{fmt_float(p_fake)},"
                f"{int(v_real)},{int(v_fake)},{labels[i]}\n"
            )


def read_ensemble(path: str | Path, tie: str = "real") -> EnsembleResult:
    """Reload an ensemble CSV; both label columns are recomputed from the scores."""
    item_ids: list[str] = []
    soft_rows: list[tuple[float, float]] = []
    vote_rows: list[tuple[int, int]] = []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != ENSEMBLE_HEADER:
            raise ValueError(f"bad ensemble header {header!r}")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            item_id, p_real, p_fake, v_real, v_fake, _label = line.split(",")
            item_ids.append(item_id)
            soft_rows.append((float(p_real), float(p_fake)))
            vote_rows.append((int(v_real), int(v_fake)))
    soft = np.array(soft_rows)
    votes = np.array(vote_rows)
    labels_soft = tuple(
        ClassLabel.REAL if p[0] >= p[1] else ClassLabel.FAKE for p in soft
    )
    if tie == "real":
        hard_real = votes[:, 0] >= votes[:, 1]
    else:
        hard_real = votes[:, 0] > votes[:, 1]
    labels_hard = tuple(
        ClassLabel.REAL if flag else ClassLabel.FAKE for flag in hard_real
    )
    return EnsembleResult(
        item_ids=tuple(item_ids),
        soft=soft,
        votes=votes,
        labels_soft=labels_soft,
        labels_hard=labels_hard,
    )
