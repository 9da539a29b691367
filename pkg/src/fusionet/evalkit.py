"""Classification metrics, probability scoring rules and paired significance tests.

Label metrics default to weighted averaging (per-class scores weighted
by gold support), under which recall equals accuracy by construction.
The probability scores (negative log-likelihood and Brier) are computed
on the fake-class probability with fake encoded as 1.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import ClassLabel
from .types import ProbPair

CLASSES = (ClassLabel.REAL, ClassLabel.FAKE)
PROB_CLIP = 1e-15
_METRIC_ORDER = ("accuracy", "precision", "recall", "f1", "nll", "brier", "n_items")


@dataclass(frozen=True)
class ClassScores:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricsReport:
    accuracy: float
    precision: float
    recall: float
    f1: float
    averaging: str
    n_items: int
    per_class: Mapping[str, ClassScores] = field(default_factory=dict)
    nll: float | None = None
    brier: float | None = None

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "averaging": self.averaging,
            "n_items": self.n_items,
            "nll": self.nll,
            "brier": self.brier,
            "per_class": {
                name: {
                    "precision": cs.precision,
                    "recall": cs.recall,
                    "f1": cs.f1,
                    "support": cs.support,
                }
                for name, cs in self.per_class.items()
            },
        }

    @staticmethod
    def from_dict(payload: Mapping) -> "MetricsReport":
        return MetricsReport(
            accuracy=payload["accuracy"],
            precision=payload["precision"],
            recall=payload["recall"],
            f1=payload["f1"],
            averaging=payload["averaging"],
            n_items=payload["n_items"],
            nll=payload.get("nll"),
            brier=payload.get("brier"),
            per_class={
                name: ClassScores(**scores)
                for name, scores in payload.get("per_class", {}).items()
            },
        )


def classification_metrics(
    pred: Sequence[str], gold: Sequence[str], averaging: str = "weighted"
) -> MetricsReport:
    """Accuracy plus averaged precision/recall/F1 over the two classes.

    A class that is never predicted has undefined precision; it
    contributes 0 and triggers a warning, mirroring the usual
    zero-division convention.
    """
    if averaging not in ("weighted", "macro", "micro"):
        raise ValueError(f"averaging must be weighted|macro|micro, got {averaging!r}")
    if len(pred) != len(gold):
        raise ValueError(f"{len(pred)} predictions vs {len(gold)} gold labels")
    if not pred:
        raise ValueError("cannot score an empty prediction list")
    for label in (*pred, *gold):
        ClassLabel.to_index(label)

    n = len(gold)
    correct = sum(p == g for p, g in zip(pred, gold))
    accuracy = correct / n

    per_class: dict[str, ClassScores] = {}
    for cls in CLASSES:
        tp = sum(p == cls and g == cls for p, g in zip(pred, gold))
        fp = sum(p == cls and g != cls for p, g in zip(pred, gold))
        fn = sum(p != cls and g == cls for p, g in zip(pred, gold))
        support = tp + fn
        if tp + fp == 0:
            warnings.warn(
                f"class {cls!r} never predicted; precision set to 0", stacklevel=2
            )
            precision = 0.0
        else:
            precision = tp / (tp + fp)
        recall = tp / support if support else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        per_class[cls] = ClassScores(precision, recall, f1, support)

    if averaging == "micro":
        precision = recall = f1 = accuracy
    elif averaging == "macro":
        precision = sum(cs.precision for cs in per_class.values()) / len(CLASSES)
        recall = sum(cs.recall for cs in per_class.values()) / len(CLASSES)
        f1 = sum(cs.f1 for cs in per_class.values()) / len(CLASSES)
    else:
        precision = sum(cs.precision * cs.support for cs in per_class.values()) / n
        recall = sum(cs.recall * cs.support for cs in per_class.values()) / n
        f1 = sum(cs.f1 * cs.support for cs in per_class.values()) / n

    return MetricsReport(
        accuracy=accuracy,
        precision=precision,
        recall=recall,
        f1=f1,
        averaging=averaging,
        n_items=n,
        per_class=per_class,
    )


def _fake_probs_and_outcomes(
    probs: Sequence[ProbPair | tuple[float, float]], gold: Sequence[str]
) -> tuple[list[float], list[int]]:
    if len(probs) != len(gold):
        raise ValueError(f"{len(probs)} probability pairs vs {len(gold)} gold labels")
    p_fake = [float(p[1]) for p in probs]
    y = [ClassLabel.to_index(g) for g in gold]
    return p_fake, y


def nll(probs: Sequence[ProbPair | tuple[float, float]], gold: Sequence[str]) -> float:
    """Mean negative log-likelihood of the fake-class probability.

    Probabilities are clipped to [1e-15, 1 - 1e-15], so perfect
    predictions score -log(1 - 1e-15) rather than an infinite value.
    """
    p_fake, y = _fake_probs_and_outcomes(probs, gold)
    total = 0.0
    for p, outcome in zip(p_fake, y):
        p = min(max(p, PROB_CLIP), 1.0 - PROB_CLIP)
        total += -(outcome * math.log(p) + (1 - outcome) * math.log(1.0 - p))
    return total / len(y)


def brier(probs: Sequence[ProbPair | tuple[float, float]], gold: Sequence[str]) -> float:
    """Mean squared error between the fake-class probability and the 0/1 outcome."""
    p_fake, y = _fake_probs_and_outcomes(probs, gold)
    return sum((p - outcome) ** 2 for p, outcome in zip(p_fake, y)) / len(y)


# --- McNemar's test -----------------------------------------------------------


@dataclass(frozen=True)
class McNemarResult:
    b: int  # A right, B wrong
    c: int  # A wrong, B right
    statistic: float
    p_value: float
    reject_at_alpha: bool
    alpha: float
    mode: str
    degenerate: bool = False


def _binom_tail_le(m: int, n: int) -> float:
    """P(X <= m) for X ~ Binomial(n, 1/2), exact up to one float rounding."""
    tail = sum(math.comb(n, k) for k in range(m + 1))
    return float(Fraction(tail, 2**n))


def mcnemar(
    pred_a: Sequence[str],
    pred_b: Sequence[str],
    gold: Sequence[str],
    alpha: float = 0.05,
    mode: str = "exact",
) -> McNemarResult:
    """Paired test on the discordant predictions of two classifiers.

    Exact mode: statistic min(b, c), two-sided binomial tail doubled and
    capped at 1.  Chi-square mode: continuity-corrected statistic
    (|b-c|-1)^2/(b+c) against chi-square with one degree of freedom.
    When the classifiers never disagree the test is degenerate and the
    p-value is 1.
    """
    if mode not in ("exact", "chi2-corrected"):
        raise ValueError(f"mode must be exact|chi2-corrected, got {mode!r}")
    if not (len(pred_a) == len(pred_b) == len(gold)):
        raise ValueError("pred_a, pred_b and gold must have equal lengths")

    b = sum(pa == g and pb != g for pa, pb, g in zip(pred_a, pred_b, gold))
    c = sum(pa != g and pb == g for pa, pb, g in zip(pred_a, pred_b, gold))

    if b + c == 0:
        return McNemarResult(b, c, 0.0, 1.0, False, alpha, mode, degenerate=True)

    if mode == "exact":
        statistic = float(min(b, c))
        p_value = min(1.0, 2.0 * _binom_tail_le(min(b, c), b + c))
    else:
        statistic = (abs(b - c) - 1) ** 2 / (b + c)
        p_value = math.erfc(math.sqrt(statistic / 2.0))
    return McNemarResult(b, c, statistic, p_value, p_value < alpha, alpha, mode)


# --- report emission ------------------------------------------------------------


def emit_report(
    reports: Mapping[str, MetricsReport], fmt: str, path: str | Path
) -> None:
    """Write reports keyed by split (or split/system) to one file.

    Formats: "json" (round-trips through MetricsReport.from_dict),
    "csv" with the fixed header split,metric,value, or "text".  The
    same reports always produce byte-identical files.
    """
    if fmt == "json":
        payload = {key: report.to_dict() for key, report in sorted(reports.items())}
        content = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif fmt == "csv":
        lines = ["split,metric,value"]
        for key in sorted(reports):
            report = reports[key].to_dict()
            for metric in _METRIC_ORDER:
                value = report[metric]
                lines.append(f"{key},{metric},{'' if value is None else repr(value)}")
        content = "\n".join(lines) + "\n"
    elif fmt == "text":
        width = max((len(k) for k in reports), default=5)
        lines = [f"{'split'.ljust(width)}  accuracy  precision  recall    f1        nll       brier"]
        for key in sorted(reports):
            r = reports[key]
            cells = [f"{r.accuracy:<8.4f}", f"{r.precision:<9.4f}", f"{r.recall:<8.4f}", f"{r.f1:<8.4f}"]
            cells.append("-        " if r.nll is None else f"{r.nll:<9.4f}")
            cells.append("-" if r.brier is None else f"{r.brier:<.4f}")
            lines.append(f"{key.ljust(width)}  " + "  ".join(cells))
        content = "\n".join(lines) + "\n"
    else:
        raise ValueError(f"format must be text|json|csv, got {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(content)
