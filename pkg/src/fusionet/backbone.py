"""Native stand-in backbone: bag-of-words logistic classifier + prediction files.

The pipeline consumes per-model class probabilities through one wire
format (``predictions.csv``), so any external classifier can replace the
built-in model by emitting the same file.  The built-in model exists so
the whole pipeline runs end-to-end with no ML framework installed.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .corpus import ClassLabel, Dataset
from .types import ProbPair

PREDICTIONS_HEADER = "item_id,model_name,p_real,p_fake"
_ROW_SUM_TOL = 1e-4
_PAIR_TOL = 1e-6

_TOKEN_RE = re.compile(r"[a-z0-9']+")


@dataclass(frozen=True)
class PredictionMatrix:
    """Per-item class probabilities from an ordered set of models."""

    model_names: tuple[str, ...]
    item_ids: tuple[str, ...]
    probs: np.ndarray  # (n_items, n_models, 2), columns (p_real, p_fake)

    def __post_init__(self) -> None:
        if len(self.model_names) == 0:
            raise ValueError("prediction matrix needs at least one model")
        expected = (len(self.item_ids), len(self.model_names), 2)
        if self.probs.shape != expected:
            raise ValueError(f"probs shape {self.probs.shape} != {expected}")

    @property
    def n_models(self) -> int:
        return len(self.model_names)

    def pair(self, item_index: int, model_index: int) -> ProbPair:
        p = self.probs[item_index, model_index]
        return ProbPair(float(p[0]), float(p[1]))

    def subset(self, ids: Iterable[str]) -> "PredictionMatrix":
        """Rows for the given ids, in the given order."""
        index = {item_id: i for i, item_id in enumerate(self.item_ids)}
        wanted = list(ids)
        missing = [i for i in wanted if i not in index]
        if missing:
            raise KeyError(f"items missing from predictions: {missing[:5]}")
        rows = np.array([index[i] for i in wanted], dtype=int)
        return PredictionMatrix(
            model_names=self.model_names,
            item_ids=tuple(wanted),
            probs=self.probs[rows],
        )


@dataclass(frozen=True)
class BowModel:
    """Unigram logistic model over sublinearly scaled token counts."""

    vocabulary: dict[str, int]
    weights: np.ndarray  # (V,)
    bias: float
    name: str = "bow"

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.weights)) or not math.isfinite(self.bias):
            raise ValueError("model parameters must be finite")
        if sorted(self.vocabulary.values()) != list(range(len(self.vocabulary))):
            raise ValueError("vocabulary indices must be dense 0..V-1")


@dataclass(frozen=True)
class BowConfig:
    min_token_freq: int = 1
    l2: float = 1e-4
    epochs: int = 300
    lr: float = 0.1
    seed: int = 0
    name: str = "bow"


def _tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def _featurize(texts: list[str], vocabulary: dict[str, int]) -> np.ndarray:
    """Sublinear (1 + log) unigram counts; out-of-vocabulary tokens ignored."""
    X = np.zeros((len(texts), len(vocabulary)))
    for row, text in enumerate(texts):
        counts: dict[int, int] = {}
        for tok in _tokenize(text):
            idx = vocabulary.get(tok)
            if idx is not None:
                counts[idx] = counts.get(idx, 0) + 1
        for idx, c in counts.items():
            X[row, idx] = 1.0 + math.log(c)
    return X


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def train_bow(train: Dataset, config: BowConfig = BowConfig()) -> BowModel:
    """Fit the logistic model by full-batch gradient descent.

    Full-batch updates on the convex (cross-entropy + L2) objective keep
    the training loss non-increasing at the default learning rate, and a
    fixed seed reproduces the weights exactly.
    """
    labeled = [item for item in train if item.label is not None]
    y = np.array([ClassLabel.to_index(item.label) for item in labeled], dtype=float)
    if len(labeled) < 2 or len(set(y.tolist())) < 2:
        raise ValueError("training set must contain at least one item of each class")

    freq: dict[str, int] = {}
    for item in labeled:
        for tok in _tokenize(item.text):
            freq[tok] = freq.get(tok, 0) + 1
    vocabulary = {tok: i for i, tok in enumerate(sorted(t for t, c in freq.items() if c >= config.min_token_freq))}

    X = _featurize([item.text for item in labeled], vocabulary)
    rng = np.random.default_rng(config.seed)
    w = rng.normal(0.0, 0.01, size=len(vocabulary))
    b = 0.0
    n = len(labeled)
    for _ in range(config.epochs):
        p = _sigmoid(X @ w + b)
        grad_w = X.T @ (p - y) / n + config.l2 * w
        grad_b = float(np.mean(p - y))
        w -= config.lr * grad_w
        b -= config.lr * grad_b
    return BowModel(vocabulary=vocabulary, weights=w, bias=b, name=config.name)


def bow_loss(model: BowModel, items: Dataset, l2: float = 0.0) -> float:
    """Cross-entropy + L2 objective the trainer minimizes, for monitoring."""
    labeled = [item for item in items if item.label is not None]
    y = np.array([ClassLabel.to_index(item.label) for item in labeled], dtype=float)
    X = _featurize([item.text for item in labeled], model.vocabulary)
    p = np.clip(_sigmoid(X @ model.weights + model.bias), 1e-12, 1 - 1e-12)
    ce = -float(np.mean(y * np.log(p) + (1 - y) * np.log(1 - p)))
    return ce + 0.5 * l2 * float(np.sum(model.weights**2))


def predict_bow(model: BowModel, items: Dataset) -> PredictionMatrix:
    """Single-column prediction matrix; a pure function of (model, text)."""
    X = _featurize([item.text for item in items], model.vocabulary)
    p_fake = _sigmoid(X @ model.weights + model.bias)
    probs = np.stack([1.0 - p_fake, p_fake], axis=1)[:, None, :]
    return PredictionMatrix(
        model_names=(model.name,),
        item_ids=items.ids(),
        probs=probs,
    )


# --- prediction file IO -------------------------------------------------------


class PredictionFileError(ValueError):
    """Raised when a predictions.csv file violates the wire format."""


def write_predictions(matrix: PredictionMatrix, path: str | Path) -> None:
    """Long-format CSV, one row per item x model, probabilities at 9 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(PREDICTIONS_HEADER + "\n")
        for i, item_id in enumerate(matrix.item_ids):
            for j, model_name in enumerate(matrix.model_names):
                p_real, p_fake = matrix.probs[i, j]
                fh.write(f"{item_id},{model_name},{p_real:.9g},{p_fake:.9g}\n")


def read_predictions(path: str | Path) -> PredictionMatrix:
    """Parse and validate a predictions.csv file.

    Every item must carry exactly one row per model and every row's
    probabilities must sum to 1 within 1e-4.  Rows that pass the file
    check but miss the in-memory pair tolerance (1e-6) are renormalized;
    rows already inside it are kept verbatim so that a file written by
    :func:`write_predictions` reads back bit-exactly.
    """
    model_names: list[str] = []
    item_ids: list[str] = []
    rows: dict[str, dict[str, tuple[float, float]]] = {}
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != PREDICTIONS_HEADER:
            raise PredictionFileError(f"bad header {header!r}, expected {PREDICTIONS_HEADER!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 4:
                raise PredictionFileError(f"line {lineno}: expected 4 fields, got {len(parts)}")
            item_id, model_name, p_real_s, p_fake_s = parts
            try:
                p_real, p_fake = float(p_real_s), float(p_fake_s)
            except ValueError:
                raise PredictionFileError(f"line {lineno}: non-numeric probability") from None
            if not (0.0 <= p_real <= 1.0 and 0.0 <= p_fake <= 1.0):
                raise PredictionFileError(
                    f"line {lineno} ({item_id},{model_name}): probabilities outside [0, 1]"
                )
            total = p_real + p_fake
            if abs(total - 1.0) > _ROW_SUM_TOL:
                raise PredictionFileError(
                    f"line {lineno} ({item_id},{model_name}): probabilities sum to {total!r}"
                )
            if abs(total - 1.0) > _PAIR_TOL:
                p_real, p_fake = p_real / total, p_fake / total
            if model_name not in model_names:
                model_names.append(model_name)
            if item_id not in rows:
                rows[item_id] = {}
                item_ids.append(item_id)
            if model_name in rows[item_id]:
                raise PredictionFileError(
                    f"line {lineno}: duplicate row for ({item_id}, {model_name})"
                )
            rows[item_id][model_name] = (p_real, p_fake)

    if not item_ids:
        raise PredictionFileError("predictions file contains no rows")
    probs = np.zeros((len(item_ids), len(model_names), 2))
    for i, item_id in enumerate(item_ids):
        for j, model_name in enumerate(model_names):
            if model_name not in rows[item_id]:
                raise PredictionFileError(
                    f"item {item_id!r} has no row for model {model_name!r}"
                )
            probs[i, j] = rows[item_id][model_name]
    return PredictionMatrix(
        model_names=tuple(model_names), item_ids=tuple(item_ids), probs=probs
    )


# --- model file IO ------------------------------------------------------------


def save_bow(model: BowModel, path: str | Path) -> None:
    import json

    tokens = sorted(model.vocabulary, key=model.vocabulary.get)  # type: ignore[arg-type]
    payload = {
        "format": "fusionet-bow",
        "version": 1,
        "name": model.name,
        "tokens": tokens,
        "weights": [float(w) for w in model.weights],
        "bias": float(model.bias),
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_bow(path: str | Path) -> BowModel:
    import json

    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != "fusionet-bow" or payload.get("version") != 1:
        raise ValueError(f"unsupported bow model file: {path}")
    return BowModel(
        vocabulary={tok: i for i, tok in enumerate(payload["tokens"])},
        weights=np.array(payload["weights"], dtype=float),
        bias=float(payload["bias"]),
        name=payload["name"],
    )
