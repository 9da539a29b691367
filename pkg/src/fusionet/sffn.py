"""Statistical feature fusion network with Monte Carlo dropout.

A small fully connected softmax classifier over fusion feature vectors.
Dropout stays active at inference: averaging N stochastic passes gives
the predictive mean and their population variance (divide by N, not
N-1) gives the per-class uncertainty.  All randomness is drawn from
seeds derived with :func:`fusionet.util.derive_seed`, so the triple
(model, N, base seed) fully determines every prediction regardless of
batching or scheduling.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import ClassLabel
from .stat_features import FusionFeatureVector
from .types import ProbPair
from .util import derive_seed

MODEL_FORMAT = "fusionet-sffn"
MODEL_VERSION = 1


class ModelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    weight_decay: float = 1e-4
    batch_size: int = 32
    epochs: int = 200
    dropout: float = 0.2
    seed: int = 0
    hidden: tuple[int, ...] = (32, 16)
    patience: int = 20
    optimizer: str = "adamw"
    loss: str = "cross_entropy"

    def __post_init__(self) -> None:
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr!r}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs!r}")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError(f"dropout must be in [0, 1), got {self.dropout!r}")
        if self.optimizer != "adamw":
            raise ValueError(f"unsupported optimizer tag: {self.optimizer!r}")
        if self.loss != "cross_entropy":
            raise ValueError(f"unsupported loss tag: {self.loss!r}")


@dataclass
class SffnModel:
    """Layer parameters plus the dropout rate used for training and MC inference."""

    weights: list[np.ndarray]  # per layer, shape (fan_in, fan_out)
    biases: list[np.ndarray]
    dropout: float
    schema_hash: str = ""
    seed: int = 0
    activation: str = "relu"

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_hidden(self) -> int:
        return len(self.weights) - 1


@dataclass(frozen=True)
class UncertainPrediction:
    """Predictive mean, per-class variance and the resulting label."""

    item_id: str
    v_p: ProbPair
    c_u: tuple[float, float]
    label: str
    passes: int
    samples: np.ndarray | None = None

    @property
    def scalar_uncertainty(self) -> float:
        """Single reporting number: mean of the two per-class variances."""
        return (self.c_u[0] + self.c_u[1]) / 2.0


def _relu(z: np.ndarray) -> np.ndarray:
    return np.maximum(z, 0.0)


def _softmax(z: np.ndarray) -> np.ndarray:
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _as_matrix(features: Sequence[FusionFeatureVector] | np.ndarray) -> np.ndarray:
    if isinstance(features, np.ndarray):
        X = np.asarray(features, dtype=float)
        return X[None, :] if X.ndim == 1 else X
    return np.stack([fv.to_input() for fv in features])


def _as_classes(labels: Sequence[str | int]) -> np.ndarray:
    out = []
    for lab in labels:
        out.append(lab if isinstance(lab, (int, np.integer)) else ClassLabel.to_index(lab))
    return np.asarray(out, dtype=int)


def _forward(
    model: SffnModel,
    X: np.ndarray,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Forward pass; dropout masks are drawn from rng when given and rate > 0."""
    if X.shape[-1] != model.input_dim:
        raise ValueError(
            f"input dimension {X.shape[-1]} != model input {model.input_dim}"
        )
    h = X
    keep = 1.0 - model.dropout
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        h = _relu(h @ W + b)
        if rng is not None and model.dropout > 0.0:
            mask = rng.random(h.shape) >= model.dropout
            h = h * mask / keep
    return _softmax(h @ model.weights[-1] + model.biases[-1])


def forward_deterministic(model: SffnModel, x: np.ndarray) -> ProbPair:
    """One pass with dropout disabled."""
    p = _forward(model, np.atleast_2d(np.asarray(x, dtype=float)))[0]
    return ProbPair(float(p[0]), float(p[1]))


def forward_with_mask(model: SffnModel, x: np.ndarray, mask_seed: int) -> ProbPair:
    """One stochastic pass; surviving units scaled by 1/(1-p).

    With dropout rate 0 this equals the deterministic pass for any seed.
    """
    if model.dropout == 0.0:
        return forward_deterministic(model, x)
    rng = np.random.default_rng(mask_seed)
    p = _forward(model, np.atleast_2d(np.asarray(x, dtype=float)), rng)[0]
    return ProbPair(float(p[0]), float(p[1]))


def predict_mc(
    model: SffnModel,
    x: np.ndarray,
    n_passes: int,
    base_seed: int = 0,
    item_id: str = "",
    keep_samples: bool = False,
) -> UncertainPrediction:
    """Mean and population variance over ``n_passes`` dropout-masked passes.

    Pass i uses the mask seed derived from (base_seed, i); the variance
    divides by N, so a single pass reports zero uncertainty.
    """
    if n_passes < 1:
        raise ValueError(f"n_passes must be >= 1, got {n_passes!r}")
    samples = np.empty((n_passes, 2))
    for i in range(n_passes):
        samples[i] = forward_with_mask(model, x, derive_seed(base_seed, i))
    if np.all(samples == samples[0]):
        # identical passes: the sample statistics are exact, no summation noise
        v_p, c_u = samples[0], np.zeros(2)
    else:
        v_p = samples.mean(axis=0)
        c_u = np.mean((samples - v_p) ** 2, axis=0)
    label = ClassLabel.REAL if v_p[0] >= v_p[1] else ClassLabel.FAKE
    return UncertainPrediction(
        item_id=item_id,
        v_p=ProbPair(float(v_p[0]), float(v_p[1])),
        c_u=(float(c_u[0]), float(c_u[1])),
        label=label,
        passes=n_passes,
        samples=samples if keep_samples else None,
    )


def predict_mc_batch(
    model: SffnModel,
    features: Sequence[FusionFeatureVector] | np.ndarray,
    item_ids: Sequence[str],
    n_passes: int,
    base_seed: int = 0,
) -> list[UncertainPrediction]:
    """Per-item MC prediction with seeds derived from (base_seed, item_id).

    Each item owns an independent mask stream, so results do not depend
    on batch composition or ordering.
    """
    X = _as_matrix(features)
    return [
        predict_mc(model, X[i], n_passes, derive_seed(base_seed, item_id), item_id)
        for i, item_id in enumerate(item_ids)
    ]


# --- training -------------------------------------------------------------


def _init_params(dims: list[int], rng: np.random.Generator) -> tuple[list[np.ndarray], list[np.ndarray]]:
    weights, biases = [], []
    for fan_in, fan_out in zip(dims[:-1], dims[1:]):
        weights.append(rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out)))
        biases.append(np.zeros(fan_out))
    return weights, biases


def _batch_loss_and_grads(
    model: SffnModel,
    X: np.ndarray,
    y: np.ndarray,
    rng: np.random.Generator | None,
) -> tuple[float, list[np.ndarray], list[np.ndarray]]:
    """Cross-entropy loss plus gradients for every weight and bias."""
    n = X.shape[0]
    keep = 1.0 - model.dropout
    acts = [X]
    pre = []
    masks: list[np.ndarray | None] = []
    h = X
    for W, b in zip(model.weights[:-1], model.biases[:-1]):
        z = h @ W + b
        pre.append(z)
        h = _relu(z)
        if rng is not None and model.dropout > 0.0:
            mask = rng.random(h.shape) >= model.dropout
            h = h * mask / keep
            masks.append(mask)
        else:
            masks.append(None)
        acts.append(h)
    logits = h @ model.weights[-1] + model.biases[-1]
    probs = _softmax(logits)
    clipped = np.clip(probs[np.arange(n), y], 1e-15, None)
    loss = -float(np.mean(np.log(clipped)))

    delta = probs
    delta[np.arange(n), y] -= 1.0
    delta /= n
    grads_w: list[np.ndarray] = [np.empty(0)] * len(model.weights)
    grads_b: list[np.ndarray] = [np.empty(0)] * len(model.biases)
    grads_w[-1] = acts[-1].T @ delta
    grads_b[-1] = delta.sum(axis=0)
    upstream = delta @ model.weights[-1].T
    for layer in range(model.n_hidden - 1, -1, -1):
        if masks[layer] is not None:
            upstream = upstream * masks[layer] / keep
        upstream = upstream * (pre[layer] > 0.0)
        grads_w[layer] = acts[layer].T @ upstream
        grads_b[layer] = upstream.sum(axis=0)
        if layer > 0:
            upstream = upstream @ model.weights[layer].T
    return loss, grads_w, grads_b


def _dataset_loss(model: SffnModel, X: np.ndarray, y: np.ndarray) -> float:
    probs = _forward(model, X)
    clipped = np.clip(probs[np.arange(X.shape[0]), y], 1e-15, None)
    return -float(np.mean(np.log(clipped)))


def train_sffn(
    features: Sequence[FusionFeatureVector] | np.ndarray,
    labels: Sequence[str | int],
    cfg: TrainConfig = TrainConfig(),
    val_features: Sequence[FusionFeatureVector] | np.ndarray | None = None,
    val_labels: Sequence[str | int] | None = None,
    schema_hash: str = "",
) -> SffnModel:
    """Train with minibatch AdamW and cross-entropy, dropout active.

    When a validation set is supplied, training stops once its loss has
    not improved for ``cfg.patience`` epochs and the best parameters are
    restored.  A fixed config (seed included) reproduces the parameters
    exactly.
    """
    X = _as_matrix(features)
    y = _as_classes(labels)
    if X.shape[0] != y.shape[0]:
        raise ValueError(f"{X.shape[0]} feature rows vs {y.shape[0]} labels")
    if len(np.unique(y)) < 2:
        raise ValueError("training labels must include both classes")

    rng = np.random.default_rng(cfg.seed)
    dims = [X.shape[1], *cfg.hidden, 2]
    weights, biases = _init_params(dims, rng)
    model = SffnModel(
        weights=weights,
        biases=biases,
        dropout=cfg.dropout,
        schema_hash=schema_hash,
        seed=cfg.seed,
    )

    has_val = val_features is not None and val_labels is not None
    if has_val:
        Xv = _as_matrix(val_features)
        yv = _as_classes(val_labels)
        if Xv.shape[1] != X.shape[1]:
            raise ValueError("validation feature dimension differs from training")

    params = model.weights + model.biases
    m_state = [np.zeros_like(p) for p in params]
    v_state = [np.zeros_like(p) for p in params]
    beta1, beta2, eps = 0.9, 0.999, 1e-8
    step = 0

    best_val = np.inf
    best_params: list[np.ndarray] | None = None
    stale = 0
    n = X.shape[0]
    for _ in range(cfg.epochs):
        order = rng.permutation(n)
        for start in range(0, n, cfg.batch_size):
            batch = order[start : start + cfg.batch_size]
            _, grads_w, grads_b = _batch_loss_and_grads(model, X[batch], y[batch], rng)
            grads = grads_w + grads_b
            step += 1
            for k, (p, g) in enumerate(zip(params, grads)):
                m_state[k] = beta1 * m_state[k] + (1 - beta1) * g
                v_state[k] = beta2 * v_state[k] + (1 - beta2) * g * g
                m_hat = m_state[k] / (1 - beta1**step)
                v_hat = v_state[k] / (1 - beta2**step)
                update = m_hat / (np.sqrt(v_hat) + eps)
                if k < len(model.weights):  # decoupled decay on weights only
                    update = update + cfg.weight_decay * p
                p -= cfg.lr * update
        if has_val:
            val_loss = _dataset_loss(model, Xv, yv)
            if val_loss < best_val - 1e-12:
                best_val = val_loss
                best_params = [p.copy() for p in params]
                stale = 0
            else:
                stale += 1
                if stale > cfg.patience:
                    break
    if has_val and best_params is not None:
        for p, best in zip(params, best_params):
            p[...] = best
    return model


# --- gradient verification ---------------------------------------------------


@dataclass(frozen=True)
class GradientCheckReport:
    """Relative errors between analytic and finite-difference gradients."""

    per_layer: dict[str, float] = field(default_factory=dict)

    @property
    def max_rel_error(self) -> float:
        return max(self.per_layer.values())


def gradient_check(
    model: SffnModel, x: np.ndarray, label: str | int, step: float = 1e-4
) -> GradientCheckReport:
    """Compare backprop gradients against central finite differences.

    Dropout is disabled for the check.  The relative error for one
    parameter is |analytic - numeric| / max(1e-6, |analytic|, |numeric|),
    reported per layer; the global maximum is their maximum.
    """
    X = np.atleast_2d(np.asarray(x, dtype=float))
    y = _as_classes([label])
    probe = SffnModel(
        weights=[w.copy() for w in model.weights],
        biases=[b.copy() for b in model.biases],
        dropout=0.0,
        schema_hash=model.schema_hash,
        seed=model.seed,
    )
    _, grads_w, grads_b = _batch_loss_and_grads(probe, X, y, rng=None)

    def loss() -> float:
        return _dataset_loss(probe, X, y)

    per_layer: dict[str, float] = {}
    names = [f"layer{i}" if i < probe.n_hidden else "out" for i in range(len(probe.weights))]
    for name, param, grad in zip(
        [f"{n}.W" for n in names] + [f"{n}.b" for n in names],
        probe.weights + probe.biases,
        grads_w + grads_b,
    ):
        worst = 0.0
        flat = param.reshape(-1)
        gflat = grad.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + step
            up = loss()
            flat[k] = orig - step
            down = loss()
            flat[k] = orig
            numeric = (up - down) / (2 * step)
            denom = max(1e-6, abs(gflat[k]), abs(numeric))
            worst = max(worst, abs(gflat[k] - numeric) / denom)
        per_layer[name] = worst
    return GradientCheckReport(per_layer=per_layer)


# --- model file IO ------------------------------------------------------------


def save_model(model: SffnModel, path: str | Path) -> None:
    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "schema_hash": model.schema_hash,
        "dropout": model.dropout,
        "seed": model.seed,
        "activation": model.activation,
        "layer_sizes": model.layer_sizes,
        "layers": [
            {"w": w.tolist(), "b": b.tolist()}
            for w, b in zip(model.weights, model.biases)
        ],
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, ensure_ascii=False, sort_keys=True)
        fh.write("\n")


def load_model(path: str | Path, expected_schema_hash: str | None = None) -> SffnModel:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"not a {MODEL_FORMAT} file: {path}")
    if payload.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {payload.get('version')!r}, "
            f"expected {MODEL_VERSION}"
        )
    if expected_schema_hash is not None and payload["schema_hash"] != expected_schema_hash:
        raise ModelFormatError(
            f"feature schema hash mismatch: expected {expected_schema_hash!r}, "
            f"found {payload['schema_hash']!r}"
        )
    model = SffnModel(
        weights=[np.array(layer["w"], dtype=float) for layer in payload["layers"]],
        biases=[np.array(layer["b"], dtype=float) for layer in payload["layers"]],
        dropout=float(payload["dropout"]),
        schema_hash=payload["schema_hash"],
        seed=int(payload["seed"]),
        activation=payload["activation"],
    )
    if model.layer_sizes != payload["layer_sizes"]:
        raise ModelFormatError("declared layer sizes disagree with stored matrices")
    return model
