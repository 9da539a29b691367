"""Minority-class oversampling in fusion-feature space.

Plain SMOTE interpolates between a minority sample and one of its k
nearest minority neighbours.  KMeans-SMOTE first clusters the whole
feature space, keeps the clusters with enough minority presence, and
spends the generation budget proportionally to each kept cluster's
sparsity so that dense, safe regions are not flooded.

Original samples always pass through unmodified and in order; the
synthetics are appended after them.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .util import derive_seed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OversampleConfig:
    method: str = "kmeans-smote"
    k_neighbors: int = 5
    clusters: int = 8
    imbalance_ratio_threshold: float = 1.0
    density_exponent: float | None = None  # None -> feature dimensionality
    seed: int = 0

    def __post_init__(self) -> None:
        if self.method not in ("smote", "kmeans-smote"):
            raise ValueError(f"unknown method {self.method!r}")
        if self.k_neighbors < 1:
            raise ValueError("k_neighbors must be >= 1")
        if self.clusters < 1:
            raise ValueError("clusters must be >= 1")


def _class_split(labels: np.ndarray) -> tuple[int, int]:
    """Return (minority_class, majority_class); counts tie goes to the lower class id."""
    classes, counts = np.unique(labels, return_counts=True)
    if len(classes) != 2:
        raise ValueError(f"expected exactly two classes, got {classes.tolist()}")
    order = np.argsort(counts, kind="stable")
    return int(classes[order[0]]), int(classes[order[1]])


def _n_needed(labels: np.ndarray, minority: int, majority: int, target_ratio: float) -> int:
    n_min = int(np.sum(labels == minority))
    n_maj = int(np.sum(labels == majority))
    return int(round(target_ratio * n_maj)) - n_min


def _knn_indices(points: np.ndarray, k: int) -> np.ndarray:
    """Indices of each point's k nearest neighbours among ``points`` (self excluded)."""
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    return np.argsort(dist, axis=1, kind="stable")[:, :k]


def _interpolate(
    points: np.ndarray, n_new: int, k: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw n_new points on segments between minority samples and their neighbours."""
    neighbours = _knn_indices(points, k)
    base = rng.integers(0, len(points), size=n_new)
    pick = rng.integers(0, k, size=n_new)
    u = rng.random(size=n_new)
    origin = points[base]
    target = points[neighbours[base, pick]]
    return origin + u[:, None] * (target - origin)


def smote(
    features: np.ndarray,
    labels: np.ndarray,
    target_ratio: float = 1.0,
    cfg: OversampleConfig = OversampleConfig(method="smote"),
) -> tuple[np.ndarray, np.ndarray]:
    """Grow the minority class to ``target_ratio`` times the majority count.

    Every synthetic point lies on the segment between one minority
    sample and one of its ``cfg.k_neighbors`` nearest minority
    neighbours (Euclidean).  A no-op when the target is already met.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    minority, majority = _class_split(y)
    needed = _n_needed(y, minority, majority, target_ratio)
    if needed <= 0:
        return X.copy(), y.copy()
    minority_points = X[y == minority]
    if len(minority_points) < cfg.k_neighbors + 1:
        raise ValueError(
            f"minority class has {len(minority_points)} samples; "
            f"need at least k_neighbors+1 = {cfg.k_neighbors + 1}"
        )
    rng = np.random.default_rng(cfg.seed)
    synthetic = _interpolate(minority_points, needed, cfg.k_neighbors, rng)
    return (
        np.concatenate([X, synthetic]),
        np.concatenate([y, np.full(needed, minority, dtype=y.dtype)]),
    )


# --- seeded k-means -----------------------------------------------------------


def kmeans(
    X: np.ndarray, n_clusters: int, seed: int = 0, max_iter: int = 300, tol: float = 1e-8
) -> tuple[np.ndarray, np.ndarray]:
    """Lloyd's algorithm with k-means++ initialization; fully seed-deterministic.

    Returns (centroids, assignment).  An emptied cluster is re-seeded
    with the point farthest from its centroid.
    """
    X = np.asarray(X, dtype=float)
    n = len(X)
    k = min(n_clusters, n)
    rng = np.random.default_rng(seed)

    centroids = np.empty((k, X.shape[1]))
    centroids[0] = X[rng.integers(n)]
    closest_sq = ((X - centroids[0]) ** 2).sum(axis=1)
    for c in range(1, k):
        total = closest_sq.sum()
        if total <= 0.0:
            centroids[c:] = centroids[0]
            break
        probs = closest_sq / total
        centroids[c] = X[np.searchsorted(np.cumsum(probs), rng.random(), side="right").clip(0, n - 1)]
        closest_sq = np.minimum(closest_sq, ((X - centroids[c]) ** 2).sum(axis=1))

    assignment = np.zeros(n, dtype=int)
    for _ in range(max_iter):
        dist_sq = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
        assignment = dist_sq.argmin(axis=1)
        new_centroids = centroids.copy()
        for c in range(k):
            members = X[assignment == c]
            if len(members):
                new_centroids[c] = members.mean(axis=0)
            else:
                farthest = dist_sq[np.arange(n), assignment].argmax()
                new_centroids[c] = X[farthest]
        shift = float(((new_centroids - centroids) ** 2).sum())
        centroids = new_centroids
        if shift <= tol:
            break
    dist_sq = ((X[:, None, :] - centroids[None, :, :]) ** 2).sum(axis=2)
    return centroids, dist_sq.argmin(axis=1)


def _mean_pairwise_distance(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    n = len(points)
    return float(dist.sum() / (n * (n - 1)))


def _largest_remainder(weights: np.ndarray, total: int) -> np.ndarray:
    """Integer apportionment of ``total`` proportional to ``weights``."""
    if weights.sum() <= 0.0:
        weights = np.ones_like(weights)
    exact = weights / weights.sum() * total
    quotas = np.floor(exact).astype(int)
    remainder = exact - quotas
    for _ in range(total - int(quotas.sum())):
        i = int(np.argmax(remainder))
        quotas[i] += 1
        remainder[i] = -1.0
    return quotas


def kmeans_smote(
    features: np.ndarray,
    labels: np.ndarray,
    target_ratio: float = 1.0,
    cfg: OversampleConfig = OversampleConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """SMOTE restricted to clusters with sufficient minority presence.

    Clusters pass the filter when minority/(majority+1) meets the
    imbalance-ratio threshold (and hold at least two minority points so
    interpolation is possible).  Each kept cluster receives a share of
    the budget proportional to its normalized sparsity: the mean
    intra-cluster minority distance raised to the density exponent.
    Falls back to plain SMOTE, with a warning, when nothing passes.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    minority, majority = _class_split(y)
    needed = _n_needed(y, minority, majority, target_ratio)
    if needed <= 0:
        return X.copy(), y.copy()
    if int(np.sum(y == minority)) < cfg.k_neighbors + 1:
        raise ValueError(
            f"minority class has {int(np.sum(y == minority))} samples; "
            f"need at least k_neighbors+1 = {cfg.k_neighbors + 1}"
        )

    _, assignment = kmeans(X, cfg.clusters, seed=derive_seed(cfg.seed, "kmeans"))
    kept: list[np.ndarray] = []
    sparsity: list[float] = []
    exponent = cfg.density_exponent if cfg.density_exponent is not None else X.shape[1]
    for c in range(assignment.max() + 1):
        in_cluster = assignment == c
        cluster_minority = np.flatnonzero(in_cluster & (y == minority))
        n_min = len(cluster_minority)
        n_maj = int(np.sum(in_cluster)) - n_min
        if n_min / (n_maj + 1) < cfg.imbalance_ratio_threshold or n_min < 2:
            continue
        kept.append(cluster_minority)
        sparsity.append(_mean_pairwise_distance(X[cluster_minority]))

    if not kept:
        logger.warning(
            "no cluster passed the imbalance filter; falling back to plain smote"
        )
        return smote(X, y, target_ratio, cfg)

    scale = max(sparsity) or 1.0
    weights = np.array([(s / scale) ** exponent for s in sparsity])
    quotas = _largest_remainder(weights, needed)

    synthetic_blocks = []
    for block, (cluster_minority, quota) in enumerate(zip(kept, quotas)):
        if quota == 0:
            continue
        k = min(cfg.k_neighbors, len(cluster_minority) - 1)
        rng = np.random.default_rng(derive_seed(cfg.seed, "cluster", block))
        synthetic_blocks.append(_interpolate(X[cluster_minority], quota, k, rng))
    synthetic = np.concatenate(synthetic_blocks) if synthetic_blocks else np.empty((0, X.shape[1]))
    return (
        np.concatenate([X, synthetic]),
        np.concatenate([y, np.full(len(synthetic), minority, dtype=y.dtype)]),
    )


def oversample(
    features: np.ndarray,
    labels: np.ndarray,
    target_ratio: float = 1.0,
    cfg: OversampleConfig = OversampleConfig(),
) -> tuple[np.ndarray, np.ndarray]:
    """Dispatch on cfg.method."""
    if cfg.method == "smote":
        return smote(features, labels, target_ratio, cfg)
    return kmeans_smote(features, labels, target_ratio, cfg)
