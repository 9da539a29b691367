"""Tests for SMOTE, the seeded k-means and KMeans-SMOTE."""

import numpy as np
import pytest

from fusionet.oversample import (
    OversampleConfig,
    kmeans,
    kmeans_smote,
    oversample,
    smote,
)


def imbalanced_blobs(n_min=25, n_maj=75, seed=0, spread=0.5):
    """One minority blob at the origin, one majority blob at (6, 6)."""
    rng = np.random.default_rng(seed)
    X_min = rng.normal(0.0, spread, size=(n_min, 2))
    X_maj = rng.normal(6.0, spread, size=(n_maj, 2))
    X = np.concatenate([X_min, X_maj])
    y = np.array([1] * n_min + [0] * n_maj)
    return X, y


def convex_residual(point, minority):
    """Smallest residual of expressing a point as a segment between two minority rows."""
    best = np.inf
    for i in range(len(minority)):
        d = minority - minority[i]
        norms = (d**2).sum(axis=1)
        with np.errstate(invalid="ignore", divide="ignore"):
            u = (d @ (point - minority[i])) / norms
        u = np.clip(np.nan_to_num(u), 0.0, 1.0)
        residuals = np.abs(minority[i] + u[:, None] * d - point).max(axis=1)
        best = min(best, residuals.min())
    return best


class TestSmote:
    def test_two_minority_points_interpolate_on_segment(self):
        A, B = np.array([0.0, 0.0]), np.array([2.0, 1.0])
        X = np.array([A, B, [9.0, 9.0], [9.5, 9.0], [9.0, 9.5], [9.5, 9.5]])
        y = np.array([1, 1, 0, 0, 0, 0])
        X_aug, y_aug = smote(X, y, 1.0, OversampleConfig(method="smote", k_neighbors=1, seed=7))
        for point in X_aug[len(X):]:
            # on segment AB: point = A + u (B - A) with consistent u
            u = (point - A) / (B - A)
            assert u[0] == pytest.approx(u[1], abs=1e-9)
            assert -1e-9 <= u[0] <= 1 + 1e-9

    def test_balanced_input_is_noop(self):
        X = np.arange(20, dtype=float).reshape(10, 2)
        y = np.array([0, 1] * 5)
        X_aug, y_aug = smote(X, y, 1.0, OversampleConfig(method="smote", k_neighbors=2))
        assert np.array_equal(X_aug, X) and np.array_equal(y_aug, y)

    def test_75_25_reaches_balance(self):
        X, y = imbalanced_blobs()
        X_aug, y_aug = smote(X, y, 1.0, OversampleConfig(method="smote"))
        assert (y_aug == 1).sum() == (y_aug == 0).sum()

    def test_count_contract_fractional_target(self):
        X, y = imbalanced_blobs()
        X_aug, y_aug = smote(X, y, 0.6, OversampleConfig(method="smote"))
        assert abs((y_aug == 1).sum() - 0.6 * (y_aug == 0).sum()) <= 1.0

    def test_originals_pass_through_in_order(self):
        X, y = imbalanced_blobs()
        X_aug, y_aug = smote(X, y, 1.0, OversampleConfig(method="smote"))
        assert np.array_equal(X_aug[: len(X)], X)
        assert np.array_equal(y_aug[: len(y)], y)

    def test_only_minority_synthesized(self):
        X, y = imbalanced_blobs()
        _, y_aug = smote(X, y, 1.0, OversampleConfig(method="smote"))
        assert set(y_aug[len(y):]) == {1}

    def test_containment(self):
        X, y = imbalanced_blobs()
        X_aug, _ = smote(X, y, 1.0, OversampleConfig(method="smote"))
        minority = X[y == 1]
        for point in X_aug[len(X):]:
            assert convex_residual(point, minority) < 1e-9

    def test_minority_too_small(self):
        X = np.arange(12, dtype=float).reshape(6, 2)
        y = np.array([1, 1, 0, 0, 0, 0])
        with pytest.raises(ValueError, match="k_neighbors"):
            smote(X, y, 1.0, OversampleConfig(method="smote", k_neighbors=5))

    def test_deterministic(self):
        X, y = imbalanced_blobs()
        cfg = OversampleConfig(method="smote", seed=13)
        a = smote(X, y, 1.0, cfg)
        b = smote(X, y, 1.0, cfg)
        assert np.array_equal(a[0], b[0])


class TestKmeans:
    def test_separates_two_blobs(self):
        X, y = imbalanced_blobs()
        _, assignment = kmeans(X, 2, seed=1)
        # blob memberships agree with cluster memberships (up to relabeling)
        first, second = assignment[y == 1], assignment[y == 0]
        assert len(set(first.tolist())) == 1
        assert len(set(second.tolist())) == 1
        assert first[0] != second[0]

    def test_deterministic(self):
        X, _ = imbalanced_blobs(seed=5)
        a = kmeans(X, 4, seed=9)
        b = kmeans(X, 4, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_more_clusters_than_points(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0]])
        centroids, assignment = kmeans(X, 8, seed=0)
        assert len(centroids) == 2 and len(set(assignment.tolist())) == 2


class TestKmeansSmote:
    def test_single_cluster_degenerates_to_plain_interpolation(self):
        X, y = imbalanced_blobs()
        cfg = OversampleConfig(clusters=1, seed=3, imbalance_ratio_threshold=0.0)
        X_aug, y_aug = kmeans_smote(X, y, 1.0, cfg)
        minority = X[y == 1]
        assert (y_aug == 1).sum() == (y_aug == 0).sum()
        for point in X_aug[len(X):]:
            assert convex_residual(point, minority) < 1e-9

    def test_separated_minority_blobs_never_bridged(self):
        rng = np.random.default_rng(11)
        blob_a = rng.normal(0.0, 0.4, size=(12, 2))
        blob_b = rng.normal(10.0, 0.4, size=(12, 2))
        majority = rng.normal((5.0, -5.0), 0.4, size=(60, 2))
        X = np.concatenate([blob_a, blob_b, majority])
        y = np.array([1] * 24 + [0] * 60)
        cfg = OversampleConfig(clusters=3, seed=2)
        X_aug, _ = kmeans_smote(X, y, 1.0, cfg)
        for point in X_aug[len(X):]:
            near_a = np.linalg.norm(point - [0.0, 0.0]) < 2.5
            near_b = np.linalg.norm(point - [10.0, 10.0]) < 2.5
            assert near_a or near_b

    def test_deterministic(self):
        X, y = imbalanced_blobs()
        cfg = OversampleConfig(seed=21, clusters=4, imbalance_ratio_threshold=0.5)
        a = kmeans_smote(X, y, 1.0, cfg)
        b = kmeans_smote(X, y, 1.0, cfg)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_fallback_when_filter_rejects_everything(self, caplog):
        X, y = imbalanced_blobs()
        cfg = OversampleConfig(clusters=2, seed=1, imbalance_ratio_threshold=1e9)
        with caplog.at_level("WARNING"):
            X_aug, y_aug = kmeans_smote(X, y, 1.0, cfg)
        assert "falling back" in caplog.text
        assert (y_aug == 1).sum() == (y_aug == 0).sum()

    def test_count_contract(self):
        X, y = imbalanced_blobs(n_min=20, n_maj=61)
        cfg = OversampleConfig(clusters=3, seed=5, imbalance_ratio_threshold=0.1)
        _, y_aug = kmeans_smote(X, y, 1.0, cfg)
        assert abs((y_aug == 1).sum() - (y_aug == 0).sum()) <= 1

    def test_noop_when_target_met(self):
        X, y = imbalanced_blobs(n_min=30, n_maj=30)
        X_aug, y_aug = kmeans_smote(X, y, 1.0, OversampleConfig())
        assert np.array_equal(X_aug, X) and np.array_equal(y_aug, y)


class TestDispatch:
    def test_method_dispatch(self):
        X, y = imbalanced_blobs()
        for method in ("smote", "kmeans-smote"):
            cfg = OversampleConfig(method=method, seed=1, imbalance_ratio_threshold=0.1)
            _, y_aug = oversample(X, y, 1.0, cfg)
            assert (y_aug == 1).sum() == (y_aug == 0).sum()

    def test_config_validation(self):
        with pytest.raises(ValueError):
            OversampleConfig(method="adasyn")
        with pytest.raises(ValueError):
            OversampleConfig(k_neighbors=0)
        with pytest.raises(ValueError):
            OversampleConfig(clusters=0)
