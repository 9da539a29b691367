"""Walkthrough: SMOTE vs KMeans-SMOTE on an imbalanced feature set.

Plain SMOTE interpolates between any minority neighbours, so two
separate minority regions can be bridged by unrealistic points.
KMeans-SMOTE clusters first and only interpolates inside clusters with
enough minority presence.  Run with:

    python3 demos/04_oversampling.py
"""

import numpy as np

from fusionet.oversample import OversampleConfig, kmeans_smote, smote

rng = np.random.default_rng(4)
# blobs of 4: with k_neighbors=5 every minority point has cross-blob neighbours
blob_a = rng.normal((0.0, 0.0), 0.4, size=(4, 2))
blob_b = rng.normal((8.0, 8.0), 0.4, size=(4, 2))
majority = rng.normal((4.0, -4.0), 1.0, size=(40, 2))
X = np.concatenate([blob_a, blob_b, majority])
y = np.array([1] * 8 + [0] * 40)
print(f"before: minority={int((y == 1).sum())} majority={int((y == 0).sum())}")


def bridged(points):
    """Synthetic points falling between the two minority blobs."""
    return sum(
        1
        for p in points
        if np.linalg.norm(p - [0, 0]) > 2.5 and np.linalg.norm(p - [8, 8]) > 2.5
    )


X_plain, y_plain = smote(X, y, 1.0, OversampleConfig(method="smote", seed=9))
synth = X_plain[len(X):]
print(f"\nplain smote:  +{len(synth)} synthetics, {bridged(synth)} landed between the blobs")

cfg = OversampleConfig(method="kmeans-smote", clusters=4, seed=9, imbalance_ratio_threshold=0.5)
X_km, y_km = kmeans_smote(X, y, 1.0, cfg)
synth = X_km[len(X):]
print(f"kmeans-smote: +{len(synth)} synthetics, {bridged(synth)} landed between the blobs")

print(f"\nafter kmeans-smote: minority={int((y_km == 1).sum())} majority={int((y_km == 0).sum())}")
print("original rows pass through unchanged:", bool(np.array_equal(X_km[: len(X)], X)))
