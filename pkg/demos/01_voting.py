"""Walkthrough: soft and hard voting over per-model class probabilities.

Five imaginary backbone models score three items; soft voting averages
the probability vectors, hard voting counts argmax votes.  Run with:

    python3 demos/01_voting.py
"""

import numpy as np

from fusionet.backbone import PredictionMatrix
from fusionet.ensemble import hard_vote, soft_vote

# p_real per (item, model); p_fake is the complement
p_real = np.array(
    [
        [0.92, 0.88, 0.95, 0.81, 0.90],  # clearly real
        [0.10, 0.35, 0.48, 0.22, 0.55],  # mostly fake, one dissenter
        [0.49, 0.51, 0.50, 0.52, 0.47],  # borderline
    ]
)
matrix = PredictionMatrix(
    model_names=("alpha", "beta", "gamma", "delta", "epsilon"),
    item_ids=("item-1", "item-2", "item-3"),
    probs=np.stack([p_real, 1.0 - p_real], axis=2),
)

result = soft_vote(matrix)
print("item      soft (p_real, p_fake)   votes (real, fake)   soft label  hard label")
for i, item_id in enumerate(matrix.item_ids):
    print(
        f"{item_id}   ({result.soft[i, 0]:.3f}, {result.soft[i, 1]:.3f})"
        f"          {tuple(int(v) for v in result.votes[i])}"
        f"               {result.labels_soft[i]:5s}      {result.labels_hard[i]}"
    )

# a model whose two probabilities tie votes "real"; the ensemble-level
# tie (possible with an even model count) is configurable
tied = PredictionMatrix(
    model_names=("a", "b"),
    item_ids=("split-vote",),
    probs=np.array([[[0.9, 0.1], [0.2, 0.8]]]),
)
print("\neven ensemble, split 1-1 vote:")
print("  tie=real ->", hard_vote(tied, tie="real").labels_hard[0])
print("  tie=fake ->", hard_vote(tied, tie="fake").labels_hard[0])
