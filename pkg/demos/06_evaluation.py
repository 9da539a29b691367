"""Walkthrough: label metrics, probability scores and McNemar's test.

Run with:

    python3 demos/06_evaluation.py
"""

import numpy as np

from fusionet.evalkit import brier, classification_metrics, mcnemar, nll

rng = np.random.default_rng(6)
n = 400
gold = ["real" if v else "fake" for v in rng.random(n) < 0.5]

# classifier A: 90% accurate; classifier B: 78% accurate
def noisy_copy(labels, accuracy):
    flip = rng.random(len(labels)) > accuracy
    return [
        ("fake" if lab == "real" else "real") if f else lab
        for lab, f in zip(labels, flip)
    ]

pred_a = noisy_copy(gold, 0.90)
pred_b = noisy_copy(gold, 0.78)

for name, pred in (("A", pred_a), ("B", pred_b)):
    report = classification_metrics(pred, gold, "weighted")
    print(f"classifier {name}: accuracy={report.accuracy:.3f} "
          f"precision={report.precision:.3f} recall={report.recall:.3f} f1={report.f1:.3f}")

# probability scoring: sharper correct probabilities score lower
probs_sharp = [(0.05, 0.95) if g == "fake" else (0.95, 0.05) for g in gold]
probs_hedged = [(0.35, 0.65) if g == "fake" else (0.65, 0.35) for g in gold]
print(f"\nsharp probabilities : NLL={nll(probs_sharp, gold):.4f}  Brier={brier(probs_sharp, gold):.4f}")
print(f"hedged probabilities: NLL={nll(probs_hedged, gold):.4f}  Brier={brier(probs_hedged, gold):.4f}")
print(f"coin-flip reference : NLL={nll([(0.5, 0.5)] * n, gold):.4f}  Brier={brier([(0.5, 0.5)] * n, gold):.4f}")

# is A's error rate really different from B's?  test the discordant items
result = mcnemar(pred_a, pred_b, gold, alpha=0.05, mode="exact")
print(f"\nMcNemar exact: b={result.b} c={result.c} statistic={result.statistic:.0f} "
      f"p={result.p_value:.2e} reject={result.reject_at_alpha}")
result = mcnemar(pred_a, pred_b, gold, alpha=0.05, mode="chi2-corrected")
print(f"McNemar chi2 : statistic={result.statistic:.2f} p={result.p_value:.2e} "
      f"reject={result.reject_at_alpha}")
