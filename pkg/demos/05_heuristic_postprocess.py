"""Walkthrough: the attribute-override cascade and elbow threshold pick.

A confident attribute statistic can overturn the model's label; the
cascade walks attribute kinds in priority order and falls back to the
model when nothing fires.  Run with:

    python3 demos/05_heuristic_postprocess.py
"""

from fusionet.heuristic import (
    HeuristicConfig,
    ItemEvidence,
    apply_heuristic,
    select_threshold_elbow,
)
from fusionet.types import ProbPair

cfg = HeuristicConfig(priority=("domain", "username"), threshold=0.88)

cases = [
    ("model wrong, trusted domain", {"domain": ProbPair(1.0, 0.0)}, ProbPair(0.2, 0.8)),
    ("no attributes at all", {}, ProbPair(0.3, 0.7)),
    ("domain weak, username damning",
     {"domain": ProbPair(0.6, 0.4), "username": ProbPair(0.03, 0.97)},
     ProbPair(0.7, 0.3)),
    ("attribute confident but below threshold",
     {"domain": ProbPair(0.8, 0.2)}, ProbPair(0.4, 0.6)),
]
for title, attrs, model_pred in cases:
    label, trace = apply_heuristic(attrs, model_pred, cfg, item_id=title)
    print(f"{title:40s} -> {label:5s} via {trace.fired_branch}")

# threshold selection: score the cascade on validation items over a
# candidate grid and take the knee of the F1 curve
evidence = []
for k in range(6):  # strong correct attributes
    evidence.append(ItemEvidence(f"r{k}", {"domain": ProbPair(0.95, 0.05)}, ProbPair(0.4, 0.6), "real"))
    evidence.append(ItemEvidence(f"f{k}", {"domain": ProbPair(0.05, 0.95)}, ProbPair(0.6, 0.4), "fake"))
for k in range(4):  # noisy values: mildly wrong attribute, right model
    evidence.append(ItemEvidence(f"nr{k}", {"domain": ProbPair(0.35, 0.65)}, ProbPair(0.9, 0.1), "real"))
    evidence.append(ItemEvidence(f"nf{k}", {"domain": ProbPair(0.65, 0.35)}, ProbPair(0.1, 0.9), "fake"))

grid = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
threshold, curve = select_threshold_elbow(evidence, grid, priority=("domain",))
print("\nthreshold  F1")
for t, f1 in curve:
    marker = "  <- knee" if t == threshold else ""
    print(f"{t:.2f}       {f1:.3f}{marker}")
