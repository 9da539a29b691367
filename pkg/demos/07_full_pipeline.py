"""Walkthrough: the whole nine-stage pipeline on a synthetic corpus.

Generates the bundled benchmark (strong attributes, weak text, 5% label
noise), writes a config file, runs every stage, and prints the report
comparing the plain soft-voting ensemble against the fusion network
with heuristic post-processing.  Run with:

    python3 demos/07_full_pipeline.py
"""

import json
import tempfile
from pathlib import Path

from fusionet.corpus import write_items
from fusionet.datasets import generate, lift_benchmark_spec
from fusionet.pipeline import load_config, run_pipeline

workdir = Path(tempfile.mkdtemp(prefix="fusionet-demo-"))
corpus_path = workdir / "items.jsonl"
write_items(generate(lift_benchmark_spec()), corpus_path)
print(f"synthetic corpus: {corpus_path}")

config_path = workdir / "pipeline.cfg"
config_path.write_text(
    f"""[run]
name = demo
seed = 1234

[input]
items = {corpus_path}
kind = tweet

[backbone]
source = train

[ensemble]
mode = soft

[features]
kinds = domain,username
base = ensemble

[oversample]
method = kmeans-smote
target_ratio = 1.0

[sffn]
hidden = 32,16
dropout = 0.2
mc_passes = 50

[heuristic]
priority = domain,username
threshold = auto
grid = 0.55:0.95:0.05

[evaluate]
averaging = weighted
"""
)

run_dir = run_pipeline(load_config(config_path, env={}), out_root=workdir / "runs")
print(f"run directory:    {run_dir}\n")

report = json.loads((run_dir / "report.json").read_text())
threshold = json.loads((run_dir / "threshold.json").read_text())
print(f"elbow-selected threshold: {threshold['threshold']}\n")
print("split/system             accuracy   f1       nll      brier")
for key in sorted(report):
    r = report[key]
    print(f"{key:24s} {r['accuracy']:.4f}     {r['f1']:.4f}   {r['nll']:.4f}   {r['brier']:.4f}")

lift = report["test/final"]["f1"] - report["test/ensemble"]["f1"]
print(f"\ntest-set F1 lift over the soft-voting ensemble: +{lift:.4f}")
print("rerunning with the same config reproduces this directory byte for byte")
