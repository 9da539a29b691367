"""Smoke test of the TypeScript exporter against the import surface.

The exporter lives in exporter/ and only talks to the pipeline through
the predictions.csv wire format. These tests run only when node and
the built exporter are present (``npm test`` inside exporter/ builds
it); the rest of the suite never needs them.
"""

import json
import shutil
import subprocess
from pathlib import Path

import pytest

from fusionet.backbone import read_predictions
from fusionet.pipeline import PipelineConfig, run_pipeline

EXPORTER_CLI = Path(__file__).resolve().parent.parent / "exporter" / "dist" / "src" / "cli.js"

pytestmark = pytest.mark.skipif(
    shutil.which("node") is None or not EXPORTER_CLI.is_file(),
    reason="node or the built exporter (exporter/dist) is not available",
)


def write_toy_corpus(path, n=20):
    lines = []
    for i in range(n):
        real = i % 2 == 0
        lines.append(json.dumps({
            "id": f"item-{i}",
            "text": f"ministry confirms update {i}" if real else f"miracle hoax spreads {i}",
            "label": "real" if real else "fake",
            "attributes": {"domain": ["gov.example" if real else "spoof.example"]},
        }))
    path.write_text("\n".join(lines) + "\n")


def run_exporter(corpus, out, *extra):
    return subprocess.run(
        ["node", str(EXPORTER_CLI), "--models", "tiny-a,tiny-b",
         "--corpus", str(corpus), "--out", str(out), *extra],
        capture_output=True, text=True, timeout=120,
    )


def test_exporter_output_passes_read_predictions(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    write_toy_corpus(corpus)
    out = tmp_path / "predictions.csv"
    proc = run_exporter(corpus, out, "--finetune", "--epochs", "3", "--seed", "0")
    assert proc.returncode == 0, proc.stderr
    matrix = read_predictions(out)
    assert matrix.model_names == ("tiny-a", "tiny-b")
    assert len(matrix.item_ids) == 20
    assert abs(matrix.probs.sum(axis=2) - 1.0).max() < 1e-6


def test_exported_predictions_drive_pipeline_end_to_end(tmp_path):
    corpus = tmp_path / "corpus.jsonl"
    write_toy_corpus(corpus)
    out = tmp_path / "predictions.csv"
    assert run_exporter(corpus, out).returncode == 0
    cfg = PipelineConfig(
        name="exporter-smoke",
        seed=5,
        input_items=str(corpus),
        backbone_source="import",
        predictions_path=str(out),
        kinds=("domain",),
        priority=("domain",),
        oversample_method="none",
        sffn_epochs=10,
        sffn_batch_size=8,
        mc_passes=5,
        threshold=0.88,
    )
    run_dir = run_pipeline(cfg, out_root=tmp_path / "runs")
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert len(manifest["stages"]) == 9
    report = json.loads((run_dir / "report.json").read_text())
    assert set(report) >= {"test/ensemble", "test/final"}
