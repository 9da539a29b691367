/**
 * Read a corpus, run every requested model, emit predictions.csv.
 *
 * The output is the exact wire format the downstream pipeline imports:
 * header `item_id,model_name,p_real,p_fake`, one row per item x model,
 * probabilities printed with at most 9 significant digits and summing
 * to 1 within 1e-4.
 */

import * as fs from "fs";

import { TinyTransformer } from "./model";
import { fineTune, LabeledText } from "./train";

export const PREDICTIONS_HEADER = "item_id,model_name,p_real,p_fake";

export interface ExportJob {
  models: string[];
  corpusPath: string;
  outPath: string;
  finetune: boolean;
  epochs: number;
  seed: number;
}

export interface CorpusItem {
  id: string;
  text: string;
  label: "real" | "fake" | null;
}

export function readCorpus(path: string): CorpusItem[] {
  const items: CorpusItem[] = [];
  const seen = new Set<string>();
  for (const line of fs.readFileSync(path, "utf-8").split("\n")) {
    const trimmed = line.trim();
    if (!trimmed) continue;
    const record = JSON.parse(trimmed);
    if (typeof record.id !== "string" || typeof record.text !== "string") {
      throw new Error(`corpus record needs string id and text: ${trimmed.slice(0, 80)}`);
    }
    if (seen.has(record.id)) throw new Error(`duplicate item id: ${record.id}`);
    seen.add(record.id);
    items.push({ id: record.id, text: record.text, label: record.label ?? null });
  }
  if (items.length === 0) throw new Error(`corpus is empty: ${path}`);
  return items;
}

function formatProb(p: number): string {
  // shortest representation within 9 significant digits
  return String(Number(p.toPrecision(9)));
}

export function exportPredictions(job: ExportJob): string {
  if (job.models.length === 0) throw new Error("need at least one model identifier");
  const items = readCorpus(job.corpusPath);
  const labeled = items.filter((it): it is CorpusItem & LabeledText => it.label !== null);

  const lines = [PREDICTIONS_HEADER];
  for (const modelId of job.models) {
    const model = new TinyTransformer(modelId);
    if (job.finetune) {
      if (labeled.length === 0) {
        throw new Error("--finetune requires labeled items in the corpus");
      }
      const losses = fineTune(model, labeled, { epochs: job.epochs, seed: job.seed });
      console.log(
        `${modelId}: fine-tuned ${job.epochs} epoch(s) on ${labeled.length} items, ` +
          `loss ${losses[0].toFixed(4)} -> ${losses[losses.length - 1].toFixed(4)}`,
      );
    }
    for (const item of items) {
      const [pReal, pFake] = model.predict(item.text);
      lines.push(`${item.id},${modelId},${formatProb(pReal)},${formatProb(pFake)}`);
    }
  }
  const text = lines.join("\n") + "\n";
  fs.writeFileSync(job.outPath, text, "utf-8");
  return text;
}
