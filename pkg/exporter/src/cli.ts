#!/usr/bin/env node
/**
 * export-preds --models tiny-a,tiny-b --corpus corpus.jsonl --out predictions.csv
 *              [--finetune] [--epochs 3] [--seed 0]
 *
 * Runs each model over every corpus item and writes the combined
 * predictions.csv; with --finetune the classification heads first train
 * on the corpus's labeled items.
 */

import { exportPredictions } from "./exporter";
import { validatePredictionsCsv } from "./validate";

function parseArgs(argv: string[]): Map<string, string | boolean> {
  const args = new Map<string, string | boolean>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument: ${arg}`);
    const key = arg.slice(2);
    if (key === "finetune") {
      args.set(key, true);
    } else {
      const value = argv[++i];
      if (value === undefined) throw new Error(`--${key} needs a value`);
      args.set(key, value);
    }
  }
  return args;
}

function main(): number {
  const args = parseArgs(process.argv.slice(2));
  const models = args.get("models");
  const corpus = args.get("corpus");
  const out = args.get("out");
  if (typeof models !== "string" || typeof corpus !== "string" || typeof out !== "string") {
    console.error(
      "usage: export-preds --models <id,id,...> --corpus corpus.jsonl --out predictions.csv" +
        " [--finetune] [--epochs E] [--seed S]",
    );
    return 2;
  }
  const text = exportPredictions({
    models: models.split(",").filter((m) => m.length > 0),
    corpusPath: corpus,
    outPath: out,
    finetune: args.get("finetune") === true,
    epochs: Number(args.get("epochs") ?? 3),
    seed: Number(args.get("seed") ?? 0),
  });
  const { items, models: nModels } = validatePredictionsCsv(text);
  console.log(`wrote ${items * nModels} rows (${items} items x ${nModels} models) -> ${out}`);
  return 0;
}

try {
  process.exitCode = main();
} catch (err) {
  console.error(String(err instanceof Error ? err.message : err));
  process.exitCode = 1;
}
