/**
 * Local validator for the predictions.csv contract, mirroring the
 * checks the consuming pipeline applies on import: exact header, four
 * fields per row, probabilities inside [0, 1] summing to 1 within
 * 1e-4, and a complete item x model grid with no duplicates.
 */

import { PREDICTIONS_HEADER } from "./exporter";

export function validatePredictionsCsv(text: string): { items: number; models: number } {
  const lines = text.split("\n").filter((line) => line.length > 0);
  if (lines[0] !== PREDICTIONS_HEADER) {
    throw new Error(`bad header: ${lines[0]}`);
  }
  const models = new Set<string>();
  const rowsPerItem = new Map<string, Set<string>>();
  for (let i = 1; i < lines.length; i++) {
    const parts = lines[i].split(",");
    if (parts.length !== 4) throw new Error(`line ${i + 1}: expected 4 fields`);
    const [itemId, modelName, realStr, fakeStr] = parts;
    const pReal = Number(realStr);
    const pFake = Number(fakeStr);
    if (!Number.isFinite(pReal) || !Number.isFinite(pFake)) {
      throw new Error(`line ${i + 1}: non-numeric probability`);
    }
    if (pReal < 0 || pReal > 1 || pFake < 0 || pFake > 1) {
      throw new Error(`line ${i + 1}: probability outside [0, 1]`);
    }
    if (Math.abs(pReal + pFake - 1) > 1e-4) {
      throw new Error(`line ${i + 1} (${itemId},${modelName}): probabilities sum to ${pReal + pFake}`);
    }
    models.add(modelName);
    let seen = rowsPerItem.get(itemId);
    if (!seen) rowsPerItem.set(itemId, (seen = new Set()));
    if (seen.has(modelName)) throw new Error(`duplicate row for (${itemId}, ${modelName})`);
    seen.add(modelName);
  }
  if (rowsPerItem.size === 0) throw new Error("no prediction rows");
  for (const [itemId, seen] of rowsPerItem) {
    for (const model of models) {
      if (!seen.has(model)) throw new Error(`item ${itemId} has no row for model ${model}`);
    }
  }
  return { items: rowsPerItem.size, models: models.size };
}
