/**
 * Hashed word-piece-free tokenizer: lowercase word tokens mapped onto a
 * fixed vocabulary by hashing, truncated to the maximum input sequence
 * length (128, matching the backbone training setup the pipeline
 * assumes for its prediction vectors).
 */

import { hashString } from "./rng";

export const MAX_SEQ_LEN = 128;

export function tokenize(text: string, vocabSize: number): number[] {
  const words = text.toLowerCase().match(/[a-z0-9']+/g) ?? [];
  const ids = words.slice(0, MAX_SEQ_LEN).map((w) => hashString(w) % vocabSize);
  return ids.length > 0 ? ids : [0];
}
