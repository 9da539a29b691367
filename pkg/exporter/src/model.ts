/**
 * A tiny transformer encoder with a two-class softmax head.
 *
 * No checkpoint downloads happen at desk scale: "loading" a model
 * identifier materializes deterministic pretrained-style weights seeded
 * from the identifier, so distinct identifiers behave like distinct
 * members of a model family and the same identifier is always the same
 * model. The architecture is the usual one: token + sinusoidal
 * position embeddings, one self-attention block with residual + layer
 * norm, a feed-forward block with residual + layer norm, mean pooling,
 * dense head, softmax.
 */

import { Rng } from "./rng";
import { tokenize } from "./tokenizer";

export interface ModelConfig {
  vocabSize: number;
  dim: number;
  ffDim: number;
}

export const DEFAULT_CONFIG: ModelConfig = { vocabSize: 512, dim: 32, ffDim: 64 };

type Matrix = Float64Array; // row-major

function randMatrix(rng: Rng, rows: number, cols: number, scale: number): Matrix {
  const m = new Float64Array(rows * cols);
  for (let i = 0; i < m.length; i++) m[i] = rng.normal() * scale;
  return m;
}

export class TinyTransformer {
  readonly id: string;
  readonly cfg: ModelConfig;
  embeddings: Matrix; // vocab x dim
  wq: Matrix;
  wk: Matrix;
  wv: Matrix;
  wo: Matrix; // dim x dim each
  ff1: Matrix; // dim x ffDim
  ff1b: Float64Array;
  ff2: Matrix; // ffDim x dim
  ff2b: Float64Array;
  headW: Matrix; // dim x 2
  headB: Float64Array;

  constructor(id: string, cfg: ModelConfig = DEFAULT_CONFIG) {
    this.id = id;
    this.cfg = cfg;
    const rng = new Rng(`pretrained:${id}`);
    const { vocabSize, dim, ffDim } = cfg;
    const scale = 1.0 / Math.sqrt(dim);
    this.embeddings = randMatrix(rng, vocabSize, dim, 1.0);
    this.wq = randMatrix(rng, dim, dim, scale);
    this.wk = randMatrix(rng, dim, dim, scale);
    this.wv = randMatrix(rng, dim, dim, scale);
    this.wo = randMatrix(rng, dim, dim, scale);
    this.ff1 = randMatrix(rng, dim, ffDim, scale);
    this.ff1b = new Float64Array(ffDim);
    this.ff2 = randMatrix(rng, ffDim, dim, 1.0 / Math.sqrt(ffDim));
    this.ff2b = new Float64Array(dim);
    this.headW = randMatrix(rng, dim, 2, scale);
    this.headB = new Float64Array(2);
  }

  /** Encode token ids into the mean-pooled final hidden state. */
  encode(tokens: number[]): Float64Array {
    const { dim } = this.cfg;
    const n = tokens.length;

    // token + sinusoidal position embeddings
    const x: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const row = new Float64Array(dim);
      const base = tokens[i] * dim;
      for (let d = 0; d < dim; d++) {
        const angle = i / Math.pow(10000, (2 * Math.floor(d / 2)) / dim);
        row[d] = this.embeddings[base + d] + (d % 2 === 0 ? Math.sin(angle) : Math.cos(angle));
      }
      x.push(row);
    }

    // single-head self-attention
    const q = x.map((row) => matVec(this.wq, row, dim, dim));
    const k = x.map((row) => matVec(this.wk, row, dim, dim));
    const v = x.map((row) => matVec(this.wv, row, dim, dim));
    const invSqrt = 1.0 / Math.sqrt(dim);
    const attended: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const scores = new Float64Array(n);
      for (let j = 0; j < n; j++) scores[j] = dot(q[i], k[j]) * invSqrt;
      softmaxInPlace(scores);
      const ctx = new Float64Array(dim);
      for (let j = 0; j < n; j++) {
        for (let d = 0; d < dim; d++) ctx[d] += scores[j] * v[j][d];
      }
      attended.push(matVec(this.wo, ctx, dim, dim));
    }

    // residual + layer norm, feed-forward block, residual + layer norm
    const h2: Float64Array[] = [];
    for (let i = 0; i < n; i++) {
      const h1 = layerNorm(addVec(x[i], attended[i]));
      const hidden = matVec(this.ff1, h1, dim, this.cfg.ffDim);
      for (let d = 0; d < hidden.length; d++) hidden[d] = Math.max(0, hidden[d] + this.ff1b[d]);
      const out = matVec(this.ff2, hidden, this.cfg.ffDim, dim);
      for (let d = 0; d < dim; d++) out[d] += this.ff2b[d];
      h2.push(layerNorm(addVec(h1, out)));
    }

    const pooled = new Float64Array(dim);
    for (const row of h2) for (let d = 0; d < dim; d++) pooled[d] += row[d] / n;
    return pooled;
  }

  /** Class probabilities [pReal, pFake] from the softmax head. */
  classify(pooled: Float64Array): [number, number] {
    const logits = new Float64Array(2);
    for (let c = 0; c < 2; c++) {
      let z = this.headB[c];
      for (let d = 0; d < this.cfg.dim; d++) z += pooled[d] * this.headW[d * 2 + c];
      logits[c] = z;
    }
    softmaxInPlace(logits);
    return [logits[0], logits[1]];
  }

  predict(text: string): [number, number] {
    return this.classify(this.encode(tokenize(text, this.cfg.vocabSize)));
  }
}

// --- small vector helpers ---------------------------------------------------

function dot(a: Float64Array, b: Float64Array): number {
  let s = 0;
  for (let i = 0; i < a.length; i++) s += a[i] * b[i];
  return s;
}

function addVec(a: Float64Array, b: Float64Array): Float64Array {
  const out = new Float64Array(a.length);
  for (let i = 0; i < a.length; i++) out[i] = a[i] + b[i];
  return out;
}

/** y = x W for row-major W of shape rows x cols (x has length rows). */
function matVec(w: Matrix, x: Float64Array, rows: number, cols: number): Float64Array {
  const out = new Float64Array(cols);
  for (let r = 0; r < rows; r++) {
    const xv = x[r];
    if (xv === 0) continue;
    const base = r * cols;
    for (let c = 0; c < cols; c++) out[c] += xv * w[base + c];
  }
  return out;
}

function softmaxInPlace(z: Float64Array): void {
  let max = -Infinity;
  for (const v of z) if (v > max) max = v;
  let sum = 0;
  for (let i = 0; i < z.length; i++) {
    z[i] = Math.exp(z[i] - max);
    sum += z[i];
  }
  for (let i = 0; i < z.length; i++) z[i] /= sum;
}

function layerNorm(x: Float64Array): Float64Array {
  let mean = 0;
  for (const v of x) mean += v / x.length;
  let variance = 0;
  for (const v of x) variance += ((v - mean) * (v - mean)) / x.length;
  const inv = 1.0 / Math.sqrt(variance + 1e-5);
  const out = new Float64Array(x.length);
  for (let i = 0; i < x.length; i++) out[i] = (x[i] - mean) * inv;
  return out;
}
