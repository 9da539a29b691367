/**
 * Head fine-tuning on a labeled corpus.
 *
 * At desk scale the encoder stays frozen and only the classification
 * head trains (AdamW, cross-entropy, learning rate 2e-5, batch size 32
 * by default, matching the configuration the pipeline's prediction
 * vectors are assumed to come from). Encodings are computed once per
 * item, so a handful of epochs over small corpora is cheap.
 */

import { TinyTransformer } from "./model";
import { Rng } from "./rng";
import { tokenize } from "./tokenizer";

export interface TrainOptions {
  epochs: number;
  lr: number;
  batchSize: number;
  seed: number;
}

export const DEFAULT_TRAIN: TrainOptions = { epochs: 3, lr: 2e-5, batchSize: 32, seed: 0 };

export interface LabeledText {
  text: string;
  label: "real" | "fake";
}

export function fineTune(
  model: TinyTransformer,
  corpus: LabeledText[],
  options: Partial<TrainOptions> = {},
): number[] {
  const opt = { ...DEFAULT_TRAIN, ...options };
  if (corpus.length === 0) throw new Error("fine-tuning needs labeled items");

  const pooled = corpus.map((item) => model.encode(tokenize(item.text, model.cfg.vocabSize)));
  const labels = corpus.map((item) => (item.label === "fake" ? 1 : 0));
  const dim = model.cfg.dim;

  const mW = new Float64Array(model.headW.length);
  const vW = new Float64Array(model.headW.length);
  const mB = new Float64Array(2);
  const vB = new Float64Array(2);
  const beta1 = 0.9;
  const beta2 = 0.999;
  const eps = 1e-8;
  const weightDecay = 1e-4;
  let step = 0;

  const rng = new Rng(`finetune:${opt.seed}`);
  const losses: number[] = [];
  for (let epoch = 0; epoch < opt.epochs; epoch++) {
    const order = corpus.map((_, i) => i);
    for (let i = order.length - 1; i > 0; i--) {
      const j = rng.int(i + 1);
      [order[i], order[j]] = [order[j], order[i]];
    }
    let epochLoss = 0;
    for (let start = 0; start < order.length; start += opt.batchSize) {
      const batch = order.slice(start, start + opt.batchSize);
      const gradW = new Float64Array(model.headW.length);
      const gradB = new Float64Array(2);
      for (const idx of batch) {
        const probs = model.classify(pooled[idx]);
        const y = labels[idx];
        epochLoss += -Math.log(Math.max(probs[y], 1e-15)) / corpus.length;
        for (let c = 0; c < 2; c++) {
          const delta = (probs[c] - (c === y ? 1 : 0)) / batch.length;
          gradB[c] += delta;
          for (let d = 0; d < dim; d++) gradW[d * 2 + c] += delta * pooled[idx][d];
        }
      }
      step += 1;
      const bc1 = 1 - Math.pow(beta1, step);
      const bc2 = 1 - Math.pow(beta2, step);
      for (let k = 0; k < gradW.length; k++) {
        mW[k] = beta1 * mW[k] + (1 - beta1) * gradW[k];
        vW[k] = beta2 * vW[k] + (1 - beta2) * gradW[k] * gradW[k];
        model.headW[k] -= opt.lr * ((mW[k] / bc1) / (Math.sqrt(vW[k] / bc2) + eps) + weightDecay * model.headW[k]);
      }
      for (let k = 0; k < 2; k++) {
        mB[k] = beta1 * mB[k] + (1 - beta1) * gradB[k];
        vB[k] = beta2 * vB[k] + (1 - beta2) * gradB[k] * gradB[k];
        model.headB[k] -= opt.lr * ((mB[k] / bc1) / (Math.sqrt(vB[k] / bc2) + eps));
      }
    }
    losses.push(epochLoss);
  }
  return losses;
}
