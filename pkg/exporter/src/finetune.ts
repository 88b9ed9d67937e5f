/**
 * Pair-classifier fine-tuning.
 *
 * A softmax head over the aggregate token is attached to the encoder and
 * the whole stack is trained with cross-entropy on the gold relation of
 * every (EDU, head) pair. Learning rates are restricted to the supported
 * grid {1e-5, 2e-5, 4e-5}. Out-of-memory failures halve the batch size
 * and retry once before giving up.
 */

import * as tf from "@tensorflow/tfjs";

import { Document, eduById, pairList } from "./corpus.js";
import { encodePair } from "./export.js";
import { Encoder, mulberry32 } from "./model.js";

export const LEARNING_RATES = [1e-5, 2e-5, 4e-5];

export interface FinetuneOptions {
  learningRate: number;
  epochs: number;
  batchSize: number;
  maxLen: number;
  seed: number;
  log?: (message: string) => void;
}

export interface FinetuneResult {
  labels: string[];
  epochLosses: number[];
}

/** ROOT first, then the remaining labels sorted; mirrors the consumer. */
export function labelInventory(corpus: Document[]): string[] {
  const seen = new Set<string>();
  for (const doc of corpus) for (const edu of doc.edus) seen.add(edu.relation);
  seen.delete("ROOT");
  return ["ROOT", ...[...seen].sort()];
}

export function finetunePairClassifier(
  encoder: Encoder,
  corpus: Document[],
  options: FinetuneOptions,
): FinetuneResult {
  if (!LEARNING_RATES.includes(options.learningRate)) {
    throw new Error(`learning rate must be one of ${LEARNING_RATES.join(", ")}`);
  }
  const positions = encoder.config.max_position_embeddings;
  if (options.maxLen > positions) {
    options = { ...options, maxLen: positions };
  }
  const labels = encoder.labels ?? labelInventory(corpus);
  if (!encoder.hasClassifier()) {
    encoder.addClassifier(labels, options.seed);
  }
  const labelIndex = new Map(labels.map((l, i) => [l, i]));

  interface Example { doc: Document; edu: number; head: number; label: number; }
  const examples: Example[] = [];
  for (const doc of corpus) {
    for (const [edu, head] of pairList(doc)) {
      const relation = eduById(doc, edu).relation;
      const label = labelIndex.get(relation);
      if (label === undefined) {
        throw new Error(`relation ${relation} missing from the label inventory`);
      }
      examples.push({ doc, edu, head, label });
    }
  }
  if (examples.length === 0) throw new Error("no pairs to fine-tune on");

  const optimizer = tf.train.adam(options.learningRate);
  const rng = mulberry32(options.seed);
  const variables = encoder.trainableVariables();
  const epochLosses: number[] = [];

  const batchLoss = (batch: Example[]): number => {
    const loss = optimizer.minimize(() => {
      const perExample = batch.map(({ doc, edu, head, label }) => {
        const hidden = encodePair(encoder, doc, edu, head, options.maxLen);
        const logits = encoder.classifyLogits(hidden);
        hidden.dispose();
        return tf.losses.softmaxCrossEntropy(
          tf.oneHot(tf.tensor1d([label], "int32"), labels.length).reshape([-1]),
          logits,
        );
      });
      return tf.addN(perExample).div(batch.length) as tf.Scalar;
    }, true, variables);
    const value = loss!.dataSync()[0];
    loss!.dispose();
    return value;
  };

  const runBatch = (batch: Example[]): number => {
    try {
      return batchLoss(batch);
    } catch (error) {
      const message = String(error);
      if (!/memory|alloc/i.test(message) || batch.length === 1) throw error;
      options.log?.(`batch of ${batch.length} failed (${message}); retrying halved`);
      const half = Math.ceil(batch.length / 2);
      return (runBatchOnce(batch.slice(0, half)) + runBatchOnce(batch.slice(half))) / 2;
    }
  };
  const runBatchOnce = (batch: Example[]): number => batchLoss(batch);

  for (let epoch = 0; epoch < options.epochs; epoch++) {
    const order = shuffled(examples.length, rng);
    let total = 0;
    let batches = 0;
    for (let start = 0; start < order.length; start += options.batchSize) {
      const batch = order.slice(start, start + options.batchSize)
        .map((i) => examples[i]);
      total += runBatch(batch);
      batches += 1;
    }
    epochLosses.push(total / batches);
    options.log?.(`epoch=${epoch + 1} loss=${(total / batches).toFixed(4)}`);
  }
  encoder.labels = labels;
  return { labels, epochLosses };
}

function shuffled(length: number, rng: () => number): number[] {
  const order = Array.from({ length }, (_, i) => i);
  for (let i = length - 1; i > 0; i--) {
    const j = Math.floor(rng() * (i + 1));
    [order[i], order[j]] = [order[j], order[i]];
  }
  return order;
}
