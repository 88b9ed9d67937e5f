/**
 * A small bidirectional transformer encoder over tfjs tensors.
 *
 * A model lives in a directory:
 *   config.json   hidden size, layer/head counts, intermediate size,
 *                 max positions, layer-norm epsilon
 *   vocab.json    {"pieces": [...]} word-piece inventory
 *   weights.json  {"name": {"shape": [...], "values": [...]}}
 *   labels.json   optional; relation labels of a fine-tuned pair head
 *
 * Weights are held as tf.Variables so the same forward pass serves both
 * inference and fine-tuning. All math is float32 on the deterministic
 * CPU backend.
 */

import { mkdirSync, readFileSync, writeFileSync } from "node:fs";
import { join } from "node:path";

import * as tf from "@tensorflow/tfjs";

import { Tokenizer } from "./tokenizer.js";

export interface ModelConfig {
  hidden_size: number;
  num_layers: number;
  num_heads: number;
  intermediate_size: number;
  max_position_embeddings: number;
  layer_norm_eps: number;
}

export class Encoder {
  readonly config: ModelConfig;
  readonly tokenizer: Tokenizer;
  readonly weights: Map<string, tf.Variable>;
  labels: string[] | null;

  constructor(config: ModelConfig, tokenizer: Tokenizer,
              weights: Map<string, tf.Variable>, labels: string[] | null = null) {
    this.config = config;
    this.tokenizer = tokenizer;
    this.weights = weights;
    this.labels = labels;
  }

  get hiddenSize(): number {
    return this.config.hidden_size;
  }

  private w(name: string): tf.Variable {
    const found = this.weights.get(name);
    if (!found) throw new Error(`model is missing weight ${name}`);
    return found;
  }

  private layerNorm(x: tf.Tensor, prefix: string): tf.Tensor {
    const eps = this.config.layer_norm_eps;
    const mean = x.mean(-1, true);
    const centered = x.sub(mean);
    const variance = centered.square().mean(-1, true);
    const normed = centered.div(variance.add(eps).sqrt());
    return normed.mul(this.w(`${prefix}.gamma`)).add(this.w(`${prefix}.beta`));
  }

  /**
   * Final hidden states for one sequence: [T, hidden].
   * `ids` and `segments` come from encodeSequence.
   */
  forward(ids: number[], segments: number[]): tf.Tensor2D {
    const cfg = this.config;
    if (ids.length > cfg.max_position_embeddings) {
      throw new Error(
        `sequence of ${ids.length} tokens exceeds max positions ${cfg.max_position_embeddings}`);
    }
    return tf.tidy(() => {
      const tok = tf.gather(this.w("embeddings.token"), tf.tensor1d(ids, "int32"));
      const pos = tf.slice(this.w("embeddings.position"), [0, 0], [ids.length, cfg.hidden_size]);
      const seg = tf.gather(this.w("embeddings.segment"), tf.tensor1d(segments, "int32"));
      let x = this.layerNorm(tok.add(pos).add(seg), "embeddings.ln");

      const headDim = cfg.hidden_size / cfg.num_heads;
      for (let layer = 0; layer < cfg.num_layers; layer++) {
        const p = `layer${layer}`;
        const q = x.matMul(this.w(`${p}.attn.wq`)).add(this.w(`${p}.attn.bq`));
        const k = x.matMul(this.w(`${p}.attn.wk`)).add(this.w(`${p}.attn.bk`));
        const v = x.matMul(this.w(`${p}.attn.wv`)).add(this.w(`${p}.attn.bv`));
        const split = (t: tf.Tensor) =>
          t.reshape([ids.length, cfg.num_heads, headDim]).transpose([1, 0, 2]);
        const scores = split(q)
          .matMul(split(k), false, true)
          .div(Math.sqrt(headDim));
        const attended = tf.softmax(scores, -1).matMul(split(v));
        const merged = attended.transpose([1, 0, 2]).reshape([ids.length, cfg.hidden_size]);
        const attnOut = merged.matMul(this.w(`${p}.attn.wo`)).add(this.w(`${p}.attn.bo`));
        x = this.layerNorm(x.add(attnOut), `${p}.ln1`);

        const inner = x.matMul(this.w(`${p}.ffn.w1`)).add(this.w(`${p}.ffn.b1`));
        const act = gelu(inner);
        const ffnOut = act.matMul(this.w(`${p}.ffn.w2`)).add(this.w(`${p}.ffn.b2`));
        x = this.layerNorm(x.add(ffnOut), `${p}.ln2`);
      }
      return x as tf.Tensor2D;
    });
  }

  /** Classifier logits over the aggregate token; requires a pair head. */
  classifyLogits(hidden: tf.Tensor2D): tf.Tensor1D {
    return tf.tidy(() => {
      const cls = hidden.slice([0, 0], [1, this.config.hidden_size]);
      return cls.matMul(this.w("classifier.w")).add(this.w("classifier.b"))
        .reshape([-1]) as tf.Tensor1D;
    });
  }

  hasClassifier(): boolean {
    return this.weights.has("classifier.w");
  }

  addClassifier(labels: string[], seed: number): void {
    const h = this.config.hidden_size;
    const rng = mulberry32(seed);
    const values = Float32Array.from(
      { length: h * labels.length }, () => (rng() * 2 - 1) * 0.02);
    this.weights.set("classifier.w", tf.variable(tf.tensor2d(values, [h, labels.length])));
    this.weights.set("classifier.b", tf.variable(tf.zeros([labels.length])));
    this.labels = labels;
  }

  trainableVariables(): tf.Variable[] {
    return [...this.weights.values()];
  }

  dispose(): void {
    for (const variable of this.weights.values()) variable.dispose();
    this.weights.clear();
  }
}

/** Exact GELU via erf. */
function gelu(x: tf.Tensor): tf.Tensor {
  return x.mul(tf.erf(x.div(Math.SQRT2)).add(1)).div(2);
}

export function loadModel(dir: string): Encoder {
  const config = JSON.parse(readFileSync(join(dir, "config.json"), "utf-8")) as ModelConfig;
  if (config.hidden_size % config.num_heads !== 0) {
    throw new Error("hidden_size must be divisible by num_heads");
  }
  const vocab = JSON.parse(readFileSync(join(dir, "vocab.json"), "utf-8"));
  const tokenizer = new Tokenizer(vocab.pieces);
  const raw = JSON.parse(readFileSync(join(dir, "weights.json"), "utf-8")) as
    Record<string, { shape: number[]; values: number[] }>;
  const weights = new Map<string, tf.Variable>();
  for (const [name, entry] of Object.entries(raw)) {
    weights.set(name, tf.variable(tf.tensor(entry.values, entry.shape as any)));
  }
  let labels: string[] | null = null;
  try {
    labels = JSON.parse(readFileSync(join(dir, "labels.json"), "utf-8")).labels;
  } catch {
    labels = null;
  }
  return new Encoder(config, tokenizer, weights, labels);
}

export function saveModel(encoder: Encoder, dir: string): void {
  mkdirSync(dir, { recursive: true });
  writeFileSync(join(dir, "config.json"), JSON.stringify(encoder.config, null, 2));
  writeFileSync(join(dir, "vocab.json"),
                JSON.stringify({ pieces: encoder.tokenizer.pieces }, null, 2));
  const out: Record<string, { shape: number[]; values: number[] }> = {};
  for (const [name, variable] of encoder.weights.entries()) {
    out[name] = {
      shape: variable.shape.slice(),
      values: Array.from(variable.dataSync()),
    };
  }
  writeFileSync(join(dir, "weights.json"), JSON.stringify(out));
  if (encoder.labels) {
    writeFileSync(join(dir, "labels.json"), JSON.stringify({ labels: encoder.labels }));
  }
}

export function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) >>> 0;
    let t = state;
    t = Math.imul(t ^ (t >>> 15), t | 1);
    t ^= t + Math.imul(t ^ (t >>> 7), t | 61);
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}
